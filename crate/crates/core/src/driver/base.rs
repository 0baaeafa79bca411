use std::sync::Arc;

use super::circle::CircleState;
use super::ou::{OuEvaluator, OuSeries};
use super::path::SamplePath;
use crate::error::{Error, Result};
use crate::Real;

/// State of the noise driver `ω`.
#[derive(Debug, Clone)]
pub enum Driver<T: Real> {
    Wiener(SamplePath<T>),
    Circle(CircleState<T>),
}

impl<T: Real> Driver<T> {
    /// The shift `θ_t`.
    pub fn shift(&self, t: T) -> Result<Self> {
        Ok(match self {
            Driver::Wiener(p) => Driver::Wiener(p.shift(t)?),
            Driver::Circle(c) => Driver::Circle(c.shift(t)),
        })
    }

    /// Time step shifts must be multiples of (zero for the circle).
    pub fn grid_step(&self) -> Option<T> {
        match self {
            Driver::Wiener(p) => Some(p.dt()),
            Driver::Circle(_) => None,
        }
    }

    /// The scalar observable `ξ(ω)` that channels are built from: the OU value
    /// `z(ω)` on a Wiener path and the angle on the circle.
    pub fn observable(&self, ev: &OuEvaluator<T>) -> Result<T> {
        match self {
            Driver::Wiener(p) => p.ou_at(ev, T::zero()),
            Driver::Circle(c) => Ok(c.angle()),
        }
    }

    pub fn as_path(&self) -> Option<&SamplePath<T>> {
        match self {
            Driver::Wiener(p) => Some(p),
            Driver::Circle(_) => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Driver::Wiener(_) => "wiener",
            Driver::Circle(_) => "circle",
        }
    }
}

/// A point `(τ, ω)` of the base `ℝ × Ω`.
#[derive(Debug, Clone)]
pub struct BasePoint<T: Real> {
    pub tau: T,
    pub driver: Driver<T>,
}

impl<T: Real> BasePoint<T> {
    pub fn new(tau: T, driver: Driver<T>) -> Self {
        Self { tau, driver }
    }

    pub fn circle(tau: T, angle: T) -> Self {
        Self::new(tau, Driver::Circle(CircleState::new(angle)))
    }

    pub fn wiener(tau: T, path: SamplePath<T>) -> Self {
        Self::new(tau, Driver::Wiener(path))
    }

    /// `Θ_t(τ, ω) = (τ + t, θ_t ω)`.
    pub fn shift(&self, t: T) -> Result<Self> {
        Ok(Self {
            tau: self.tau + t,
            driver: self.driver.shift(t)?,
        })
    }

    /// Lookup table for the observable along `r ↦ θ_r ω`.
    pub fn observable_track(&self, ev: &OuEvaluator<T>) -> Result<ObservableTrack<T>> {
        match &self.driver {
            Driver::Circle(c) => Ok(ObservableTrack::Circle { angle: c.angle() }),
            Driver::Wiener(p) => Ok(ObservableTrack::Ou {
                series: p.ou_series(ev)?,
                origin: p.origin(),
                dt: p.dt(),
                t_min: p.t_min(),
                t_max: p.t_max(),
            }),
        }
    }
}

/// The observable `r ↦ ξ(θ_r ω)` of a fixed base point, evaluated at elapsed
/// times `r` (piecewise-linear between path nodes).
#[derive(Debug, Clone)]
pub enum ObservableTrack<T: Real> {
    Circle {
        angle: T,
    },
    Ou {
        series: Arc<OuSeries<T>>,
        origin: usize,
        dt: T,
        t_min: T,
        t_max: T,
    },
}

impl<T: Real> ObservableTrack<T> {
    #[inline]
    pub fn at(&self, r: T) -> Result<T> {
        match self {
            ObservableTrack::Circle { angle } => Ok(super::circle::reduce(*angle + r)),
            ObservableTrack::Ou {
                series,
                origin,
                dt,
                t_min,
                t_max,
            } => {
                let pos = r / *dt;
                let fl = pos.floor();
                let frac = pos - fl;
                let i = *origin as i64 + fl.to_i64().unwrap_or(i64::MIN / 2);
                let node = |i: i64| {
                    if i < 0 {
                        None
                    } else {
                        series.at_node(i as usize)
                    }
                };
                let support = || Error::Support {
                    lo: r.f64(),
                    hi: r.f64(),
                    t_min: t_min.f64(),
                    t_max: t_max.f64(),
                };
                let a = node(i).ok_or_else(support)?;
                if frac == T::zero() {
                    return Ok(a);
                }
                let b = node(i + 1).ok_or_else(support)?;
                Ok(a + frac * (b - a))
            }
        }
    }

    /// Elapsed-time window on which the track is defined.
    pub fn window(&self) -> (T, T) {
        match self {
            ObservableTrack::Circle { .. } => (T::neg_infinity(), T::infinity()),
            ObservableTrack::Ou {
                series, origin, dt, ..
            } => {
                let lo = (T::from_usize_lossy(series.first_node()) - T::from_usize_lossy(*origin)) * *dt;
                let hi = (T::from_usize_lossy(series.last_node()) - T::from_usize_lossy(*origin)) * *dt;
                (lo, hi)
            }
        }
    }
}
