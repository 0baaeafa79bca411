//! The stationary Ornstein–Uhlenbeck observable
//! `z(θ_t ω) = −∫_{−T}^0 e^s (θ_t ω)(s) ds`.

use super::path::SamplePath;
use crate::error::{Error, Result};
use crate::Real;

/// Trapezoid quadrature of the truncated OU integral on the path grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuEvaluator<T: Real> {
    t_trunc: T,
}

impl<T: Real> Default for OuEvaluator<T> {
    fn default() -> Self {
        Self { t_trunc: T::lit(20.0) }
    }
}

/// An OU value together with the truncation bound `e^{−T}·sup|θ_t ω|` over
/// the quadrature window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuValue<T> {
    pub value: T,
    pub truncation_bound: T,
}

impl<T: Real> OuEvaluator<T> {
    pub fn new(t_trunc: T) -> Result<Self> {
        if !(t_trunc > T::zero()) || !t_trunc.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "OU truncation must be positive, got {t_trunc}"
            )));
        }
        Ok(Self { t_trunc })
    }

    pub fn t_trunc(&self) -> T {
        self.t_trunc
    }

    /// The quadrature step used on `p`: its grid step.
    pub fn quadrature_step(&self, p: &SamplePath<T>) -> T {
        p.dt()
    }

    /// Number of quadrature cells `K = T_trunc / dt`.
    pub(crate) fn cells(&self, dt: T) -> Result<usize> {
        let k = T::grid_index(self.t_trunc, dt).ok_or_else(|| {
            Error::InvalidGrid(format!(
                "OU truncation {} is not a multiple of the path step {}",
                self.t_trunc, dt
            ))
        })?;
        Ok(k as usize)
    }

    /// Direct evaluation of `z(θ_t ω)` for an on-grid `t`.
    pub fn eval(&self, p: &SamplePath<T>, t: T) -> Result<OuValue<T>> {
        let dt = p.dt();
        let k = self.cells(dt)?;
        p.require(t - self.t_trunc, t)?;
        let i = p.index_of(t)?;
        let (h, base) = (dt.f64(), p.node(i).f64());
        let mut acc = 0.0;
        let mut sup = 0.0f64;
        for j in 0..=k {
            let g = p.node(i - j).f64() - base;
            sup = sup.max(g.abs());
            let w = if j == 0 || j == k { 0.5 } else { 1.0 };
            acc += w * (-(j as f64) * h).exp() * g;
        }
        Ok(OuValue {
            value: T::lit(-h * acc),
            truncation_bound: T::lit((-self.t_trunc.f64()).exp() * sup),
        })
    }
}

/// `z(θ_{t_i} ω)` at every grid node `i` of a stored realization that has a
/// full truncation window behind it.
///
/// Built once per realization by the sliding recursion
/// `S_{i+1} = ω_{i+1} + e^{−h} S_i − e^{−(K+1)h} ω_{i−K}`, re-anchored by a
/// direct sum every few thousand nodes to stop rounding drift.
#[derive(Debug, Clone)]
pub struct OuSeries<T> {
    first: usize,
    values: Vec<T>,
}

const REANCHOR: usize = 4096;

impl<T: Real> OuSeries<T> {
    pub(crate) fn build(ev: &OuEvaluator<T>, p: &SamplePath<T>) -> Result<Self> {
        let raw = p.raw();
        let k = ev.cells(p.dt())?;
        if raw.len() <= k {
            return Err(Error::Support {
                lo: (p.t_max() - ev.t_trunc()).f64(),
                hi: p.t_max().f64(),
                t_min: p.t_min().f64(),
                t_max: p.t_max().f64(),
            });
        }
        let h = p.dt().f64();
        let q = (-h).exp();
        let tail = (-(k as f64) * h).exp();
        let drop = (-((k + 1) as f64) * h).exp();
        let weight_sum = {
            let mut s = 0.0;
            for j in 0..=k {
                let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                s += w * (-(j as f64) * h).exp();
            }
            s
        };
        let direct = |i: usize| -> f64 {
            (0..=k)
                .map(|j| (-(j as f64) * h).exp() * raw[i - j].f64())
                .sum()
        };
        let mut values = Vec::with_capacity(raw.len() - k);
        let mut s = 0.0;
        for i in k..raw.len() {
            if (i - k) % REANCHOR == 0 {
                s = direct(i);
            } else {
                s = raw[i].f64() + q * s - drop * raw[i - k - 1].f64();
            }
            let trap = s - 0.5 * raw[i].f64() - 0.5 * tail * raw[i - k].f64();
            values.push(T::lit(-h * (trap - weight_sum * raw[i].f64())));
        }
        Ok(Self { first: k, values })
    }

    /// Value at raw node `i`, if a full truncation window is available there.
    #[inline]
    pub fn at_node(&self, i: usize) -> Option<T> {
        i.checked_sub(self.first).and_then(|j| self.values.get(j).copied())
    }

    /// First raw node with a value.
    pub fn first_node(&self) -> usize {
        self.first
    }

    pub fn last_node(&self) -> usize {
        self.first + self.values.len() - 1
    }
}

impl<T: Real> SamplePath<T> {
    /// `z(θ_t ω)` for on-grid `t` through the cached series.
    pub fn ou_at(&self, ev: &OuEvaluator<T>, t: T) -> Result<T> {
        let i = self.index_of(t)?;
        let s = self.ou_series(ev)?;
        s.at_node(i).ok_or(Error::Support {
            lo: (t - ev.t_trunc()).f64(),
            hi: t.f64(),
            t_min: self.t_min().f64(),
            t_max: self.t_max().f64(),
        })
    }
}
