use std::io::Write;
use std::sync::Arc;

use crate::cocycle::{BaseChannels, ChannelSource, FieldSpec};
use crate::driver::{BasePoint, OuEvaluator};
use crate::error::{Error, Result};
use crate::Real;

/// Samples of a function `σ` on a uniform grid, with `σ(0)` at node `origin`.
///
/// Translates `ϑ_s σ = σ(s + ·)` share samples and only move the origin, like
/// shifted sample paths.
#[derive(Debug, Clone)]
pub struct SymbolFunction<T> {
    samples: Arc<Vec<T>>,
    dt: T,
    origin: usize,
    tau_sigma: T,
}

impl<T: Real> SymbolFunction<T> {
    /// Samples `f` at `k·dt` for `k` with `k·dt ∈ [lo, hi]`.
    pub fn from_fn(f: impl Fn(T) -> T, dt: T, lo: T, hi: T, tau_sigma: T) -> Result<Self> {
        let (k0, k1) = Self::grid_range(dt, lo, hi)?;
        let samples = (k0..=k1).map(|k| f(T::lit(k as f64) * dt)).collect();
        Self::from_samples(samples, dt, (-k0) as usize, tau_sigma)
    }

    pub fn from_samples(samples: Vec<T>, dt: T, origin: usize, tau_sigma: T) -> Result<Self> {
        if origin >= samples.len() {
            return Err(Error::InvalidGrid("origin outside the sample window".into()));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite symbol sample {x}")));
        }
        Ok(Self {
            samples: Arc::new(samples),
            dt,
            origin,
            tau_sigma,
        })
    }

    fn grid_range(dt: T, lo: T, hi: T) -> Result<(i64, i64)> {
        if !(dt > T::zero()) || !(lo <= T::zero() && T::zero() <= hi) {
            return Err(Error::InvalidGrid(format!("need dt > 0 and lo ≤ 0 ≤ hi, got {dt}, [{lo}, {hi}]")));
        }
        let k0 = T::grid_index(lo, dt).ok_or(Error::OffGrid { t: lo.f64(), step: dt.f64() })?;
        let k1 = T::grid_index(hi, dt).ok_or(Error::OffGrid { t: hi.f64(), step: dt.f64() })?;
        Ok((k0, k1))
    }

    /// `σ(t) = β(Θ_t b)` for `t ∈ [−half_width, half_width]`, where `β` is the
    /// single channel of `field`; `τ_σ` is the base time `τ`.
    ///
    /// Sampled with step `dt`; taking `dt` equal to half the integration step
    /// makes the samples coincide with the RK4 stage values of the cocycle.
    pub fn orbit(field: &FieldSpec<T>, b: &BasePoint<T>, half_width: T, dt: T, ev: &OuEvaluator<T>) -> Result<Self> {
        if field.channels().len() != 1 {
            return Err(Error::Field(format!(
                "a symbol needs a field with exactly one channel, found {}",
                field.channels().len()
            )));
        }
        let (k0, k1) = Self::grid_range(dt, -half_width, half_width)?;
        let src: BaseChannels<T> = field.source(b, ev)?;
        let mut out = [T::zero()];
        let mut samples = Vec::with_capacity((k1 - k0 + 1) as usize);
        for k in k0..=k1 {
            src.fill(T::lit(k as f64) * dt, &mut out)?;
            samples.push(out[0]);
        }
        Self::from_samples(samples, dt, (-k0) as usize, b.tau)
    }

    pub fn constant(value: T, like: &Self) -> Self {
        Self {
            samples: Arc::new(vec![value; like.samples.len()]),
            dt: like.dt,
            origin: like.origin,
            tau_sigma: like.tau_sigma,
        }
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn tau_sigma(&self) -> T {
        self.tau_sigma
    }

    pub fn t_min(&self) -> T {
        -T::from_usize_lossy(self.origin) * self.dt
    }

    pub fn t_max(&self) -> T {
        T::from_usize_lossy(self.samples.len() - 1 - self.origin) * self.dt
    }

    /// Sample at grid node `k` (relative to the origin).
    #[inline]
    pub fn node(&self, k: i64) -> Option<T> {
        let i = self.origin as i64 + k;
        if i < 0 {
            return None;
        }
        self.samples.get(i as usize).copied()
    }

    /// Value at `t`, interpolating linearly between nodes.
    pub fn at(&self, t: T) -> Result<T> {
        let pos = t / self.dt;
        let fl = pos.floor();
        let k = fl.to_i64().unwrap_or(i64::MIN / 2);
        let frac = pos - fl;
        let err = || Error::Support {
            lo: t.f64(),
            hi: t.f64(),
            t_min: self.t_min().f64(),
            t_max: self.t_max().f64(),
        };
        let a = self.node(k).ok_or_else(err)?;
        if frac == T::zero() {
            return Ok(a);
        }
        let b = self.node(k + 1).ok_or_else(err)?;
        Ok(a + frac * (b - a))
    }

    /// `ϑ_s σ = σ(s + ·)`.
    pub fn translate(&self, s: T) -> Result<Self> {
        let k = T::grid_index(s, self.dt).ok_or(Error::OffGrid { t: s.f64(), step: self.dt.f64() })?;
        let origin = self.origin as i64 + k;
        if origin < 0 || origin >= self.samples.len() as i64 {
            return Err(Error::Support {
                lo: s.f64(),
                hi: s.f64(),
                t_min: self.t_min().f64(),
                t_max: self.t_max().f64(),
            });
        }
        Ok(Self {
            samples: Arc::clone(&self.samples),
            dt: self.dt,
            origin: origin as usize,
            tau_sigma: self.tau_sigma + s,
        })
    }

    /// Whether `[lo, hi]` lies inside the stored window.
    pub fn covers(&self, lo: T, hi: T) -> bool {
        let slack = self.dt * T::lit(1e-9);
        lo >= self.t_min() - slack && hi <= self.t_max() + slack
    }

    /// Nodes `k` with `k·dt ∈ [−w, w]`.
    pub(crate) fn node_span(&self, w: T) -> i64 {
        (w / self.dt + T::lit(1e-9)).floor().to_i64().unwrap_or(0)
    }

    /// Sample block: `dt tau_sigma t_min count`, then the values.
    pub fn write_block<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {} {}", self.dt, self.tau_sigma, self.t_min(), self.samples.len())?;
        for v in self.samples.iter() {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}

/// Feeds a symbol as the single channel of a field: `σ(r)` at elapsed `r`,
/// with absolute time `τ_σ + r`.
impl<T: Real> ChannelSource<T> for SymbolFunction<T> {
    fn len(&self) -> usize {
        1
    }

    fn fill(&self, r: T, out: &mut [T]) -> Result<()> {
        out[0] = self.at(r)?;
        Ok(())
    }

    fn abs_time(&self, r: T) -> T {
        self.tau_sigma + r
    }
}

pub const DEFAULT_TRUNCATION: usize = 10;

/// `ρ(f, g) = Σ_{n=1}^{N} 2^{−n} min(1, sup_{[−n, n]} |f − g|)`.
pub fn co_metric<T: Real>(f: &SymbolFunction<T>, g: &SymbolFunction<T>, n_trunc: usize) -> Result<T> {
    if f.dt != g.dt {
        return Err(Error::InvalidGrid(format!("symbol grids differ: {} vs {}", f.dt, g.dt)));
    }
    let w = T::from_usize_lossy(n_trunc);
    for s in [f, g] {
        if !s.covers(-w, w) {
            return Err(Error::Support {
                lo: -w.f64(),
                hi: w.f64(),
                t_min: s.t_min().f64(),
                t_max: s.t_max().f64(),
            });
        }
    }
    let diff = |k: i64| (f.node(k).unwrap() - g.node(k).unwrap()).abs();
    let mut sup = diff(0);
    let mut k = 0i64;
    let mut rho = T::zero();
    let mut weight = T::one();
    for n in 1..=n_trunc {
        let kn = f.node_span(T::from_usize_lossy(n));
        while k < kn {
            k += 1;
            sup = sup.max(diff(k)).max(diff(-k));
        }
        weight = weight / T::lit(2.0);
        rho = rho + weight * sup.min(T::one());
    }
    Ok(rho)
}
