use std::io::Write;

use rayon::prelude::*;

use super::symbol::{co_metric, SymbolFunction};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::Real;

/// A finite `ε`-net of the sampled translates `{ϑ_t β : t ∈ shift_grid}`.
#[derive(Debug, Clone)]
pub struct HullSample<T> {
    pub net: Vec<SymbolFunction<T>>,
    pub eps: T,
    pub n_trunc: usize,
    /// `max` over sampled translates of the distance to the nearest net element.
    pub radius: T,
    /// Whether the constant closure point was appended.
    pub has_closure: bool,
}

/// Options for [`hull_net`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullOptions<T> {
    pub n_trunc: usize,
    /// Add the constant limit `β₀*` when both window tails stay within this
    /// distance of one constant; `None` disables the check.
    pub closure_threshold: Option<T>,
    /// Length of each window tail inspected for the closure point.
    pub closure_tail: T,
}

impl<T: Real> Default for HullOptions<T> {
    fn default() -> Self {
        Self {
            n_trunc: super::symbol::DEFAULT_TRUNCATION,
            closure_threshold: None,
            closure_tail: T::lit(5.0),
        }
    }
}

fn translates<T: Real>(beta: &SymbolFunction<T>, shifts: &[T], n: usize) -> Result<Vec<SymbolFunction<T>>> {
    let w = T::from_usize_lossy(n);
    shifts
        .iter()
        .map(|&s| {
            let t = beta.translate(s)?;
            if !t.covers(-w, w) {
                return Err(Error::Support {
                    lo: (s - w).f64(),
                    hi: (s + w).f64(),
                    t_min: beta.t_min().f64(),
                    t_max: beta.t_max().f64(),
                });
            }
            Ok(t)
        })
        .collect()
}

/// Constant `c` with both window tails within `thr` of `c`, if any.
fn closure_constant<T: Real>(beta: &SymbolFunction<T>, tail: T, thr: T) -> Option<T> {
    let k_lo = (beta.t_min() / beta.dt()).round().to_i64()?;
    let k_hi = (beta.t_max() / beta.dt()).round().to_i64()?;
    let m = (tail / beta.dt()).round().to_i64()?;
    let vals: Vec<T> = (k_lo..=k_lo + m)
        .chain(k_hi - m..=k_hi)
        .filter_map(|k| beta.node(k))
        .collect();
    let lo = vals.iter().copied().fold(T::infinity(), T::min);
    let hi = vals.iter().copied().fold(T::neg_infinity(), T::max);
    (hi - lo <= thr + thr).then(|| (hi + lo) / T::lit(2.0))
}

/// Greedy farthest-point `ε`-net seeded with `β` itself (shift 0 must be on
/// the grid); ties go to the lowest shift index.
pub fn hull_net<T: Real>(
    beta: &SymbolFunction<T>,
    shift_grid: &[T],
    eps: T,
    opts: &HullOptions<T>,
) -> Result<HullSample<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let n = opts.n_trunc;
    let cands = translates(beta, shift_grid, n)?;
    let mut net = vec![beta.clone()];
    let mut near: Vec<T> = cands
        .par_iter()
        .map(|c| co_metric(c, beta, n))
        .collect::<Result<_>>()?;
    loop {
        let (mut best, mut far) = (usize::MAX, eps);
        for (i, &d) in near.iter().enumerate() {
            if d > far {
                far = d;
                best = i;
            }
        }
        if best == usize::MAX {
            break;
        }
        let pick = cands[best].clone();
        let upd: Vec<T> = cands
            .par_iter()
            .map(|c| co_metric(c, &pick, n))
            .collect::<Result<_>>()?;
        for (d, u) in near.iter_mut().zip(upd) {
            *d = d.min(u);
        }
        net.push(pick);
    }
    let mut has_closure = false;
    if let Some(thr) = opts.closure_threshold {
        if let Some(c) = closure_constant(beta, opts.closure_tail, thr) {
            let star = SymbolFunction::constant(c, beta);
            let gap = net
                .iter()
                .map(|e| co_metric(&star, e, n))
                .collect::<Result<Vec<T>>>()?
                .into_iter()
                .fold(T::infinity(), T::min);
            if gap > eps {
                net.push(star);
                has_closure = true;
            }
        }
    }
    let radius = near.iter().copied().fold(T::zero(), T::max);
    Ok(HullSample {
        net,
        eps,
        n_trunc: n,
        radius,
        has_closure,
    })
}

impl<T: Real> HullSample<T> {
    /// Largest distance from a sampled translate to the net.
    pub fn cover_radius(&self, beta: &SymbolFunction<T>, shift_grid: &[T]) -> Result<T> {
        let cands = translates(beta, shift_grid, self.n_trunc)?;
        cands
            .par_iter()
            .map(|c| {
                let mut best = T::infinity();
                for e in &self.net {
                    best = best.min(co_metric(c, e, self.n_trunc)?);
                }
                Ok(best)
            })
            .try_reduce(|| T::zero(), |a, b| Ok(a.max(b)))
    }

    /// Hausdorff distance between two nets in the metric `ρ`.
    pub fn net_distance(&self, other: &Self) -> Result<T> {
        let semi = |a: &Self, b: &Self| -> Result<T> {
            let mut worst = T::zero();
            for x in &a.net {
                let mut best = T::infinity();
                for y in &b.net {
                    best = best.min(co_metric(x, y, self.n_trunc)?);
                }
                worst = worst.max(best);
            }
            Ok(worst)
        };
        Ok(semi(self, other)?.max(semi(other, self)?))
    }

    /// Dump: `ε`, `N`, then each net element as a sample block.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.eps)?;
        writeln!(w, "{}", self.n_trunc)?;
        for s in &self.net {
            s.write_block(&mut w)?;
        }
        Ok(())
    }
}

/// Hölder exponent and constant on `[−M, M]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate<T> {
    pub alpha: T,
    pub ell: T,
    pub window: T,
    /// `sup |β|` over the window.
    pub sup_abs: T,
}

/// `sup_{t, t+δ ∈ [−M, M]} |σ(t + δ) − σ(t)|` at lag `k` nodes.
pub fn modulus<T: Real>(beta: &SymbolFunction<T>, m: T, lag: i64) -> T {
    let span = beta.node_span(m);
    let mut worst = T::zero();
    for k in -span..=span - lag {
        if let (Some(a), Some(b)) = (beta.node(k), beta.node(k + lag)) {
            worst = worst.max((b - a).abs());
        }
    }
    worst
}

/// Largest default lag, in grid nodes. Beyond a few hundredths of a time unit
/// mean reversion flattens the increments of an OU-driven symbol.
pub const DEFAULT_MAX_LAG: i64 = 64;

/// Dyadic lags of `2^j` nodes, at most `max_lag` nodes and `M/2` in time.
pub fn dyadic_lags<T: Real>(beta: &SymbolFunction<T>, m: T, max_lag: i64) -> Vec<i64> {
    let span = beta.node_span(m);
    let mut lags = Vec::new();
    let mut lag = 1i64;
    while 4 * lag <= 2 * span && lag <= max_lag {
        lags.push(lag);
        lag *= 2;
    }
    lags
}

/// [`holder_diagnostic_with`] using lags up to [`DEFAULT_MAX_LAG`] nodes.
pub fn holder_diagnostic<T: Real>(beta: &SymbolFunction<T>, m: T) -> Result<HolderEstimate<T>> {
    holder_diagnostic_with(beta, m, DEFAULT_MAX_LAG)
}

/// `α` from the log–log regression of the dyadic moduli against the lags and
/// `ℓ = max_j ω(δ_j)/δ_j^α`.
pub fn holder_diagnostic_with<T: Real>(beta: &SymbolFunction<T>, m: T, max_lag: i64) -> Result<HolderEstimate<T>> {
    if !beta.covers(-m, m) || !(m > T::zero()) {
        return Err(Error::Support {
            lo: -m.f64(),
            hi: m.f64(),
            t_min: beta.t_min().f64(),
            t_max: beta.t_max().f64(),
        });
    }
    let span = beta.node_span(m);
    let sup_abs = (-span..=span)
        .filter_map(|k| beta.node(k))
        .fold(T::zero(), |a, v| a.max(v.abs()));
    let lags = dyadic_lags(beta, m, max_lag);
    if lags.len() < 2 {
        return Err(Error::Domain("window too short for a dyadic regression".into()));
    }
    let dt = beta.dt().f64();
    let moduli: Vec<f64> = lags.iter().map(|&l| modulus(beta, m, l).f64()).collect();
    if moduli.iter().all(|&w| w == 0.0) {
        return Ok(HolderEstimate {
            alpha: T::one(),
            ell: T::zero(),
            window: m,
            sup_abs,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = lags
        .iter()
        .zip(&moduli)
        .filter(|(_, w)| **w > 0.0)
        .map(|(&l, &w)| ((l as f64 * dt).ln(), w.ln()))
        .unzip();
    let alpha = linear_fit(&x, &y)
        .map(|(s, _)| s)
        .unwrap_or(1.0)
        .clamp(f64::EPSILON, 1.0);
    let ell = lags
        .iter()
        .zip(&moduli)
        .map(|(&l, &w)| w / (l as f64 * dt).powf(alpha))
        .fold(0.0, f64::max);
    Ok(HolderEstimate {
        alpha: T::lit(alpha),
        ell: T::lit(ell),
        window: m,
        sup_abs,
    })
}
