use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;

use crate::cocycle::{Cocycle, MAX_DIM};
use crate::driver::BasePoint;
use crate::error::{Error, Result};
use crate::setvalued::{BoxSet, LimitConfig};
use crate::Real;

/// First state found outside `O_ε(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Escape<T> {
    pub s: T,
    pub seed: Vec<T>,
    pub t: T,
    pub dist: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow<T> {
    pub delta: T,
    pub seeds: usize,
    pub escape: Option<Escape<T>>,
}

impl<T> StabilityRow<T> {
    pub fn pass(&self) -> bool {
        self.escape.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    pub eps: T,
    pub rows: Vec<StabilityRow<T>>,
}

impl<T: Real> StabilityReport<T> {
    /// Largest passing `δ`.
    pub fn best(&self) -> Option<T> {
        self.rows.iter().filter(|r| r.pass()).map(|r| r.delta).reduce(T::max)
    }

    /// CSV `delta,pass,escape_s,escape_t`; escape columns are empty on a pass.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta,pass,escape_s,escape_t")?;
        for r in &self.rows {
            match &r.escape {
                None => writeln!(w, "{},true,,", r.delta)?,
                Some(e) => writeln!(w, "{},false,{},{}", r.delta, e.s, e.t)?,
            }
        }
        Ok(())
    }
}

/// Points within Chebyshev distance `δ` of the cell centers of `a`: the
/// centers themselves plus a lattice of spacing `max(h, δ/4)`.
pub fn delta_seeds<T: Real>(a: &BoxSet<T>, delta: T) -> Vec<T> {
    let d = a.dim();
    let h = a.grid().max_width();
    let sp = h.max(delta / T::lit(4.0));
    let mut keys: BTreeSet<[i64; MAX_DIM]> = BTreeSet::new();
    let mut out = Vec::new();
    for idx in a.cells() {
        let c = a.grid().center(idx);
        out.extend_from_slice(&c[..d]);
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        for i in 0..d {
            lo[i] = ((c[i] - delta) / sp).ceil().to_i64().unwrap_or(0);
            hi[i] = ((c[i] + delta) / sp).floor().to_i64().unwrap_or(-1);
        }
        let mut k = lo;
        if (0..d).any(|i| lo[i] > hi[i]) {
            continue;
        }
        'walk: loop {
            keys.insert(k);
            for i in 0..d {
                if k[i] < hi[i] {
                    k[i] += 1;
                    continue 'walk;
                }
                k[i] = lo[i];
            }
            break;
        }
    }
    for k in keys {
        for &ki in &k[..d] {
            out.push(T::lit(ki as f64) * sp);
        }
    }
    out
}

/// Distance from every grid cell center to the centers of `A`, so that most
/// membership tests in `O_ε(A)` avoid the scan over `A`.
struct NearTable<T> {
    dist: Vec<T>,
    /// Half the cell diagonal.
    slack: T,
}

impl<T: Real> NearTable<T> {
    fn new(a: &BoxSet<T>) -> Self {
        let g = a.grid();
        let d = g.dim();
        let centers = a.centers();
        let dist = (0..g.cells())
            .into_par_iter()
            .map(|i| {
                let c = g.center(i);
                centers
                    .iter()
                    .map(|q| (0..d).map(|k| (c[k] - q[k]).powi(2)).sum::<T>())
                    .fold(T::infinity(), T::min)
                    .sqrt()
            })
            .collect();
        Self { dist, slack: g.diameter() / T::lit(2.0) }
    }

    /// Whether `dist(y, A) ≤ eps`.
    fn within(&self, a: &BoxSet<T>, y: &[T], eps: T) -> Result<bool> {
        if let Some(i) = a.grid().index_of(y) {
            let c = self.dist[i];
            if c + self.slack <= eps {
                return Ok(true);
            }
            if c - self.slack > eps {
                return Ok(false);
            }
        }
        Ok(a.distance_to_point(y)? <= eps)
    }
}

/// For each `δ`, flows seeds of `O_δ(A)` from every `s ∈ S` over
/// `[0, t_tail]` and records the first state farther than `ε` from `A`.
pub fn stability_probe<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    a: &BoxSet<T>,
    eps: T,
    deltas: &[T],
    b: &BasePoint<T>,
    cfg: &LimitConfig<T>,
) -> Result<StabilityReport<T>> {
    if deltas.is_empty() {
        return Err(Error::Config("no δ candidates".into()));
    }
    if a.is_empty() {
        return Err(Error::EmptySet("stability probe around an empty set"));
    }
    if a.dim() != phi.dim() {
        return Err(Error::Dimension { expected: phi.dim(), got: a.dim() });
    }
    if deltas.iter().any(|&d| !(d > T::zero() && d < eps)) || deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("δ candidates must be sorted and inside (0, ε)".into()));
    }
    cfg.validate()?;
    let d = a.dim();
    let starts: Vec<(T, BasePoint<T>)> = cfg.shifts.iter().map(|&s| Ok((s, b.shift(s)?))).collect::<Result<_>>()?;
    let near = NearTable::new(a);
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let seeds = delta_seeds(a, delta);
        let escapes: Vec<Option<Escape<T>>> = starts
            .par_iter()
            .map(|(s, base)| {
                let segs = phi.trajectories(cfg.t_tail, base, &seeds)?;
                for (x, seg) in seeds.chunks(d).zip(segs) {
                    let seg = match seg {
                        Ok(seg) => seg,
                        Err(Error::Divergence { time, norm }) => {
                            return Ok(Some(Escape { s: *s, seed: x.to_vec(), t: T::lit(time), dist: T::lit(norm) }))
                        }
                        Err(e) => return Err(e),
                    };
                    for k in 0..seg.len() {
                        let y = seg.state(k);
                        if !near.within(a, y, eps)? {
                            let dist = a.distance_to_point(y)?;
                            return Ok(Some(Escape { s: *s, seed: x.to_vec(), t: seg.times[k], dist }));
                        }
                    }
                }
                Ok(None)
            })
            .collect::<Result<_>>()?;
        let escape = escapes.into_iter().flatten().next();
        rows.push(StabilityRow { delta, seeds: seeds.len() / d, escape });
    }
    Ok(StabilityReport { eps, rows })
}
