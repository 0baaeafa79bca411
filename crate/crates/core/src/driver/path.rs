//! Two-sided discretized Wiener paths and the canonical shift `θ_t`.

use std::io::{BufRead, Write};
use std::sync::{Arc, Mutex};

use super::noise;
use super::ou::{OuEvaluator, OuSeries};
use crate::error::{Error, Result};
use crate::Real;

struct PathData<T> {
    raw: Vec<T>,
    dt: T,
    seed: u64,
    ou_cache: Mutex<Vec<(u64, Arc<OuSeries<T>>)>>,
}

/// A sampled two-sided path `ω` on a uniform grid, re-based so that `ω(0) = 0`.
///
/// The samples are shared between a path and all of its shifts; a shift only
/// moves the node that plays the role of time zero, so `θ_t ∘ θ_s = θ_{t+s}`
/// holds exactly and shifting is O(1).
#[derive(Clone)]
pub struct SamplePath<T: Real> {
    data: Arc<PathData<T>>,
    origin: usize,
}

impl<T: Real> std::fmt::Debug for SamplePath<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SamplePath")
            .field("t_min", &self.t_min())
            .field("t_max", &self.t_max())
            .field("dt", &self.dt())
            .field("seed", &self.seed())
            .finish()
    }
}

fn grid_count<T: Real>(t: T, dt: T, what: &str) -> Result<i64> {
    T::grid_index(t, dt).ok_or_else(|| {
        Error::InvalidGrid(format!("dt = {} does not divide {what} = {}", dt, t))
    })
}

impl<T: Real> SamplePath<T> {
    /// Samples a two-sided Wiener path on `[t_min, t_max]` with step `dt`.
    ///
    /// Increment `k` (over `[k·dt, (k+1)·dt]`) is `sqrt(dt)·ξ(seed, k)`, so
    /// realizations on different windows agree wherever they overlap.
    pub fn wiener(seed: u64, t_min: T, t_max: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t_min < T::zero() && T::zero() < t_max) {
            return Err(Error::InvalidGrid(format!(
                "need t_min < 0 < t_max, got [{t_min}, {t_max}]"
            )));
        }
        let k_lo = grid_count(t_min, dt, "t_min")?;
        let k_hi = grid_count(t_max, dt, "t_max")?;
        let xi = noise::normals(seed, k_lo, k_hi);
        let sdt = dt.f64().sqrt();
        let origin = (-k_lo) as usize;
        let len = (k_hi - k_lo) as usize + 1;
        let mut w = vec![0.0f64; len];
        for i in origin..len - 1 {
            w[i + 1] = w[i] + sdt * xi[i];
        }
        for i in (0..origin).rev() {
            w[i] = w[i + 1] - sdt * xi[i];
        }
        let raw = w.into_iter().map(T::lit).collect();
        Ok(Self::from_parts(raw, origin, dt, seed))
    }

    fn from_parts(raw: Vec<T>, origin: usize, dt: T, seed: u64) -> Self {
        Self {
            data: Arc::new(PathData {
                raw,
                dt,
                seed,
                ou_cache: Mutex::new(Vec::new()),
            }),
            origin,
        }
    }

    /// Builds a path from explicit samples. The sample at time zero must be 0.
    pub fn from_values(t_min: T, dt: T, seed: u64, values: Vec<T>) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let k_lo = grid_count(t_min, dt, "t_min")?;
        if k_lo >= 0 || (-k_lo) as usize >= values.len().saturating_sub(1) {
            return Err(Error::InvalidGrid(
                "need t_min < 0 < t_max for a two-sided path".into(),
            ));
        }
        let origin = (-k_lo) as usize;
        if values[origin] != T::zero() {
            return Err(Error::InvalidGrid(format!(
                "path value at t = 0 must be 0, got {}",
                values[origin]
            )));
        }
        Ok(Self::from_parts(values, origin, dt, seed))
    }

    pub fn dt(&self) -> T {
        self.data.dt
    }

    pub fn seed(&self) -> u64 {
        self.data.seed
    }

    pub fn len(&self) -> usize {
        self.data.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.raw.is_empty()
    }

    /// Number of grid nodes strictly before time zero.
    pub fn nodes_before_zero(&self) -> usize {
        self.origin
    }

    pub fn t_min(&self) -> T {
        -T::from_usize_lossy(self.origin) * self.dt()
    }

    pub fn t_max(&self) -> T {
        T::from_usize_lossy(self.len() - 1 - self.origin) * self.dt()
    }

    /// Time of grid node `i` (0-based from `t_min`).
    pub fn time_of(&self, i: usize) -> T {
        (T::from_usize_lossy(i) - T::from_usize_lossy(self.origin)) * self.dt()
    }

    /// Re-based sample at grid node `i` (0-based from `t_min`).
    #[inline]
    pub fn node(&self, i: usize) -> T {
        let raw = &self.data.raw;
        raw[i] - raw[self.origin]
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Grid node index of the on-grid time `t`.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let k = T::grid_index(t, self.dt()).ok_or(Error::OffGrid {
            t: t.f64(),
            step: self.dt().f64(),
        })?;
        let i = self.origin as i64 + k;
        if i < 0 || i >= self.len() as i64 {
            return Err(self.support_error(t, t));
        }
        Ok(i as usize)
    }

    /// Piecewise-linear value at an arbitrary time inside the stored window.
    pub fn value_at(&self, t: T) -> Result<T> {
        let (i, frac) = self.locate(t)?;
        if frac == T::zero() {
            Ok(self.node(i))
        } else {
            Ok(self.node(i) + frac * (self.node(i + 1) - self.node(i)))
        }
    }

    /// Splits `t` into a node index and the fractional offset to the next node.
    pub(crate) fn locate(&self, t: T) -> Result<(usize, T)> {
        if t < self.t_min() || t > self.t_max() {
            return Err(self.support_error(t, t));
        }
        let pos = t / self.dt() + T::from_usize_lossy(self.origin);
        if let Some(k) = T::grid_index(t, self.dt()) {
            let i = (self.origin as i64 + k).clamp(0, self.len() as i64 - 1);
            return Ok((i as usize, T::zero()));
        }
        let i = pos.floor().to_usize().unwrap_or(0).min(self.len() - 2);
        Ok((i, pos - T::from_usize_lossy(i)))
    }

    /// Checks that `[lo, hi]` lies inside the stored window.
    pub fn require(&self, lo: T, hi: T) -> Result<()> {
        let slack = self.dt() * T::lit(1e-9);
        if lo < self.t_min() - slack || hi > self.t_max() + slack {
            Err(self.support_error(lo, hi))
        } else {
            Ok(())
        }
    }

    fn support_error(&self, lo: T, hi: T) -> Error {
        Error::Support {
            lo: lo.f64(),
            hi: hi.f64(),
            t_min: self.t_min().f64(),
            t_max: self.t_max().f64(),
        }
    }

    /// The shifted path `(θ_t ω)(s) = ω(s + t) − ω(t)`.
    ///
    /// `t` must be a grid multiple and the re-based window must still straddle
    /// zero, i.e. `t_min < t < t_max`.
    pub fn shift(&self, t: T) -> Result<Self> {
        let k = T::grid_index(t, self.dt()).ok_or(Error::OffGrid {
            t: t.f64(),
            step: self.dt().f64(),
        })?;
        let origin = self.origin as i64 + k;
        if origin <= 0 || origin >= self.len() as i64 - 1 {
            return Err(self.support_error(t, t));
        }
        Ok(Self {
            data: Arc::clone(&self.data),
            origin: origin as usize,
        })
    }

    /// Whether both paths are views of the same stored realization.
    pub fn shares_samples(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
    }

    /// Offset (in nodes) of this view's origin relative to `other`'s, when both
    /// share samples.
    pub fn origin_offset(&self, other: &Self) -> Option<i64> {
        self.shares_samples(other)
            .then(|| self.origin as i64 - other.origin as i64)
    }

    pub(crate) fn origin(&self) -> usize {
        self.origin
    }

    pub(crate) fn raw(&self) -> &[T] {
        &self.data.raw
    }

    /// OU series for this realization, computed once per evaluator and shared
    /// by every shifted view.
    pub fn ou_series(&self, ev: &OuEvaluator<T>) -> Result<Arc<OuSeries<T>>> {
        let key = ev.t_trunc().f64().to_bits();
        let mut cache = self.data.ou_cache.lock().expect("ou cache poisoned");
        if let Some((_, s)) = cache.iter().find(|(k, _)| *k == key) {
            return Ok(Arc::clone(s));
        }
        let series = Arc::new(OuSeries::build(ev, self)?);
        cache.push((key, Arc::clone(&series)));
        Ok(series)
    }

    /// Writes the dump: header `t_min t_max dt seed`, then one value per line.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {} {}", self.t_min(), self.t_max(), self.dt(), self.seed())?;
        for i in 0..self.len() {
            writeln!(w, "{}", self.node(i))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be `t_min t_max dt seed`".into(),
            });
        }
        let num = |s: &str| -> Result<T> {
            s.parse::<T>().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad number `{s}`"),
            })
        };
        let (t_min, t_max, dt) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        let seed: u64 = parts[3].parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad seed `{}`", parts[3]),
        })?;
        let mut values = Vec::new();
        for (n, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            values.push(line.parse::<T>().map_err(|_| Error::Parse {
                line: n + 1,
                msg: format!("bad value `{line}`"),
            })?);
        }
        let expected = grid_count(t_max - t_min, dt, "t_max - t_min")? as usize + 1;
        if values.len() != expected {
            return Err(Error::Parse {
                line: values.len() + 1,
                msg: format!("expected {expected} values, found {}", values.len()),
            });
        }
        Self::from_values(t_min, dt, seed, values)
    }
}
