use std::io::Write;

use rayon::prelude::*;

use super::boxset::{hausdorff_semidist, points_semidist, BoxSet, Grid};
use crate::cocycle::{Cocycle, MAX_DIM};
use crate::driver::BasePoint;
use crate::error::{Error, Result};
use crate::Real;

/// Discretization of the double limit in the omega-limit constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig<T> {
    /// Initial-time shifts `S`.
    pub shifts: Vec<T>,
    pub t_burn: T,
    pub t_tail: T,
    /// Time between two rasterizations of the propagated set.
    pub stride: T,
    /// Lattice points per axis used for parts of `B` outside the grid box.
    pub seed_density: usize,
    /// Sample points per axis drawn from each occupied cell.
    pub points_per_cell: usize,
}

impl<T: Real> Default for LimitConfig<T> {
    fn default() -> Self {
        Self {
            shifts: symmetric_shifts(T::lit(20.0), 41),
            t_burn: T::lit(40.0),
            t_tail: T::lit(60.0),
            stride: T::one(),
            seed_density: 32,
            points_per_cell: 3,
        }
    }
}

/// `count` evenly spaced shifts on `[−s_max, s_max]`.
pub fn symmetric_shifts<T: Real>(s_max: T, count: usize) -> Vec<T> {
    if count <= 1 {
        return vec![T::zero()];
    }
    let m = T::from_usize_lossy(count - 1);
    (0..count)
        .map(|i| {
            let s = -s_max + T::lit(2.0) * s_max * T::from_usize_lossy(i) / m;
            if 2 * i + 1 == count {
                T::zero()
            } else {
                s
            }
        })
        .collect()
}

impl<T: Real> LimitConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.shifts.is_empty() {
            return Err(Error::Config("shift grid S is empty".into()));
        }
        let scale = self.shifts.iter().fold(T::one(), |m, s| m.max(s.abs()));
        let tol = T::epsilon() * T::lit(64.0) * scale;
        for s in &self.shifts {
            if !self.shifts.iter().any(|r| (*r + *s).abs() <= tol) {
                return Err(Error::Config(format!("shift grid is not symmetric: {s} has no mirror")));
            }
        }
        if !(self.stride > T::zero()) {
            return Err(Error::Config("stride must be positive".into()));
        }
        if !(T::zero() <= self.t_burn && self.t_burn < self.t_tail) {
            return Err(Error::Config(format!(
                "need 0 ≤ t_burn < t_tail, got {} and {}",
                self.t_burn, self.t_tail
            )));
        }
        for (name, t) in [("t_burn", self.t_burn), ("t_tail", self.t_tail)] {
            if T::grid_index(t, self.stride).is_none() {
                return Err(Error::Config(format!("{name} is not a multiple of the stride")));
            }
        }
        if self.seed_density < 2 || self.points_per_cell == 0 {
            return Err(Error::Config("sampling densities must be ≥ 2 and ≥ 1".into()));
        }
        Ok(())
    }

    fn strides(&self, t: T) -> usize {
        T::grid_index(t, self.stride).unwrap_or(0) as usize
    }
}

/// An omega-limit estimate with its tail-monotonicity report.
#[derive(Debug, Clone)]
pub struct LimitEstimate<T> {
    /// States rasterized over `[t_burn, t_tail]`.
    pub set: BoxSet<T>,
    /// States rasterized over `[2·t_burn, t_tail + t_burn]`.
    pub late: BoxSet<T>,
    /// Whether `late` sits inside `set` dilated by one cell.
    pub nested: bool,
    /// `dist(set, late)`: how much the tail still shrinks.
    pub shrink: T,
}

impl<T: Real> LimitEstimate<T> {
    fn from_tails(set: BoxSet<T>, late: BoxSet<T>) -> Result<Self> {
        if set.is_empty() || late.is_empty() {
            return Err(Error::EmptySet("omega-limit tail"));
        }
        let nested = late.is_subset(&set.dilate(1))?;
        let shrink = hausdorff_semidist(&set, &late)?;
        Ok(Self { set, late, nested, shrink })
    }

    fn merge(mut self, other: &Self) -> Result<Self> {
        self.set.union_with(&other.set)?;
        self.late.union_with(&other.late)?;
        Self::from_tails(self.set, self.late)
    }
}

fn lattice_offsets<T: Real>(k: usize, d: usize) -> Vec<[T; MAX_DIM]> {
    let mut out = Vec::with_capacity(k.pow(d as u32));
    let total = k.pow(d as u32);
    for mut m in 0..total {
        let mut f = [T::lit(0.5); MAX_DIM];
        for fi in f.iter_mut().take(d) {
            *fi = (T::from_usize_lossy(m % k) + T::lit(0.5)) / T::from_usize_lossy(k);
            m /= k;
        }
        out.push(f);
    }
    out
}

/// Evenly spaced lattice including the corners of `b0`'s bounding box,
/// restricted to occupied cells of `b0`.
fn b0_lattice<T: Real>(b0: &BoxSet<T>, density: usize) -> Vec<T> {
    let g = b0.grid();
    let d = g.dim();
    let mut pts = Vec::new();
    let total = density.pow(d as u32);
    let m = T::from_usize_lossy(density - 1);
    for mut idx in 0..total {
        let mut x = [T::zero(); MAX_DIM];
        for i in 0..d {
            let k = T::from_usize_lossy(idx % density);
            x[i] = g.lo()[i] + (g.hi()[i] - g.lo()[i]) * k / m;
            idx /= density;
        }
        if b0.contains_point(&x[..d]) {
            pts.extend_from_slice(&x[..d]);
        }
    }
    pts
}

/// The propagated collection: occupied output cells (resampled every stride)
/// plus explicit points that currently lie outside the output box.
struct Cloud<'g, T: Real> {
    grid: &'g Grid<T>,
    offsets: Vec<[T; MAX_DIM]>,
    cells: BoxSet<T>,
    outside: Vec<T>,
}

impl<'g, T: Real> Cloud<'g, T> {
    fn seed(grid: &'g Grid<T>, b0: &BoxSet<T>, cfg: &LimitConfig<T>) -> Self {
        let d = grid.dim();
        let mut cells = BoxSet::empty(grid.clone());
        for idx in 0..grid.cells() {
            if b0.contains_point(&grid.center(idx)[..d]) {
                cells.insert_cell(idx);
            }
        }
        let outside = b0_lattice(b0, cfg.seed_density)
            .chunks(d)
            .filter(|x| !grid.contains_point(x))
            .flatten()
            .copied()
            .collect();
        Self {
            grid,
            offsets: lattice_offsets(cfg.points_per_cell, d),
            cells,
            outside,
        }
    }

    fn points(&self) -> Vec<T> {
        let d = self.grid.dim();
        let mut pts = Vec::with_capacity(self.cells.count() * self.offsets.len() * d + self.outside.len());
        for idx in self.cells.cells() {
            for f in &self.offsets {
                pts.extend_from_slice(&self.grid.point_in(idx, f)[..d]);
            }
        }
        pts.extend_from_slice(&self.outside);
        pts
    }

    fn absorb(&mut self, pts: &[T]) {
        let d = self.grid.dim();
        self.cells = BoxSet::empty(self.grid.clone());
        self.outside.clear();
        for x in pts.chunks(d) {
            if !self.cells.insert_point(x) {
                self.outside.extend_from_slice(x);
            }
        }
    }
}

fn map_points<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    t: T,
    b: &BasePoint<T>,
    pts: &mut [T],
    shift: T,
    elapsed: T,
) -> Result<()> {
    let d = phi.dim();
    phi.apply_batch(t, b, pts).map_err(|(i, e)| match e {
        Error::Divergence { time, .. } => Error::DivergenceAt {
            shift: shift.f64(),
            point: pts[i * d..(i + 1) * d].iter().map(|x| x.f64()).collect(),
            time: (elapsed + T::lit(time)).f64(),
        },
        other => other,
    })
}

/// Tails of the propagated set from one base point.
fn tails_from<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    grid: &Grid<T>,
    base: &BasePoint<T>,
    label: T,
    cfg: &LimitConfig<T>,
) -> Result<(BoxSet<T>, BoxSet<T>)> {
    let mut cloud = Cloud::seed(grid, b0, cfg);
    let k_burn = cfg.strides(cfg.t_burn);
    let k_tail = cfg.strides(cfg.t_tail);
    let mut tail = BoxSet::empty(grid.clone());
    let mut late = BoxSet::empty(grid.clone());
    for k in 1..=k_tail + k_burn {
        let elapsed = T::from_usize_lossy(k - 1) * cfg.stride;
        let b = base.shift(elapsed)?;
        let mut pts = cloud.points();
        map_points(phi, cfg.stride, &b, &mut pts, label, elapsed)?;
        cloud.absorb(&pts);
        let in_tail = k >= k_burn && k <= k_tail;
        let in_late = k >= 2 * k_burn && k <= k_tail + k_burn;
        if (in_tail || in_late) && !cloud.outside.is_empty() {
            return Err(Error::Domain(format!(
                "states from shift {label} leave the grid box at t = {}",
                T::from_usize_lossy(k) * cfg.stride
            )));
        }
        if in_tail {
            tail.union_with(&cloud.cells)?;
        }
        if in_late {
            late.union_with(&cloud.cells)?;
        }
    }
    Ok((tail, late))
}

/// Union of the tails over a list of `(label, base point)` starts.
fn limit_over<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    grid: &Grid<T>,
    starts: Vec<(T, BasePoint<T>)>,
    cfg: &LimitConfig<T>,
) -> Result<LimitEstimate<T>> {
    cfg.validate()?;
    if b0.dim() != phi.dim() || grid.dim() != phi.dim() {
        return Err(Error::Dimension { expected: phi.dim(), got: b0.dim() });
    }
    if b0.is_empty() {
        return Err(Error::EmptySet("initial set B"));
    }
    let parts: Vec<Result<(BoxSet<T>, BoxSet<T>)>> = starts
        .par_iter()
        .map(|(label, b)| tails_from(phi, b0, grid, b, *label, cfg))
        .collect();
    let mut tail = BoxSet::empty(grid.clone());
    let mut late = BoxSet::empty(grid.clone());
    for part in parts {
        let (t, l) = part?;
        tail.union_with(&t)?;
        late.union_with(&l)?;
    }
    LimitEstimate::from_tails(tail, late)
}

fn shifted_starts<T: Real>(b: &BasePoint<T>, shifts: &[T]) -> Result<Vec<(T, BasePoint<T>)>> {
    shifts.iter().map(|&s| Ok((s, b.shift(s)?))).collect()
}

/// `L_U(B, τ, ω)`: states of `φ(t, Θ_s(τ, ω))B` for `s ∈ S`, `t` in the tail
/// window, rasterized on `grid`.
pub fn uniform_omega_limit<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    grid: &Grid<T>,
    b: &BasePoint<T>,
    cfg: &LimitConfig<T>,
) -> Result<LimitEstimate<T>> {
    limit_over(phi, b0, grid, shifted_starts(b, &cfg.shifts)?, cfg)
}

/// `L⁺(B, τ, ω)`: the same construction from `s = 0` only.
pub fn forward_omega_limit<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    grid: &Grid<T>,
    b: &BasePoint<T>,
    cfg: &LimitConfig<T>,
) -> Result<LimitEstimate<T>> {
    limit_over(phi, b0, grid, vec![(T::zero(), b.clone())], cfg)
}

/// Cellwise union of `L_U(B)` over a library of bounded sets.
pub fn estimate_mjua<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    library: &[BoxSet<T>],
    grid: &Grid<T>,
    b: &BasePoint<T>,
    cfg: &LimitConfig<T>,
) -> Result<LimitEstimate<T>> {
    let (first, rest) = library
        .split_first()
        .ok_or(Error::EmptySet("bounded-set library"))?;
    let mut est = uniform_omega_limit(phi, first, grid, b, cfg)?;
    for b0 in rest {
        est = est.merge(&uniform_omega_limit(phi, b0, grid, b, cfg)?)?;
    }
    Ok(est)
}

/// `L_{ℝ×Ω}(B)`: forward limits from every `(τ_j + s, ω_j)` over the sampled
/// driver states `ω_j` and the initial times `s ∈ S`.
pub fn global_uniform_omega_limit<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    grid: &Grid<T>,
    samples: &[BasePoint<T>],
    cfg: &LimitConfig<T>,
) -> Result<LimitEstimate<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySet("driver samples"));
    }
    let starts = samples
        .iter()
        .flat_map(|b| {
            cfg.shifts
                .iter()
                .map(move |&s| (s, BasePoint::new(b.tau + s, b.driver.clone())))
        })
        .collect();
    limit_over(phi, b0, grid, starts, cfg)
}

/// One row of an attraction-rate table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow<T> {
    pub t: T,
    pub dist: T,
}

/// `sup_{s ∈ S} dist(φ(t, Θ_s b) B, A)` at `t = 0` and `t = stride·2^k ≤ t_tail`,
/// with `B` represented by its cell centers.
pub fn attraction_rate<T: Real, C: Cocycle<T> + ?Sized>(
    phi: &C,
    b0: &BoxSet<T>,
    a: &BoxSet<T>,
    b: &BasePoint<T>,
    cfg: &LimitConfig<T>,
) -> Result<Vec<RateRow<T>>> {
    cfg.validate()?;
    let d = phi.dim();
    let seeds: Vec<T> = b0.centers().iter().flat_map(|c| c[..d].to_vec()).collect();
    if seeds.is_empty() {
        return Err(Error::EmptySet("initial set B"));
    }
    let mut times = vec![T::zero()];
    let mut t = cfg.stride;
    while t <= cfg.t_tail {
        times.push(t);
        t = t + t;
    }
    let per_shift: Vec<Result<Vec<T>>> = cfg
        .shifts
        .par_iter()
        .map(|&s| {
            let start = b.shift(s)?;
            let mut pts = seeds.clone();
            let mut out = vec![points_semidist(&pts, d, a)?];
            for w in times.windows(2) {
                let b_now = start.shift(w[0])?;
                map_points(phi, w[1] - w[0], &b_now, &mut pts, s, w[0])?;
                out.push(points_semidist(&pts, d, a)?);
            }
            Ok(out)
        })
        .collect();
    let mut sup = vec![T::zero(); times.len()];
    for row in per_shift {
        for (m, v) in sup.iter_mut().zip(row?) {
            *m = m.max(v);
        }
    }
    Ok(times
        .into_iter()
        .zip(sup)
        .map(|(t, dist)| RateRow { t, dist })
        .collect())
}

pub fn write_rate_csv<T: Real, W: Write>(rows: &[RateRow<T>], mut w: W) -> Result<()> {
    writeln!(w, "t,dist")?;
    for r in rows {
        writeln!(w, "{},{}", r.t, r.dist)?;
    }
    Ok(())
}
