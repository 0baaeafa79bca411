use std::io::{BufRead, Write};

use bitvec::prelude::*;
use rayon::prelude::*;

use crate::cocycle::MAX_DIM;
use crate::error::{Error, Result};
use crate::Real;

/// A uniform grid of `n^d` cells over the box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    n: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, n: usize) -> Result<Self> {
        let d = lo.len();
        if d == 0 || d > MAX_DIM || hi.len() != d {
            return Err(Error::InvalidGrid(format!(
                "bounding box needs 1..={MAX_DIM} matching axes, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidGrid("need at least one cell per axis".into()));
        }
        if n.checked_pow(d as u32).is_none_or(|c| c > 1 << 28) {
            return Err(Error::InvalidGrid(format!("{n}^{d} cells is too many")));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidGrid(format!("need lo < hi, got [{a}, {b}]")));
            }
        }
        Ok(Self { lo, hi, n })
    }

    /// Same box and resolution on every axis.
    pub fn cube(d: usize, lo: T, hi: T, n: usize) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d], n)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn cells(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    pub fn width(&self, axis: usize) -> T {
        (self.hi[axis] - self.lo[axis]) / T::from_usize_lossy(self.n)
    }

    /// Euclidean diameter of one cell.
    pub fn diameter(&self) -> T {
        (0..self.dim()).map(|i| self.width(i).powi(2)).sum::<T>().sqrt()
    }

    /// Largest cell side.
    pub fn max_width(&self) -> T {
        (0..self.dim()).map(|i| self.width(i)).fold(T::zero(), T::max)
    }

    /// Per-axis cell coordinates of `x`, or `None` outside the closed box.
    pub fn coords_of(&self, x: &[T]) -> Option<[usize; MAX_DIM]> {
        let mut c = [0usize; MAX_DIM];
        for i in 0..self.dim() {
            if !(x[i] >= self.lo[i] && x[i] <= self.hi[i]) {
                return None;
            }
            let k = ((x[i] - self.lo[i]) / self.width(i)).floor().to_usize().unwrap_or(0);
            c[i] = k.min(self.n - 1);
        }
        Some(c)
    }

    pub fn index_of(&self, x: &[T]) -> Option<usize> {
        self.coords_of(x).map(|c| self.flat(&c))
    }

    #[inline]
    pub fn flat(&self, c: &[usize]) -> usize {
        let mut idx = 0;
        for i in (0..self.dim()).rev() {
            idx = idx * self.n + c[i];
        }
        idx
    }

    #[inline]
    pub fn unflat(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut c = [0usize; MAX_DIM];
        for ci in c.iter_mut().take(self.dim()) {
            *ci = idx % self.n;
            idx /= self.n;
        }
        c
    }

    /// Center of cell `idx`.
    pub fn center(&self, idx: usize) -> [T; MAX_DIM] {
        self.point_in(idx, &[T::lit(0.5); MAX_DIM])
    }

    /// Point of cell `idx` at relative offsets `frac ∈ [0, 1]^d`.
    pub fn point_in(&self, idx: usize, frac: &[T]) -> [T; MAX_DIM] {
        let c = self.unflat(idx);
        let mut x = [T::zero(); MAX_DIM];
        for i in 0..self.dim() {
            x[i] = self.lo[i] + (T::from_usize_lossy(c[i]) + frac[i]) * self.width(i);
        }
        x
    }

    pub fn contains_point(&self, x: &[T]) -> bool {
        (0..self.dim()).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }
}

/// A finite union of grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet<T> {
    grid: Grid<T>,
    bits: BitVec,
}

impl<T: Real> BoxSet<T> {
    pub fn empty(grid: Grid<T>) -> Self {
        let bits = bitvec![0; grid.cells()];
        Self { grid, bits }
    }

    pub fn full(grid: Grid<T>) -> Self {
        let bits = bitvec![1; grid.cells()];
        Self { grid, bits }
    }

    /// Cells meeting the closed axis-aligned box `[a, b]` (clipped to the grid).
    pub fn covering_box(grid: Grid<T>, a: &[T], b: &[T]) -> Result<Self> {
        let d = grid.dim();
        if a.len() != d || b.len() != d {
            return Err(Error::Dimension { expected: d, got: a.len().min(b.len()) });
        }
        let mut set = Self::empty(grid);
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for i in 0..d {
            let g = &set.grid;
            if b[i] < g.lo[i] || a[i] > g.hi[i] || a[i] > b[i] {
                return Ok(set);
            }
            let w = g.width(i);
            let cell = |x: T| ((x.max(g.lo[i]).min(g.hi[i]) - g.lo[i]) / w).floor().to_usize().unwrap_or(0).min(g.n - 1);
            lo[i] = cell(a[i]);
            hi[i] = cell(b[i]);
        }
        let mut c = lo;
        loop {
            let idx = set.grid.flat(&c);
            set.bits.set(idx, true);
            let mut axis = 0;
            loop {
                if axis == d {
                    return Ok(set);
                }
                if c[axis] < hi[axis] {
                    c[axis] += 1;
                    break;
                }
                c[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    /// Cells containing the given points; points outside the box are ignored.
    pub fn from_points<'a>(grid: Grid<T>, points: impl IntoIterator<Item = &'a [T]>) -> Self {
        let mut set = Self::empty(grid);
        for p in points {
            set.insert_point(p);
        }
        set
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn diameter(&self) -> T {
        self.grid.diameter()
    }

    /// Marks the cell containing `x`; returns whether `x` lies in the box.
    pub fn insert_point(&mut self, x: &[T]) -> bool {
        match self.grid.index_of(x) {
            Some(i) => {
                self.bits.set(i, true);
                true
            }
            None => false,
        }
    }

    pub fn insert_cell(&mut self, idx: usize) {
        self.bits.set(idx, true);
    }

    pub fn contains_cell(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    /// Whether `x` lies in an occupied cell.
    pub fn contains_point(&self, x: &[T]) -> bool {
        self.grid.index_of(x).is_some_and(|i| self.bits[i])
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn centers(&self) -> Vec<[T; MAX_DIM]> {
        self.cells().map(|i| self.grid.center(i)).collect()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("box sets live on different grids".into()));
        }
        Ok(())
    }

    pub fn union_with(&mut self, other: &Self) -> Result<()> {
        self.same_grid(other)?;
        self.bits |= &other.bits;
        Ok(())
    }

    pub fn union(mut self, other: &Self) -> Result<Self> {
        self.union_with(other)?;
        Ok(self)
    }

    pub fn intersection(mut self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        self.bits &= &other.bits;
        Ok(self)
    }

    /// Cellwise inclusion.
    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.same_grid(other)?;
        Ok(self.cells().all(|i| other.bits[i]))
    }

    /// Adds every cell within Chebyshev distance `k` (in cells) of an occupied one.
    pub fn dilate(&self, k: usize) -> Self {
        let d = self.dim();
        let n = self.grid.n as i64;
        let k = k as i64;
        let mut out = self.clone();
        for idx in self.cells() {
            let c = self.grid.unflat(idx);
            let mut off = [-k; MAX_DIM];
            'walk: loop {
                let mut nc = [0usize; MAX_DIM];
                let mut inside = true;
                for i in 0..d {
                    let v = c[i] as i64 + off[i];
                    if v < 0 || v >= n {
                        inside = false;
                        break;
                    }
                    nc[i] = v as usize;
                }
                if inside {
                    out.bits.set(self.grid.flat(&nc), true);
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        break 'walk;
                    }
                    if off[axis] < k {
                        off[axis] += 1;
                        break;
                    }
                    off[axis] = -k;
                    axis += 1;
                }
            }
        }
        out
    }

    /// `min` Euclidean distance from `x` to the occupied cell centers.
    pub fn distance_to_point(&self, x: &[T]) -> Result<T> {
        if self.is_empty() {
            return Err(Error::EmptySet("distance to an empty box set"));
        }
        let d = self.dim();
        let mut best = T::infinity();
        for idx in self.cells() {
            let c = self.grid.center(idx);
            let mut s = T::zero();
            for i in 0..d {
                s = s + (x[i] - c[i]).powi(2);
            }
            best = best.min(s);
        }
        Ok(best.sqrt())
    }

    /// BoxSet dump: header `d n lo_1 hi_1 …`, then one index tuple per line.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = format!("{} {}", self.dim(), self.grid.n);
        for i in 0..self.dim() {
            header.push_str(&format!(" {} {}", self.grid.lo[i], self.grid.hi[i]));
        }
        writeln!(w, "{header}")?;
        for idx in self.cells() {
            let c = self.grid.unflat(idx);
            let row: Vec<String> = c[..self.dim()].iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header".into() })??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
        if parts.len() < 2 {
            return Err(bad("header must be `d n lo_1 hi_1 ...`"));
        }
        let d: usize = parts[0].parse().map_err(|_| bad("bad dimension"))?;
        let n: usize = parts[1].parse().map_err(|_| bad("bad cell count"))?;
        if parts.len() != 2 + 2 * d {
            return Err(bad("header must list lo and hi for every axis"));
        }
        let num = |s: &str| s.parse::<T>().map_err(|_| bad("bad bound"));
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        for i in 0..d {
            lo.push(num(parts[2 + 2 * i])?);
            hi.push(num(parts[3 + 2 * i])?);
        }
        let mut set = Self::empty(Grid::new(lo, hi, n)?);
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let err = || Error::Parse { line: k + 2, msg: format!("bad cell `{line}`") };
            let c: Vec<usize> = line
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| err()))
                .collect::<Result<_>>()?;
            if c.len() != d || c.iter().any(|&v| v >= n) {
                return Err(err());
            }
            let idx = set.grid.flat(&c);
            set.bits.set(idx, true);
        }
        Ok(set)
    }
}

/// `sup_{a ∈ A} min_{b ∈ B} |a − b|` over occupied cell centers.
pub fn hausdorff_semidist<T: Real>(a: &BoxSet<T>, b: &BoxSet<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), got: b.dim() });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("Hausdorff semi-distance of an empty set"));
    }
    let d = a.dim();
    let bc = b.centers();
    let cells: Vec<usize> = a.cells().filter(|&i| !(a.grid == b.grid && b.bits[i])).collect();
    let worst = cells
        .par_iter()
        .map(|&i| {
            let x = a.grid.center(i);
            let mut best = T::infinity();
            for c in &bc {
                let mut s = T::zero();
                for k in 0..d {
                    s = s + (x[k] - c[k]).powi(2);
                }
                best = best.min(s);
            }
            best
        })
        .reduce(|| T::zero(), T::max);
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance.
pub fn hausdorff_dist<T: Real>(a: &BoxSet<T>, b: &BoxSet<T>) -> Result<T> {
    Ok(hausdorff_semidist(a, b)?.max(hausdorff_semidist(b, a)?))
}

/// `sup_{x ∈ points} dist(x, B)`.
pub fn points_semidist<T: Real>(points: &[T], dim: usize, b: &BoxSet<T>) -> Result<T> {
    if b.is_empty() {
        return Err(Error::EmptySet("distance to an empty box set"));
    }
    if points.is_empty() {
        return Err(Error::EmptySet("distance from an empty point set"));
    }
    points
        .par_chunks(dim)
        .map(|x| b.distance_to_point(x))
        .try_reduce(|| T::zero(), |u, v| Ok(u.max(v)))
}
