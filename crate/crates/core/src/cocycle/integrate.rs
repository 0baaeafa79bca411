use std::io::Write;

use super::field::{ChannelSource, FieldSpec, MAX_DIM};
use crate::error::{Error, Result};
use crate::Real;

pub const DEFAULT_BLOWUP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    EulerHeun,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "euler_heun" => Ok(Scheme::EulerHeun),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Rk4 => "rk4",
            Scheme::EulerHeun => "euler_heun",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub scheme: Scheme,
    pub step: T,
    pub blowup: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn rk4(step: T) -> Self {
        Self {
            scheme: Scheme::Rk4,
            step,
            blowup: T::lit(DEFAULT_BLOWUP),
        }
    }

    pub fn euler_heun(step: T) -> Self {
        Self {
            scheme: Scheme::EulerHeun,
            ..Self::rk4(step)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.blowup > T::zero()) {
            return Err(Error::Config("blow-up guard must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps covering the duration `t` exactly.
    pub fn steps(&self, t: T) -> Result<usize> {
        self.validate()?;
        if t < T::zero() {
            return Err(Error::Domain(format!("negative duration {t}")));
        }
        let n = T::grid_index(t, self.step).ok_or(Error::OffGrid {
            t: t.f64(),
            step: self.step.f64(),
        })?;
        Ok(n as usize)
    }
}

/// States at the nodes `r_k = k·Δt` of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySegment<T> {
    pub dim: usize,
    pub times: Vec<T>,
    states: Vec<T>,
}

impl<T: Real> TrajectorySegment<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, t: T, u: &[T]) {
        debug_assert_eq!(u.len(), self.dim);
        self.times.push(t);
        self.states.extend_from_slice(u);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[T] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[T] {
        self.state(self.len() - 1)
    }

    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.states.chunks(self.dim)
    }

    /// CSV with columns `t, u_1[, u_2, u_3]`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let cols: Vec<String> = (1..=self.dim).map(|i| format!("u_{i}")).collect();
        writeln!(w, "t,{}", cols.join(","))?;
        for (t, u) in self.times.iter().zip(self.states()) {
            let row: Vec<String> = u.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{t},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Channel values at the stage times `r_j = j·Δt/2` of an RK4 run (or at
/// `j·Δt` when `half = false`), plus the matching absolute times.
pub struct ChannelTable<T> {
    pub width: usize,
    pub values: Vec<T>,
    pub times: Vec<T>,
}

impl<T: Real> ChannelTable<T> {
    pub fn build(src: &dyn ChannelSource<T>, step: T, steps: usize, half: bool) -> Result<Self> {
        let width = src.len();
        let (nodes, h) = if half {
            (2 * steps + 1, step / T::lit(2.0))
        } else {
            (steps + 1, step)
        };
        let mut values = vec![T::zero(); nodes * width];
        let mut times = Vec::with_capacity(nodes);
        for j in 0..nodes {
            let r = T::from_usize_lossy(j) * h;
            if width > 0 {
                src.fill(r, &mut values[j * width..(j + 1) * width])?;
            }
            times.push(src.abs_time(r));
        }
        Ok(Self { width, values, times })
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[T] {
        &self.values[j * self.width..(j + 1) * self.width]
    }
}

#[inline]
pub(crate) fn norm<T: Real>(u: &[T]) -> T {
    u.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn guard<T: Real>(u: &[T], r: T, blowup: T) -> Result<()> {
    let n = norm(u);
    if !n.is_finite() || n > blowup {
        return Err(Error::Divergence {
            time: r.f64(),
            norm: n.f64(),
        });
    }
    Ok(())
}

/// One classical RK4 step using stage channel rows `2k, 2k+1, 2k+2`.
#[inline]
pub(crate) fn rk4_step<T: Real>(field: &FieldSpec<T>, table: &ChannelTable<T>, k: usize, h: T, u: &mut [T]) {
    let d = u.len();
    let mut k1 = [T::zero(); MAX_DIM];
    let mut k2 = [T::zero(); MAX_DIM];
    let mut k3 = [T::zero(); MAX_DIM];
    let mut k4 = [T::zero(); MAX_DIM];
    let mut tmp = [T::zero(); MAX_DIM];
    let half = h / T::lit(2.0);
    let (j0, j1, j2) = (2 * k, 2 * k + 1, 2 * k + 2);
    field.eval(table.times[j0], table.row(j0), u, &mut k1[..d]);
    for i in 0..d {
        tmp[i] = u[i] + half * k1[i];
    }
    field.eval(table.times[j1], table.row(j1), &tmp[..d], &mut k2[..d]);
    for i in 0..d {
        tmp[i] = u[i] + half * k2[i];
    }
    field.eval(table.times[j1], table.row(j1), &tmp[..d], &mut k3[..d]);
    for i in 0..d {
        tmp[i] = u[i] + h * k3[i];
    }
    field.eval(table.times[j2], table.row(j2), &tmp[..d], &mut k4[..d]);
    let sixth = h / T::lit(6.0);
    for i in 0..d {
        u[i] = u[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
}

/// Integrates `u̇ = f(Θ_r b, u)` over `[0, steps·h]` in place, with a
/// prebuilt channel table.
pub(crate) fn rk4_run<T: Real>(
    field: &FieldSpec<T>,
    table: &ChannelTable<T>,
    steps: usize,
    h: T,
    blowup: T,
    u: &mut [T],
    mut record: Option<&mut TrajectorySegment<T>>,
) -> Result<()> {
    guard(u, T::zero(), blowup)?;
    if let Some(seg) = record.as_deref_mut() {
        seg.push(T::zero(), u);
    }
    for k in 0..steps {
        rk4_step(field, table, k, h, u);
        let r = T::from_usize_lossy(k + 1) * h;
        guard(u, r, blowup)?;
        if let Some(seg) = record.as_deref_mut() {
            seg.push(r, u);
        }
    }
    Ok(())
}

/// Fixed-step RK4 integration of `u̇ = f(Θ_r b, u)` for `r ∈ [0, t]`, with
/// channels read from `src`.
pub fn integrate_rde<T: Real>(
    field: &FieldSpec<T>,
    src: &dyn ChannelSource<T>,
    x0: &[T],
    t: T,
    cfg: &IntegratorConfig<T>,
) -> Result<TrajectorySegment<T>> {
    if cfg.scheme != Scheme::Rk4 {
        return Err(Error::Config("integrate_rde requires the rk4 scheme".into()));
    }
    if x0.len() != field.dim() {
        return Err(Error::Dimension {
            expected: field.dim(),
            got: x0.len(),
        });
    }
    let steps = cfg.steps(t)?;
    let table = ChannelTable::build(src, cfg.step, steps, true)?;
    let mut seg = TrajectorySegment::new(field.dim());
    let mut u = x0.to_vec();
    rk4_run(field, &table, steps, cfg.step, cfg.blowup, &mut u, Some(&mut seg))?;
    Ok(seg)
}
