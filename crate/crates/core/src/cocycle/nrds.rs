use std::sync::Arc;

use super::field::FieldSpec;
use super::integrate::{rk4_run, ChannelTable, IntegratorConfig, Scheme, TrajectorySegment};
use crate::driver::{BasePoint, OuEvaluator};
use crate::error::{Error, Result};
use crate::Real;

/// Failure while mapping a batch: index of the offending point and the cause.
pub type BatchError = (usize, Error);

/// A cocycle `φ(t, τ, ω)` over `Θ_t(τ, ω) = (τ + t, θ_t ω)`.
pub trait Cocycle<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    /// Integration step; durations must be multiples of it.
    fn step(&self) -> T;

    /// `r ↦ φ(r, b)x` sampled on the integration grid of `[0, t]`.
    fn trajectory(&self, t: T, b: &BasePoint<T>, x: &[T]) -> Result<TrajectorySegment<T>>;

    /// Replaces every point of the flat, `dim`-strided buffer `xs` by its
    /// image under `φ(t, b)`.
    fn apply_batch(&self, t: T, b: &BasePoint<T>, xs: &mut [T]) -> Result<(), BatchError>;

    /// One trajectory per point of the flat buffer `xs`; a failing point
    /// keeps its own error.
    fn trajectories(&self, t: T, b: &BasePoint<T>, xs: &[T]) -> Result<Vec<Result<TrajectorySegment<T>>>> {
        Ok(xs.chunks(self.dim()).map(|x| self.trajectory(t, b, x)).collect())
    }

    fn apply(&self, t: T, b: &BasePoint<T>, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut y = x.to_vec();
        self.apply_batch(t, b, &mut y).map_err(|(_, e)| e)?;
        Ok(y)
    }
}

impl<T: Real, C: Cocycle<T> + ?Sized> Cocycle<T> for Arc<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn step(&self) -> T {
        (**self).step()
    }
    fn trajectory(&self, t: T, b: &BasePoint<T>, x: &[T]) -> Result<TrajectorySegment<T>> {
        (**self).trajectory(t, b, x)
    }
    fn apply_batch(&self, t: T, b: &BasePoint<T>, xs: &mut [T]) -> Result<(), BatchError> {
        (**self).apply_batch(t, b, xs)
    }
    fn trajectories(&self, t: T, b: &BasePoint<T>, xs: &[T]) -> Result<Vec<Result<TrajectorySegment<T>>>> {
        (**self).trajectories(t, b, xs)
    }
}

/// The cocycle generated by `u̇ = f(Θ_r(τ, ω), u)`, i.e.
/// `φ(t, τ, ω)x₀ = v(t + τ, τ, θ_{−τ}ω, x₀)`.
#[derive(Clone, Debug)]
pub struct Nrds<T: Real> {
    field: FieldSpec<T>,
    cfg: IntegratorConfig<T>,
    ou: OuEvaluator<T>,
}

impl<T: Real> Nrds<T> {
    pub fn new(field: FieldSpec<T>, cfg: IntegratorConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if cfg.scheme != Scheme::Rk4 {
            return Err(Error::Config("random ODE cocycles integrate with rk4".into()));
        }
        Ok(Self {
            field,
            cfg,
            ou: OuEvaluator::default(),
        })
    }

    pub fn with_ou(mut self, ou: OuEvaluator<T>) -> Self {
        self.ou = ou;
        self
    }

    pub fn field(&self) -> &FieldSpec<T> {
        &self.field
    }

    pub fn config(&self) -> &IntegratorConfig<T> {
        &self.cfg
    }

    pub fn ou(&self) -> &OuEvaluator<T> {
        &self.ou
    }

    fn table(&self, t: T, b: &BasePoint<T>) -> Result<(usize, ChannelTable<T>)> {
        let steps = self.cfg.steps(t)?;
        let src = self.field.source(b, &self.ou)?;
        let table = ChannelTable::build(&src, self.cfg.step, steps, true)?;
        Ok((steps, table))
    }
}

/// Builds the cocycle handle of a field.
pub fn make_nrds<T: Real>(field: FieldSpec<T>, cfg: IntegratorConfig<T>) -> Result<Nrds<T>> {
    Nrds::new(field, cfg)
}

impl<T: Real> Cocycle<T> for Nrds<T> {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn step(&self) -> T {
        self.cfg.step
    }

    fn trajectory(&self, t: T, b: &BasePoint<T>, x: &[T]) -> Result<TrajectorySegment<T>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let (steps, table) = self.table(t, b)?;
        let mut seg = TrajectorySegment::new(self.dim());
        let mut u = x.to_vec();
        rk4_run(&self.field, &table, steps, self.cfg.step, self.cfg.blowup, &mut u, Some(&mut seg))?;
        Ok(seg)
    }

    fn trajectories(&self, t: T, b: &BasePoint<T>, xs: &[T]) -> Result<Vec<Result<TrajectorySegment<T>>>> {
        let d = self.dim();
        if xs.len() % d != 0 {
            return Err(Error::Dimension { expected: d, got: xs.len() % d });
        }
        let (steps, table) = self.table(t, b)?;
        Ok(xs
            .chunks(d)
            .map(|x| {
                let mut seg = TrajectorySegment::new(d);
                let mut u = x.to_vec();
                rk4_run(&self.field, &table, steps, self.cfg.step, self.cfg.blowup, &mut u, Some(&mut seg))?;
                Ok(seg)
            })
            .collect())
    }

    fn apply_batch(&self, t: T, b: &BasePoint<T>, xs: &mut [T]) -> Result<(), BatchError> {
        let d = self.dim();
        if xs.len() % d != 0 {
            return Err((0, Error::Dimension { expected: d, got: xs.len() % d }));
        }
        let (steps, table) = self.table(t, b).map_err(|e| (0, e))?;
        if steps == 0 {
            return Ok(());
        }
        for (i, u) in xs.chunks_mut(d).enumerate() {
            rk4_run(&self.field, &table, steps, self.cfg.step, self.cfg.blowup, u, None)
                .map_err(|e| (i, e))?;
        }
        Ok(())
    }
}

/// The two-parameter evolution process `Φ_{τ,ω}(t, s) = φ(t − s, Θ_s(τ, ω))`
/// at a frozen base point.
pub struct EvolutionProcess<'a, T: Real, C: Cocycle<T> + ?Sized> {
    pub cocycle: &'a C,
    pub base: BasePoint<T>,
}

impl<'a, T: Real, C: Cocycle<T> + ?Sized> EvolutionProcess<'a, T, C> {
    pub fn new(cocycle: &'a C, base: BasePoint<T>) -> Self {
        Self { cocycle, base }
    }

    pub fn apply(&self, t: T, s: T, x: &[T]) -> Result<Vec<T>> {
        if t < s {
            return Err(Error::Domain(format!("evolution process needs t ≥ s, got t = {t}, s = {s}")));
        }
        let b = self.base.shift(s)?;
        self.cocycle.apply(t - s, &b, x)
    }
}

/// A state-space change of coordinates depending on the base point.
pub trait StateTransform<T: Real>: Send + Sync {
    fn forward(&self, b: &BasePoint<T>, x: &mut [T]) -> Result<()>;
    fn inverse(&self, b: &BasePoint<T>, x: &mut [T]) -> Result<()>;
}

/// `ψ̂(t, b) = M⁻¹(Θ_t b) ∘ ψ(t, b) ∘ M(b)`.
pub struct Conjugated<C, M> {
    pub inner: C,
    pub map: M,
}

impl<C, M> Conjugated<C, M> {
    pub fn new(inner: C, map: M) -> Self {
        Self { inner, map }
    }
}

impl<T: Real, C: Cocycle<T>, M: StateTransform<T>> Cocycle<T> for Conjugated<C, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn step(&self) -> T {
        self.inner.step()
    }

    fn trajectory(&self, t: T, b: &BasePoint<T>, x: &[T]) -> Result<TrajectorySegment<T>> {
        self.trajectories(t, b, x)?.pop().expect("one point in, one trajectory out")
    }

    fn trajectories(&self, t: T, b: &BasePoint<T>, xs: &[T]) -> Result<Vec<Result<TrajectorySegment<T>>>> {
        let d = self.dim();
        let mut ys = xs.to_vec();
        for y in ys.chunks_mut(d) {
            self.map.forward(b, y)?;
        }
        let inner = self.inner.trajectories(t, b, &ys)?;
        let mut ends: Vec<Option<BasePoint<T>>> = Vec::new();
        let mut out = Vec::with_capacity(inner.len());
        for (x, seg) in xs.chunks(d).zip(inner) {
            let seg = match seg {
                Ok(s) => s,
                Err(e) => {
                    out.push(Err(e));
                    continue;
                }
            };
            if ends.len() < seg.len() {
                ends.resize(seg.len(), None);
            }
            let mut back = TrajectorySegment::new(d);
            let mut res = Ok(());
            for (i, (&r, v)) in seg.times.iter().zip(seg.states()).enumerate() {
                if i == 0 {
                    back.push(r, x);
                    continue;
                }
                if ends[i].is_none() {
                    ends[i] = Some(b.shift(r)?);
                }
                let mut u = v.to_vec();
                if let Err(e) = self.map.inverse(ends[i].as_ref().unwrap(), &mut u) {
                    res = Err(e);
                    break;
                }
                back.push(r, &u);
            }
            out.push(res.map(|_| back));
        }
        Ok(out)
    }

    fn apply_batch(&self, t: T, b: &BasePoint<T>, xs: &mut [T]) -> Result<(), BatchError> {
        if t == T::zero() {
            return Ok(());
        }
        let d = self.dim();
        for (i, x) in xs.chunks_mut(d).enumerate() {
            self.map.forward(b, x).map_err(|e| (i, e))?;
        }
        self.inner.apply_batch(t, b, xs)?;
        let end = b.shift(t).map_err(|e| (0, e))?;
        for (i, x) in xs.chunks_mut(d).enumerate() {
            self.map.inverse(&end, x).map_err(|e| (i, e))?;
        }
        Ok(())
    }
}
