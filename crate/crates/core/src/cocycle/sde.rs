use super::field::{ChannelSource, FieldSpec, MAX_DIM};
use super::integrate::{norm, ChannelTable, IntegratorConfig, Scheme, TrajectorySegment};
use super::nrds::{BatchError, Cocycle};
use crate::cohomology::KappaSpec;
use crate::driver::{BasePoint, OuEvaluator, SamplePath};
use crate::error::{Error, Result};
use crate::Real;

/// `du = (A u + f(u)) dt + κ(t) u ∘ dW` with diagonal `A`.
#[derive(Clone, Debug)]
pub struct SdeSpec<T: Real> {
    pub a_diag: Vec<T>,
    pub drift: FieldSpec<T>,
    pub kappa: KappaSpec<T>,
}

impl<T: Real> SdeSpec<T> {
    pub fn new(a_diag: Vec<T>, drift: FieldSpec<T>, kappa: KappaSpec<T>) -> Result<Self> {
        if a_diag.len() != drift.dim() {
            return Err(Error::Dimension {
                expected: drift.dim(),
                got: a_diag.len(),
            });
        }
        Ok(Self { a_diag, drift, kappa })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }
}

struct HeunRun<'a, T: Real> {
    spec: &'a SdeSpec<T>,
    table: ChannelTable<T>,
    dw: Vec<T>,
    kappa: Vec<T>,
    steps: usize,
    h: T,
    blowup: T,
}

impl<'a, T: Real> HeunRun<'a, T> {
    fn new(spec: &'a SdeSpec<T>, b: &BasePoint<T>, ou: &OuEvaluator<T>, t: T, cfg: &IntegratorConfig<T>) -> Result<Self> {
        let p = b
            .driver
            .as_path()
            .ok_or_else(|| Error::Config("euler_heun needs a Wiener driver".into()))?;
        let steps = cfg.steps(t)?;
        let h = cfg.step;
        p.require(T::zero(), t)?;
        let src = spec.drift.source(b, ou)?;
        let table = ChannelTable::build(&src, h, steps, false)?;
        let mut w = Vec::with_capacity(steps + 1);
        for k in 0..=steps {
            w.push(p.value_at(T::from_usize_lossy(k) * h)?);
        }
        let dw = w.windows(2).map(|x| x[1] - x[0]).collect();
        let kappa = (0..=steps)
            .map(|k| spec.kappa.kappa(src.abs_time(T::from_usize_lossy(k) * h)))
            .collect();
        Ok(Self {
            spec,
            table,
            dw,
            kappa,
            steps,
            h,
            blowup: cfg.blowup,
        })
    }

    fn drift(&self, j: usize, u: &[T], out: &mut [T]) {
        self.spec.drift.eval(self.table.times[j], self.table.row(j), u, out);
        for i in 0..u.len() {
            out[i] = out[i] + self.spec.a_diag[i] * u[i];
        }
    }

    fn run(&self, u: &mut [T], mut record: Option<&mut TrajectorySegment<T>>) -> Result<()> {
        let d = u.len();
        let mut a0 = [T::zero(); MAX_DIM];
        let mut a1 = [T::zero(); MAX_DIM];
        let mut pred = [T::zero(); MAX_DIM];
        if let Some(seg) = record.as_deref_mut() {
            seg.push(T::zero(), u);
        }
        for k in 0..self.steps {
            let (dw, k0, k1) = (self.dw[k], self.kappa[k], self.kappa[k + 1]);
            self.drift(k, u, &mut a0[..d]);
            for i in 0..d {
                pred[i] = u[i] + a0[i] * self.h + k0 * u[i] * dw;
            }
            self.drift(k + 1, &pred[..d], &mut a1[..d]);
            let half = T::lit(0.5);
            for i in 0..d {
                u[i] = u[i] + half * (a0[i] + a1[i]) * self.h + half * (k0 * u[i] + k1 * pred[i]) * dw;
            }
            let r = T::from_usize_lossy(k + 1) * self.h;
            let n = norm(u);
            if !n.is_finite() || n > self.blowup {
                return Err(Error::Divergence { time: r.f64(), norm: n.f64() });
            }
            if let Some(seg) = record.as_deref_mut() {
                seg.push(r, u);
            }
        }
        Ok(())
    }
}

/// Euler–Heun (Stratonovich predictor-corrector) solution of `spec` started at
/// absolute time `τ` on the realization `p`, over `[0, t]` of elapsed time.
pub fn integrate_stratonovich<T: Real>(
    spec: &SdeSpec<T>,
    p: &SamplePath<T>,
    tau: T,
    x0: &[T],
    t: T,
    step: T,
) -> Result<TrajectorySegment<T>> {
    SdeCocycle::new(spec.clone(), IntegratorConfig::euler_heun(step))?
        .trajectory(t, &BasePoint::wiener(tau, p.clone()), x0)
}

/// The cocycle `ψ̂` of a Stratonovich SDE.
#[derive(Clone, Debug)]
pub struct SdeCocycle<T: Real> {
    spec: SdeSpec<T>,
    cfg: IntegratorConfig<T>,
    ou: OuEvaluator<T>,
}

impl<T: Real> SdeCocycle<T> {
    pub fn new(spec: SdeSpec<T>, cfg: IntegratorConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if cfg.scheme != Scheme::EulerHeun {
            return Err(Error::Config("SDE cocycles integrate with euler_heun".into()));
        }
        Ok(Self {
            spec,
            cfg,
            ou: OuEvaluator::default(),
        })
    }

    pub fn spec(&self) -> &SdeSpec<T> {
        &self.spec
    }
}

impl<T: Real> Cocycle<T> for SdeCocycle<T> {
    fn dim(&self) -> usize {
        self.spec.dim()
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
        let run = HeunRun::new(&self.spec, b, &self.ou, t, &self.cfg)?;
        let mut seg = TrajectorySegment::new(self.dim());
        let mut u = x.to_vec();
        run.run(&mut u, Some(&mut seg))?;
        Ok(seg)
    }

    fn apply_batch(&self, t: T, b: &BasePoint<T>, xs: &mut [T]) -> Result<(), BatchError> {
        let run = HeunRun::new(&self.spec, b, &self.ou, t, &self.cfg).map_err(|e| (0, e))?;
        for (i, u) in xs.chunks_mut(self.dim()).enumerate() {
            run.run(u, None).map_err(|e| (i, e))?;
        }
        Ok(())
    }
}
