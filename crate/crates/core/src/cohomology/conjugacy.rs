use std::io::Write;

use rayon::prelude::*;

use super::kappa::KappaSpec;
use crate::cocycle::{
    make_nrds, Channel, Cocycle, Conjugated, FieldSpec, IntegratorConfig, Nrds, SdeCocycle,
    SdeSpec, StateTransform, TrajectorySegment, MAX_DIM,
};
use crate::driver::{BasePoint, OuEvaluator, SamplePath};
use crate::error::{Error, Result};
use crate::fit::loglog_slope;
use crate::Real;

/// `T(τ, ω, x) = e^{−κ(τ) z(ω)} x` and its inverse.
#[derive(Debug, Clone)]
pub struct ConjugacyTransform<T: Real> {
    pub kappa: KappaSpec<T>,
    pub ou: OuEvaluator<T>,
}

impl<T: Real> ConjugacyTransform<T> {
    pub fn new(kappa: KappaSpec<T>) -> Self {
        Self {
            kappa,
            ou: OuEvaluator::default(),
        }
    }

    /// The exponent `κ(τ) z(ω)`.
    pub fn exponent(&self, tau: T, p: &SamplePath<T>) -> Result<T> {
        let k = self.kappa.kappa(tau);
        if k == T::zero() {
            return Ok(T::zero());
        }
        Ok(k * p.ou_at(&self.ou, T::zero())?)
    }

    pub fn transform(&self, tau: T, p: &SamplePath<T>, x: &[T]) -> Result<Vec<T>> {
        let f = (-self.exponent(tau, p)?).exp();
        Ok(x.iter().map(|&v| f * v).collect())
    }

    pub fn inverse(&self, tau: T, p: &SamplePath<T>, x: &[T]) -> Result<Vec<T>> {
        let f = self.exponent(tau, p)?.exp();
        Ok(x.iter().map(|&v| f * v).collect())
    }
}

fn wiener_of<T: Real>(b: &BasePoint<T>) -> Result<&SamplePath<T>> {
    b.driver
        .as_path()
        .ok_or_else(|| Error::Config("the conjugacy needs a Wiener driver".into()))
}

impl<T: Real> StateTransform<T> for ConjugacyTransform<T> {
    fn forward(&self, b: &BasePoint<T>, x: &mut [T]) -> Result<()> {
        let f = (-self.exponent(b.tau, wiener_of(b)?)?).exp();
        x.iter_mut().for_each(|v| *v = f * *v);
        Ok(())
    }

    fn inverse(&self, b: &BasePoint<T>, x: &mut [T]) -> Result<()> {
        let f = self.exponent(b.tau, wiener_of(b)?)?.exp();
        x.iter_mut().for_each(|v| *v = f * *v);
        Ok(())
    }
}

const CH_Z: &str = "ou_z";
const CH_K: &str = "kappa";
const CH_KD: &str = "kappa_dot";

/// The random ODE
/// `v̇ = A v + e^{−κ(t)z(θ_tω)} f(e^{κ(t)z(θ_tω)} v) + [κ(t) − κ̇(t)] z(θ_tω) v`
/// satisfied by `v = T u` when `u` solves `sde`.
pub fn conjugated_field<T: Real>(sde: &SdeSpec<T>) -> Result<FieldSpec<T>> {
    let f = sde.drift.clone();
    let d = f.dim();
    let base = f.channels().len();
    let mut channels = f.channels().to_vec();
    let k1 = sde.kappa.clone();
    let k2 = sde.kappa.clone();
    channels.push(Channel::along(CH_Z, |z| z));
    channels.push(Channel::time(CH_K, move |t| k1.kappa(t)));
    channels.push(Channel::time(CH_KD, move |t| k2.kappa_dot(t)));
    for name in [CH_Z, CH_K, CH_KD] {
        if f.channel_index(name).is_some() {
            return Err(Error::Field(format!("drift already uses reserved channel `{name}`")));
        }
    }
    let a = sde.a_diag.clone();
    FieldSpec::new(d, channels, move |t, ch, v, dv| {
        let (z, k, kd) = (ch[base], ch[base + 1], ch[base + 2]);
        let e = (k * z).exp();
        let mut u = [T::zero(); MAX_DIM];
        for i in 0..d {
            u[i] = e * v[i];
        }
        f.eval(t, &ch[..base], &u[..d], dv);
        let lin = (k - kd) * z;
        for i in 0..d {
            dv[i] = a[i] * v[i] + dv[i] / e + lin * v[i];
        }
    })
}

/// `ψ̂ = T⁻¹ ψ T`: the SDE cocycle realized through its random ODE.
pub type ConjugatedNrds<T> = Conjugated<Nrds<T>, ConjugacyTransform<T>>;

pub fn conjugated_cocycle<T: Real>(sde: &SdeSpec<T>, cfg: IntegratorConfig<T>) -> Result<ConjugatedNrds<T>> {
    Ok(Conjugated::new(
        make_nrds(conjugated_field(sde)?, cfg)?,
        ConjugacyTransform::new(sde.kappa.clone()),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub dt: T,
    pub sup_error: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// Log–log slope of `sup_error` against `dt`.
    pub order: Option<f64>,
}

impl<T: Real> ConvergenceReport<T> {
    fn from_rows(rows: Vec<ConvergenceRow<T>>) -> Self {
        let x: Vec<f64> = rows.iter().map(|r| r.dt.f64()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.sup_error.f64()).collect();
        Self {
            order: loglog_slope(&x, &y),
            rows,
        }
    }

    /// Whether the error does not grow as `dt` shrinks (rows sorted by `dt`).
    pub fn is_monotone(&self) -> bool {
        let mut r: Vec<&ConvergenceRow<T>> = self.rows.iter().collect();
        r.sort_by(|a, b| b.dt.partial_cmp(&a.dt).unwrap());
        r.windows(2).all(|w| w[1].sup_error <= w[0].sup_error)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "dt,sup_error")?;
        for r in &self.rows {
            writeln!(w, "{},{}", r.dt, r.sup_error)?;
        }
        Ok(())
    }
}

fn sup_gap<T: Real>(a: &TrajectorySegment<T>, b: &TrajectorySegment<T>) -> T {
    a.states()
        .zip(b.states())
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (*p - *q).abs()))
        .fold(T::zero(), T::max)
}

/// For every `Δt`: `sup_{r ∈ [0, t]} |SDE(r) − T⁻¹(Θ_r b) ψ(r, b) T(b) x₀|`
/// with the SDE leg integrated by Euler–Heun and `ψ` by RK4, both at `Δt`.
pub fn verify_conjugacy<T: Real>(
    sde: &SdeSpec<T>,
    p: &SamplePath<T>,
    tau: T,
    x0: &[T],
    t: T,
    dts: &[T],
) -> Result<ConvergenceReport<T>> {
    let b = BasePoint::wiener(tau, p.clone());
    let rows = dts
        .par_iter()
        .map(|&dt| {
            let sde_leg = SdeCocycle::new(sde.clone(), IntegratorConfig::euler_heun(dt))?
                .trajectory(t, &b, x0)?;
            let rde_leg = conjugated_cocycle(sde, IntegratorConfig::rk4(dt))?.trajectory(t, &b, x0)?;
            Ok(ConvergenceRow {
                dt,
                sup_error: sup_gap(&sde_leg, &rde_leg),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_rows(rows))
}

/// Error of the SDE leg against a known exact solution `r ↦ exact(r)`.
pub fn strong_error_against<T: Real>(
    sde: &SdeSpec<T>,
    p: &SamplePath<T>,
    tau: T,
    x0: &[T],
    t: T,
    dts: &[T],
    exact: impl Fn(T) -> Result<Vec<T>> + Sync,
) -> Result<ConvergenceReport<T>> {
    let b = BasePoint::wiener(tau, p.clone());
    let rows = dts
        .par_iter()
        .map(|&dt| {
            let seg = SdeCocycle::new(sde.clone(), IntegratorConfig::euler_heun(dt))?
                .trajectory(t, &b, x0)?;
            let mut worst = T::zero();
            for (r, u) in seg.times.iter().zip(seg.states()) {
                for (a, e) in u.iter().zip(exact(*r)?) {
                    worst = worst.max((*a - e).abs());
                }
            }
            Ok(ConvergenceRow { dt, sup_error: worst })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaBoundRow<T> {
    pub s: T,
    pub sup_kz: T,
    pub sup_kdotz: T,
}

/// `sup_{|t| ≤ S} |κ(t) z(θ_t ω)|` and `sup_{|t| ≤ S} |[κ(t) − κ̇(t)] z(θ_t ω)|`
/// over the path nodes, for each window half-width `S`.
pub fn kappa_noise_bound<T: Real>(
    kappa: &KappaSpec<T>,
    p: &SamplePath<T>,
    windows: &[T],
    ou: &OuEvaluator<T>,
) -> Result<Vec<KappaBoundRow<T>>> {
    let s_max = windows.iter().fold(T::zero(), |m, s| m.max(*s));
    p.require(-s_max - ou.t_trunc(), s_max)?;
    let series = p.ou_series(ou)?;
    let i0 = p.index_of(-s_max)?;
    let i1 = p.index_of(s_max)?;
    let mut rows = Vec::with_capacity(windows.len());
    for &s in windows {
        let (mut a, mut b) = (T::zero(), T::zero());
        for i in i0..=i1 {
            let t = p.time_of(i);
            if t.abs() > s + p.dt() * T::lit(1e-6) {
                continue;
            }
            let z = series.at_node(i).expect("series covers the checked window");
            a = a.max((kappa.kappa(t) * z).abs());
            b = b.max(((kappa.kappa(t) - kappa.kappa_dot(t)) * z).abs());
        }
        rows.push(KappaBoundRow { s, sup_kz: a, sup_kdotz: b });
    }
    Ok(rows)
}

pub fn write_kappa_csv<T: Real, W: Write>(rows: &[KappaBoundRow<T>], mut w: W) -> Result<()> {
    writeln!(w, "S,sup_kz,sup_kdotz")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.s, r.sup_kz, r.sup_kdotz)?;
    }
    Ok(())
}
