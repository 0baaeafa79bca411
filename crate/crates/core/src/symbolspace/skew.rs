use super::symbol::SymbolFunction;
use crate::cocycle::{integrate_rde, FieldSpec, IntegratorConfig};
use crate::error::{Error, Result};
use crate::Real;

/// `Π(t)(x, σ) = (ψ(t, σ)x, ϑ_t σ)`: integrates the field with `σ` as its only
/// channel, then translates the symbol.
pub fn skew_step<T: Real>(
    field: &FieldSpec<T>,
    x: &[T],
    sigma: &SymbolFunction<T>,
    t: T,
    cfg: &IntegratorConfig<T>,
) -> Result<(Vec<T>, SymbolFunction<T>)> {
    if field.channels().len() != 1 {
        return Err(Error::Field(format!(
            "the skew product needs a field with exactly one channel, found {}",
            field.channels().len()
        )));
    }
    if !sigma.covers(T::zero(), t) {
        return Err(Error::Support {
            lo: 0.0,
            hi: t.f64(),
            t_min: sigma.t_min().f64(),
            t_max: sigma.t_max().f64(),
        });
    }
    let seg = integrate_rde(field, sigma, x, t, cfg)?;
    Ok((seg.last().to_vec(), sigma.translate(t)?))
}

/// `r ↦ ψ(r, σ)x` on the integration grid of `[0, t]`.
pub fn symbol_trajectory<T: Real>(
    field: &FieldSpec<T>,
    x: &[T],
    sigma: &SymbolFunction<T>,
    t: T,
    cfg: &IntegratorConfig<T>,
) -> Result<crate::cocycle::TrajectorySegment<T>> {
    if !sigma.covers(T::zero(), t) {
        return Err(Error::Support {
            lo: 0.0,
            hi: t.f64(),
            t_min: sigma.t_min().f64(),
            t_max: sigma.t_max().f64(),
        });
    }
    integrate_rde(field, sigma, x, t, cfg)
}
