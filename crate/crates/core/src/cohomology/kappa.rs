use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Real;

type Fun<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Noise intensity `κ(t)` together with its derivative `κ̇(t)`.
#[derive(Clone)]
pub struct KappaSpec<T> {
    name: String,
    kappa: Fun<T>,
    kappa_dot: Fun<T>,
}

impl<T> fmt::Debug for KappaSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KappaSpec({})", self.name)
    }
}

impl<T: Real> KappaSpec<T> {
    pub fn new(
        name: &str,
        kappa: impl Fn(T) -> T + Send + Sync + 'static,
        kappa_dot: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            kappa: Arc::new(kappa),
            kappa_dot: Arc::new(kappa_dot),
        }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self::new(&format!("const({c})"), move |_| c, |_| T::zero())
    }

    /// `κ(t) = 1/(1 + t²)`, `κ̇(t) = −2t/(1 + t²)²`.
    pub fn inverse_quadratic() -> Self {
        Self::new(
            "inverse_quadratic",
            |t: T| T::one() / (T::one() + t * t),
            |t: T| {
                let q = T::one() + t * t;
                -T::lit(2.0) * t / (q * q)
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn kappa(&self, t: T) -> T {
        (self.kappa)(t)
    }

    #[inline]
    pub fn kappa_dot(&self, t: T) -> T {
        (self.kappa_dot)(t)
    }

    pub fn is_zero_on(&self, lo: T, hi: T) -> bool {
        let n = 64;
        (0..=n).all(|i| {
            let t = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            self.kappa(t) == T::zero()
        })
    }

    /// Checks `κ̇` against central differences of `κ` on `n + 1` points of
    /// `[lo, hi]`; the largest discrepancy must stay below `1e-4`.
    pub fn check_consistency(&self, lo: T, hi: T, n: usize) -> Result<T> {
        let h = T::epsilon().cbrt();
        let mut worst = T::zero();
        for i in 0..=n {
            let t = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n.max(1));
            let (k, kd) = (self.kappa(t), self.kappa_dot(t));
            if !k.is_finite() || !kd.is_finite() {
                return Err(Error::Domain(format!("κ not finite at t = {t}")));
            }
            let fd = (self.kappa(t + h) - self.kappa(t - h)) / (h + h);
            worst = worst.max((fd - kd).abs());
        }
        if worst > T::lit(1e-4) {
            return Err(Error::Domain(format!(
                "κ̇ inconsistent with κ (max finite-difference gap {worst})"
            )));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for k in [
            KappaSpec::<f64>::zero(),
            KappaSpec::constant(1.0),
            KappaSpec::inverse_quadratic(),
        ] {
            assert!(k.check_consistency(-50.0, 50.0, 2001).unwrap() < 1e-8);
        }
        assert!(KappaSpec::<f32>::inverse_quadratic()
            .check_consistency(-5.0, 5.0, 101)
            .is_ok());
    }

    #[test]
    fn typo_in_derivative_is_caught() {
        let bad = KappaSpec::<f64>::new("bad", |t| t * t, |t| t);
        assert!(bad.check_consistency(-1.0, 1.0, 10).is_err());
    }
}
