use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Real;

type Fun<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// The explicit family `F(t, u) = e^{k k₂ u^{p+1}}`,
/// `G(t, v) = (ln v / (k k₂))^{1/(p+1)}`, `g(t, s) = [k₂ s^p (p+1)]^{−1}`.
#[derive(Clone)]
pub struct PowerCohomology<T> {
    p: u32,
    k: Fun<T>,
    k2: Fun<T>,
}

impl<T> fmt::Debug for PowerCohomology<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerCohomology(p = {})", self.p)
    }
}

impl<T: Real> PowerCohomology<T> {
    pub fn new(
        p: u32,
        k: impl Fn(T) -> T + Send + Sync + 'static,
        k2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("p must be a positive integer".into()));
        }
        Ok(Self {
            p,
            k: Arc::new(k),
            k2: Arc::new(k2),
        })
    }

    /// `k ≡ c₁`, `k₂ ≡ c₂`.
    pub fn constant(p: u32, c1: T, c2: T) -> Result<Self> {
        Self::new(p, move |_| c1, move |_| c2)
    }

    /// Checks `k(t)·k₂(t) ≠ 0` on `n + 1` points of `[lo, hi]`.
    pub fn check_window(&self, lo: T, hi: T, n: usize) -> Result<()> {
        for i in 0..=n {
            let t = lo + (hi - lo) * T::from_usize_lossy(i) / T::from_usize_lossy(n.max(1));
            let kk = self.kk(t);
            if kk == T::zero() || !kk.is_finite() {
                return Err(Error::Domain(format!("k·k₂ vanishes at t = {t}")));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self, t: T) -> T {
        (self.k)(t)
    }

    fn kk(&self, t: T) -> T {
        (self.k)(t) * (self.k2)(t)
    }

    fn power(&self, u: T) -> T {
        u.powi(self.p as i32 + 1)
    }

    /// `F(t, u) = e^{k k₂ u^{p+1}}`.
    pub fn f(&self, t: T, u: T) -> T {
        (self.kk(t) * self.power(u)).exp()
    }

    /// The sign-corrected `F̃(t, u) = e^{−k k₂ u^{p+1}}`.
    pub fn f_corrected(&self, t: T, u: T) -> T {
        (-self.kk(t) * self.power(u)).exp()
    }

    /// `G(t, v)` on the branch `v > 0`, `u ≥ 0`.
    pub fn g_inverse(&self, t: T, v: T) -> Result<T> {
        if !(v > T::zero()) {
            return Err(Error::Domain(format!("G needs v > 0, got {v}")));
        }
        let q = v.ln() / self.kk(t);
        if q < T::zero() {
            return Err(Error::Domain(format!(
                "ln v / (k k₂) = {q} is negative: no real root on the u ≥ 0 branch"
            )));
        }
        Ok(q.powf(T::one() / T::from_usize_lossy(self.p as usize + 1)))
    }

    /// `g(t, s) = [k₂(t) s^p (p+1)]^{−1}`, singular at `s = 0`.
    pub fn g(&self, t: T, s: T) -> Result<T> {
        let den = (self.k2)(t) * s.powi(self.p as i32) * T::from_usize_lossy(self.p as usize + 1);
        if den == T::zero() {
            return Err(Error::Domain(format!("g is singular at s = {s}")));
        }
        Ok(T::one() / den)
    }

    /// `|∂_u F · g + k F|` at `(t, u)` with `∂_u F` from central differences.
    pub fn residual_at(&self, t: T, u: T, f: impl Fn(T, T) -> T) -> Result<T> {
        let h = T::lit(1e-5) * T::one().max(u.abs());
        let du = (f(t, u + h) - f(t, u - h)) / (h + h);
        Ok((du * self.g(t, u)? + self.k(t) * f(t, u)).abs())
    }

    /// Sup of the residual over a grid; `corrected` selects `F̃` over `F`.
    pub fn residual(&self, t: T, grid: &[T], corrected: bool) -> Result<T> {
        let mut worst = T::zero();
        for &u in grid {
            let r = if corrected {
                self.residual_at(t, u, |t, u| self.f_corrected(t, u))?
            } else {
                self.residual_at(t, u, |t, u| self.f(t, u))?
            };
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// Residuals of both transformations over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerResiduals<T> {
    pub literal: T,
    pub corrected: T,
}

pub fn power_pair_residuals<T: Real>(pc: &PowerCohomology<T>, t: T, grid: &[T]) -> Result<PowerResiduals<T>> {
    Ok(PowerResiduals {
        literal: pc.residual(t, grid, false)?,
        corrected: pc.residual(t, grid, true)?,
    })
}
