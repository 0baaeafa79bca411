use crate::Real;

/// A point of the circle `S¹`, stored as an angle in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleState<T: Real> {
    angle: T,
}

pub(crate) fn reduce<T: Real>(x: T) -> T {
    let tau = T::TAU();
    let r = x % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // `r + tau` can round up to exactly `tau`
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

impl<T: Real> CircleState<T> {
    pub fn new(angle: T) -> Self {
        Self { angle: reduce(angle) }
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    /// The rotation `θ_t`: `angle + t mod 2π`.
    pub fn shift(&self, t: T) -> Self {
        Self::new(self.angle + t)
    }

    /// Evenly spaced states `2πj/n`, `j = 0..n`.
    pub fn grid(n: usize) -> Vec<Self> {
        (0..n)
            .map(|j| Self::new(T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn full_rotation_returns_to_zero() {
        assert_eq!(CircleState::new(0.0).shift(TAU).angle(), 0.0);
    }

    #[test]
    fn addition_mod_two_pi() {
        let c = CircleState::new(PI / 2.0).shift(PI);
        assert!((c.angle() - 1.5 * PI).abs() < 1e-15);
        let d = CircleState::new(1.0).shift(-3.0);
        assert!((d.angle() - (TAU - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn angle_is_always_reduced() {
        for x in [-100.0, -TAU, -1e-300, 0.0, TAU - 1e-17, 7.0, 1e6] {
            let a = CircleState::new(x).angle();
            assert!((0.0..TAU).contains(&a), "{x} -> {a}");
        }
    }

    #[test]
    fn group_law_to_rounding() {
        for (s, t) in [(0.3, 1.7), (-5.0, 2.5), (12.0, -40.0)] {
            let c = CircleState::<f64>::new(2.0);
            let a = c.shift(s).shift(t).angle();
            let b = c.shift(s + t).angle();
            let d = (a - b).abs();
            assert!(d.min(TAU - d) < 1e-13);
        }
    }
}
