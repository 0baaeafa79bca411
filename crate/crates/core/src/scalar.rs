//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the integrators, box coverings and metrics are generic over.
///
/// Implemented for `f32` and `f64`. Text round-trips through `Display` /
/// `FromStr` are exact for both, which the dump formats rely on.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion to `f64` for reporting and error payloads.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Rounds `t / step` to the nearest integer and reports whether `t` sits on
    /// the grid within a relative tolerance of a few ulps of the step count.
    fn grid_index(t: Self, step: Self) -> Option<i64> {
        let q = t / step;
        let k = q.round();
        let tol = Self::epsilon() * Self::lit(64.0) * (Self::one() + k.abs());
        if (q - k).abs() <= tol {
            k.to_i64()
        } else {
            None
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_index_accepts_multiples_and_rejects_offsets() {
        assert_eq!(f64::grid_index(0.3, 0.1), Some(3));
        assert_eq!(f64::grid_index(-20.0, 0.01), Some(-2000));
        assert_eq!(f64::grid_index(0.305, 0.1), None);
        assert_eq!(f32::grid_index(1.5, 0.5), Some(3));
    }
}
