//! Numerical laboratory for nonautonomous random dynamical systems.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod bench;
pub mod cocycle;
pub mod cohomology;
pub mod driver;
pub mod setvalued;
pub mod symbolspace;
mod error;
pub mod fit;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SamplePath64 = driver::SamplePath<f64>;
pub type BasePoint64 = driver::BasePoint<f64>;
pub type FieldSpec64 = cocycle::FieldSpec<f64>;
pub type Nrds64 = cocycle::Nrds<f64>;
