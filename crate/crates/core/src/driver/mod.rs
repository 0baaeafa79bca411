//! Noise drivers: two-sided Wiener paths, the circle rotation, the lifted
//! shift on `ℝ × Ω` and the stationary OU observable.

mod base;
mod circle;
pub mod noise;
mod ou;
mod path;

pub use base::{BasePoint, Driver, ObservableTrack};
pub use circle::CircleState;
pub use ou::{OuEvaluator, OuSeries, OuValue};
pub use path::SamplePath;
