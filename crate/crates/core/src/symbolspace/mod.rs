//! Symbol functions, their hulls under the compact-open metric, the skew
//! product over the hull and the attractor stability probe.

mod hull;
mod skew;
mod stability;
mod symbol;

pub use hull::{dyadic_lags, holder_diagnostic, holder_diagnostic_with, DEFAULT_MAX_LAG, hull_net, modulus, HolderEstimate, HullOptions, HullSample};
pub use skew::{skew_step, symbol_trajectory};
pub use stability::{delta_seeds, stability_probe, Escape, StabilityReport, StabilityRow};
pub use symbol::{co_metric, SymbolFunction, DEFAULT_TRUNCATION};

#[cfg(test)]
mod tests;
