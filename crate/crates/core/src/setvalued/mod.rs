//! Box coverings, Hausdorff semi-distances and discretized omega-limit sets.

mod boxset;
mod limit;

pub use boxset::{hausdorff_dist, hausdorff_semidist, points_semidist, BoxSet, Grid};
pub use limit::{
    attraction_rate, estimate_mjua, forward_omega_limit, global_uniform_omega_limit,
    symmetric_shifts, uniform_omega_limit, write_rate_csv, LimitConfig, LimitEstimate, RateRow,
};

#[cfg(test)]
mod tests;
