//! Benchmark registry, configuration files, the experiment runner and the
//! OU non-existence probe.

mod config;
mod probe;
mod registry;
mod runner;

pub use config::{BoxSection, DriverSection, ExperimentConfig, LimitSection, OutputSection};
pub use probe::{
    ks_normal, ks_two_sample, mua_nonexistence_probe, sample_variance, stationary_samples, windowed_sups,
    KsResult, OuProbe, ProbeRow,
};
pub use registry::{lookup, registry, Amplitude, BenchmarkProblem, DriverKind, OuShift, ProblemId, ProblemParams};
pub use runner::{config_hash, conjugacy_sweep, cube_on_grid, run_experiment, BaseEstimate, BaseResult, ResultRecord};
