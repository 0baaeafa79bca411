//! Cocycles generated by random and nonautonomous differential equations.

mod field;
mod integrate;
mod nrds;
mod sde;

pub use field::{BaseChannels, Channel, ChannelKind, ChannelSource, FieldSpec, Rhs, MAX_DIM};
pub use integrate::{
    integrate_rde, ChannelTable, IntegratorConfig, Scheme, TrajectorySegment, DEFAULT_BLOWUP,
};
pub use nrds::{make_nrds, BatchError, Cocycle, Conjugated, EvolutionProcess, Nrds, StateTransform};
pub use sde::{integrate_stratonovich, SdeCocycle, SdeSpec};
