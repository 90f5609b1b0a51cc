//! Rate model for multimode quantum repeater chains built from atomic
//! ensemble memories with wavevector multiplexing.
//!
//! The crate evaluates single-link ENG probabilities, mode-averaged
//! entanglement of formation under memory decoherence, end-to-end
//! distribution times for ahierarchical and semihierarchical chains, and the
//! node count that maximizes the ebit rate per node. A Monte Carlo module
//! simulates the same protocols round by round as an independent check.
//!
//! Units: km, µs, mm⁻¹ for wavevectors and µs·mm⁻¹ for the lifetime
//! constant γ. Sweep records report seconds.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod architecture;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod link;
pub mod model;
pub mod modes;
pub mod montecarlo;
pub mod params;
pub mod sweep;

pub use architecture::{
    chain_time, f_waiting, range_limits, spdc_time, Architecture, ChainPlan, RangeLimits,
};
pub use entanglement::{concurrence, entanglement_of_formation, WernerState};
pub use error::{Error, Result};
pub use model::Model;
pub use modes::ModeSpace;
pub use montecarlo::{
    mc_chain_time, mc_expected_max_rounds, mc_semihier_storage, McConfig, McEstimate,
};
pub use params::{builtin_platform, builtin_platforms, load_config, Config, PlatformParams};
pub use sweep::{optimize_nodes, q_of, sweep, SweepRecord};
