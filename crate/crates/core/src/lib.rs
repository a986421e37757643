//! Sum-computation-rate maximization for edge computing with binary
//! offloading, assisted by an intelligent reflecting surface whose phase
//! configuration may change a limited number of times per frame.
//!
//! The pipeline for one channel realization is
//! [`channel::realize_channels`] → [`selection::solve_finite_q`] (or
//! [`selection::solve_infinite_q`]) → [`model::Solution`]. The
//! [`oracle`] module holds brute-force references and [`harness`] runs
//! seeded Monte Carlo sweeps.

pub mod allocation;
pub mod beamforming;
pub mod channel;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod selection;

pub use allocation::{local_rate, offload_allocation, LocalRate, OffloadAllocation, OffloadProfile};
pub use beamforming::{align_phase, shared_beam_sca, BeamVector, ScaOptions, ScaOutcome, WeightedLink};
pub use channel::{realize_channels, ChannelSet, GeometryConfig};
pub use error::{Error, Result};
pub use model::{dbm_to_watts, validate_scenario, Device, Solution, SystemParams};
pub use oracle::{grouping_oracle, subset_oracle, OracleResult};
pub use selection::{activation_test, solve_finite_q, solve_infinite_q, trading_rate, TradingRate};
