//! Coupling from the past for the Fortuin–Kasteleyn random-cluster heat-bath
//! process and the Ising heat-bath process, with exact oracles for tiny
//! systems and the statistics used to study coupling times.

pub mod connectivity;
pub mod coupling;
pub mod coupon;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fk;
pub mod graph;
pub mod ising;
pub mod rng;
pub mod stats;

pub use connectivity::{component_count, is_pivotal, EdgeConfig};
pub use coupling::{CouplingSample, CouplingTimes, DEFAULT_STEP_CAP};
pub use error::{Error, Result};
pub use fk::{cftp_sample, forward_coupling_time, stationary_series, FkParams};
pub use graph::{Graph, GraphSpec, TreeShape};
pub use ising::{ising_coupling_time, IsingParams, SpinConfig};
