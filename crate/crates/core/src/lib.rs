//! Geographic energy-aware multipath routing (GEAMS) for wireless multimedia
//! sensor networks, with a GPSR baseline and a deterministic discrete-event
//! simulator to compare them.
//!
//! - [`topology`]: random deployments, radio and Gabriel graphs.
//! - [`energy`]: first-order radio model and batteries.
//! - [`routing`]: neighbor tables, GEAMS smart greedy / walking back, GPSR.
//! - [`sim`]: event engine, link model, scenario config.
//! - [`metrics`]: end-of-run statistics and CSV export.
//! - [`experiment`]: protocol × size × seed matrices.

pub mod energy;
pub mod experiment;
pub mod metrics;
pub mod packet;
pub mod routing;
pub mod sim;
pub mod topology;

pub use energy::{rx_energy, tx_energy, Battery, EnergyModelParams};
pub use metrics::MetricsReport;
pub use packet::{DataPacket, LossReason};
pub use routing::Protocol;
pub use sim::config::ScenarioConfig;
pub use sim::link::{link_rate, serialization_delay, LinkModel};
pub use topology::{distance, generate_topology, FieldSpec, NodeId, Position, Topology};
