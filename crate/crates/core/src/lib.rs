//! Discrete-time simulator of a microgrid energy market with peer-to-peer
//! trading and battery-based energy sharing.
//!
//! Houses either produce solar energy (prosumers) or only consume it. Each
//! hour every house nets its generation against its load, charges or drains
//! its own battery, and then offers its surplus, asks to buy its deficit, or
//! (when it cannot pay) asks for a share in exchange for hosting reserved
//! energy in its battery. The market clears buy requests first against
//! reserved energy and then against fresh offers, and finally routes unsold
//! surplus to share requests through either a central sharer account or the
//! prosumers themselves.
//!
//! Module map:
//! - [`ingest`]: time-series table parsing, house synthesis, dataset assembly
//! - [`model`]: batteries with reservation ledgers, houses, the contract account
//! - [`pricing`]: the rolling clearing-price rule
//! - [`market`]: order intake, first-come first-served matching, sharing, settlement
//! - [`engine`]: scenario runs, comparisons, and multi-seed batches
//! - [`config`] and [`report`]: run configuration and CSV/JSON report output

pub mod config;
pub mod engine;
pub mod ingest;
pub mod market;
pub mod model;
pub mod pricing;
pub mod report;

pub use engine::{ScenarioKind, ScenarioMetrics, SimConfig};
pub use ingest::{Dataset, HouseProfile, TimeSeriesTable};

/// Index of a house within a dataset.
pub type HouseId = usize;

/// Simulation timestep (one hour).
pub type Timestep = usize;

/// Energy amounts below this many watt-hours are treated as zero.
pub const ENERGY_EPS: f64 = 1e-9;
