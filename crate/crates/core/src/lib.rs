//! Protocol-model simulator for wireless device-to-device caching networks.
//!
//! Nodes are dropped uniformly in the unit square, cache files from a library,
//! and serve each other's requests inside local traffic cells by multihop
//! relaying over a grid of hopping cells under TDMA spatial reuse. The crate
//! measures symmetric throughput and outage, and fits throughput scaling
//! exponents against the closed-form bounds in [`analysis`].
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod caching;
pub mod delivery;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod num;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use num::Real;

pub type NetworkConfig = model::NetworkConfig<f64>;
pub type DerivedScales = model::DerivedScales<f64>;
pub type ImprovedParams = model::ImprovedParams<f64>;
pub type Popularity = model::Popularity<f64>;
pub type Point = geometry::Point<f64>;
pub type NodePlacement = geometry::NodePlacement<f64>;
pub type CellGrid = geometry::CellGrid<f64>;
pub type SimResult = metrics::SimResult<f64>;
pub type BoundSet = analysis::BoundSet<f64>;
pub type ScalingFit = analysis::ScalingFit<f64>;
pub type SchemeParams = sim::SchemeParams<f64>;
pub type PreparedSize = sim::PreparedSize<f64>;
pub type World = sim::World<f64>;
pub type ExperimentSpec = experiment::ExperimentSpec<f64>;
pub type ExperimentOutput = experiment::ExperimentOutput<f64>;
pub type ResultRow = experiment::ResultRow<f64>;

pub use analysis::Regime;
pub use caching::{CachePlacement, CachePolicy};
pub use delivery::{RoutePlan, Schedule, SdAssignment};
pub use metrics::OutageCause;
pub use model::DemandVector;
pub use sim::Scheme;
