//! Discrete-event simulator for opportunistic networks.
//!
//! Each node runs a four-layer stack (application, forwarding, adaptation,
//! link) and moves according to a mobility model. A run produces a
//! [`metrics::Ledger`] from which every metric is derived.
//!
//! The geometric and statistical kernels are generic over [`num::Scalar`];
//! the aliases below fix them to `f64`, the precision the engine uses.

pub mod application;
pub mod engine;
pub mod forwarding;
pub mod geometry;
pub mod ids;
pub mod link;
pub mod metrics;
pub mod mobility;
pub mod num;

pub use engine::{SimConfig, Simulation};
pub use ids::{DataId, NodeId};

pub type Point = geometry::Point<f64>;
pub type Waypoint = mobility::Waypoint<f64>;
pub type Trajectory = mobility::Trajectory<f64>;
