//! Position-over-time providers.
//!
//! Every model ends up as one [`Trajectory`] per node, so the rest of the
//! simulator only ever asks "where is node `i` at time `t`".

mod bonnmotion;
mod rwp;
mod swim;
mod trajectory;

use thiserror::Error;

pub use bonnmotion::{parse_bonnmotion, serialize_bonnmotion, Dims};
pub use rwp::{rwp_generate, RwpConfig};
pub use swim::{swim_generate_all, CellGrid, SwimConfig, SwimNode};
pub use trajectory::{Trajectory, Waypoint};

use crate::engine::{Purpose, RngStream};
use crate::geometry::Point;
use crate::ids::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobilityError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("line {line}: {tokens} tokens is not a multiple of the group size {group}")]
    MalformedLine {
        line: usize,
        tokens: usize,
        group: usize,
    },
    #[error("line {line}, token {token}: waypoint time does not increase")]
    NonMonotoneTime { line: usize, token: usize },
    #[error("line {line}, token {token}: {text:?} is not a finite number")]
    NonNumericToken {
        line: usize,
        token: usize,
        text: String,
    },
    #[error("trajectory has no waypoints")]
    EmptyTrajectory,
    #[error("invalid mobility configuration: {0}")]
    InvalidConfig(String),
}

/// Movement of every node in a run, queried by the link layer.
#[derive(Debug, Clone)]
pub struct Mobility {
    trajectories: Vec<Trajectory<f64>>,
    cursors: Vec<usize>,
    max_speeds: Vec<f64>,
}

impl Mobility {
    pub fn new(trajectories: Vec<Trajectory<f64>>) -> Self {
        let cursors = vec![0; trajectories.len()];
        let max_speeds = trajectories
            .iter()
            .map(|tr| tr.leg_speeds().fold(0.0, f64::max))
            .collect();
        Self {
            trajectories,
            cursors,
            max_speeds,
        }
    }

    pub fn stationary(points: &[Point<f64>]) -> Self {
        Self::new(points.iter().map(|p| Trajectory::stationary(*p)).collect())
    }

    /// Independent RWP trajectories, node `i` drawing from mobility substream `i`.
    pub fn random_waypoint(
        cfg: &RwpConfig<f64>,
        node_count: usize,
        horizon: f64,
        seed: u64,
    ) -> Result<Self, MobilityError> {
        let trajectories = (0..node_count)
            .map(|i| {
                let mut rng = RngStream::indexed(seed, Purpose::Mobility, i as u32);
                rwp_generate(cfg, horizon, &mut rng)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self::new(trajectories))
    }

    pub fn swim(
        cfg: &SwimConfig,
        node_count: usize,
        horizon: f64,
        seed: u64,
    ) -> Result<Self, MobilityError> {
        Ok(Self::new(swim_generate_all(
            cfg, node_count, horizon, seed,
        )?))
    }

    pub fn node_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn trajectories(&self) -> &[Trajectory<f64>] {
        &self.trajectories
    }

    /// Fastest leg of `node`'s trajectory, in m/s.
    pub fn max_speed(&self, node: NodeId) -> f64 {
        self.max_speeds[node.index()]
    }

    pub fn position_at(&self, node: NodeId, t: f64) -> Result<Point<f64>, MobilityError> {
        self.trajectories
            .get(node.index())
            .map(|tr| tr.position_at(t))
            .ok_or(MobilityError::UnknownNode(node))
    }

    /// Cursor-accelerated lookup for forward-moving simulation time.
    pub(crate) fn position_now(&mut self, node: usize, t: f64) -> Point<f64> {
        self.trajectories[node].position_at_from(t, &mut self.cursors[node])
    }
}
