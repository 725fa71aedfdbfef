//! Link layer: unit-disk connectivity, beacon-driven neighbor discovery and
//! a per-node FIFO transmit queue with bandwidth and fixed-delay service.
//!
//! Connectivity is sampled at beacon ticks and the range check for a frame
//! happens when its transmission completes; a receiver that drifted out of
//! range by then loses the frame.

mod neighborhood;
mod udg;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use neighborhood::{Contact, ContactEdge, ContactTracker, NeighborChange};
pub use udg::{in_range, neighbors_of, udg_neighbors, Neighborhood};

use crate::engine::Message;
use crate::ids::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// Meters.
    pub range: f64,
    /// Bytes per second.
    pub bandwidth: f64,
    /// Seconds added to every transmission.
    pub fixed_delay: f64,
    /// Seconds between neighbor evaluations of one node.
    pub beacon_interval: f64,
    /// Frames, including the one in service.
    pub queue_capacity: usize,
}

impl Default for LinkConfig {
    // Bluetooth-like
    fn default() -> Self {
        Self {
            range: 30.0,
            bandwidth: 125_000.0,
            fixed_delay: 0.005,
            beacon_interval: 1.0,
            queue_capacity: 100,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), LinkError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.range) {
            return Err(LinkError::InvalidConfig("range"));
        }
        if !positive(self.bandwidth) {
            return Err(LinkError::InvalidConfig("bandwidth"));
        }
        if !positive(self.fixed_delay) {
            return Err(LinkError::InvalidConfig("fixed_delay"));
        }
        if !positive(self.beacon_interval) {
            return Err(LinkError::InvalidConfig("beacon_interval"));
        }
        if self.queue_capacity == 0 {
            return Err(LinkError::InvalidConfig("queue_capacity"));
        }
        Ok(())
    }

    /// Time a frame of `size` bytes occupies the sender once dequeued.
    pub fn service_time(&self, size: u64) -> f64 {
        size as f64 / self.bandwidth + self.fixed_delay
    }

    /// Offset of `node`'s first beacon; spreads nodes evenly over one interval.
    pub fn beacon_phase(&self, node: NodeId, node_count: usize) -> f64 {
        self.beacon_interval * node.index() as f64 / node_count.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinkError {
    #[error("transmit queue of node {0} is full")]
    QueueFull(NodeId),
    #[error("link parameter `{0}` must be strictly positive")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dest {
    Unicast(NodeId),
    Broadcast,
}

/// Which pairs can hear each other.
#[derive(Debug, Clone, PartialEq)]
pub enum Connectivity {
    /// Unit disk graph over the mobility positions with `LinkConfig::range`.
    UnitDisk,
    /// A fixed undirected graph, ignoring positions.
    Fixed(Vec<BTreeSet<NodeId>>),
}

impl Connectivity {
    /// Builds a fixed topology from an edge list.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![BTreeSet::new(); node_count];
        for &(a, b) in edges {
            if a != b {
                adj[a as usize].insert(NodeId(b));
                adj[b as usize].insert(NodeId(a));
            }
        }
        Connectivity::Fixed(adj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub msg: Message,
    pub dest: Dest,
}

/// FIFO transmit queue of one node. The head frame is the one in service.
#[derive(Debug, Clone)]
pub struct TransmitQueue {
    capacity: usize,
    frames: VecDeque<Frame>,
}

impl TransmitQueue {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            frames: VecDeque::new(),
        }
    }

    /// Appends `frame`. Returns `true` when the queue was idle, i.e. the
    /// caller must start servicing it now.
    pub fn push(&mut self, owner: NodeId, frame: Frame) -> Result<bool, LinkError> {
        if self.frames.len() >= self.capacity {
            return Err(LinkError::QueueFull(owner));
        }
        self.frames.push_back(frame);
        Ok(self.frames.len() == 1)
    }

    pub fn head(&self) -> Option<&Frame> {
        self.frames.front()
    }

    pub fn pop(&mut self) -> Option<Frame> {
        self.frames.pop_front()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-run frame accounting.
///
/// Every frame offered to a queue ends up in exactly one bucket; frames still
/// queued when the run stops are counted in `unfinished`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStats {
    pub offered: u64,
    pub delivered: u64,
    pub dropped_out_of_range: u64,
    pub dropped_queue_full: u64,
    pub unfinished: u64,
}

impl LinkStats {
    pub fn is_conserved(&self) -> bool {
        self.offered
            == self.delivered
                + self.dropped_out_of_range
                + self.dropped_queue_full
                + self.unfinished
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Layer, Payload};
    use crate::ids::DataId;

    #[test]
    fn service_time_formula() {
        let cfg = LinkConfig {
            bandwidth: 100_000.0,
            fixed_delay: 0.01,
            ..LinkConfig::default()
        };
        assert!((cfg.service_time(1000) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn queue_capacity_enforced() {
        let mut q = TransmitQueue::new(2);
        let frame = Frame {
            msg: Message::control(
                NodeId(0),
                None,
                Payload::Request(DataId::new("x")),
                Layer::Link,
            ),
            dest: Dest::Broadcast,
        };
        assert!(q.push(NodeId(0), frame.clone()).unwrap());
        assert!(!q.push(NodeId(0), frame.clone()).unwrap());
        assert_eq!(
            q.push(NodeId(0), frame),
            Err(LinkError::QueueFull(NodeId(0)))
        );
    }

    #[test]
    fn defaults_are_valid_and_phases_spread() {
        let cfg = LinkConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.beacon_phase(NodeId(0), 4), 0.0);
        assert_eq!(cfg.beacon_phase(NodeId(2), 4), 0.5);
        let bad = LinkConfig {
            queue_capacity: 0,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
