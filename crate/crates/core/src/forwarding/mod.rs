//! Opportunistic forwarding: the store-and-forward cache and the
//! dissemination protocols plugged on top of it.

mod cache;
mod epidemic;
mod odd;
mod rrs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_insert, Cache, CacheEntry, EvictionPolicy, Fifo, InsertOutcome};
pub use epidemic::{epidemic_on_contact, missing, Epidemic, EpidemicStats};
pub use odd::{
    odd_on_neighborhood_change, significance, Odd, OddState, DEFAULT_THRESHOLD, DEFAULT_TOP_K,
};
pub use rrs::{rrs_tick, Rrs};

use crate::engine::{Message, Payload, RngStream};
use crate::ids::{DataId, NodeId};
use crate::link::{Dest, NeighborChange};

/// A unit of application data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataItem {
    pub id: DataId,
    pub origin: NodeId,
    pub created_at: f64,
    /// Bytes, always positive.
    pub size: u64,
    /// `None` for destination-less data.
    pub destination: Option<NodeId>,
    pub payload_tag: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForwardingError {
    #[error("item {id} of {size} bytes exceeds cache capacity {capacity}")]
    ItemTooLarge {
        id: DataId,
        size: u64,
        capacity: u64,
    },
    #[error("anti-entropy session with node {0} aborted by contact loss")]
    SessionAborted(NodeId),
}

/// What a protocol handler can see of its node.
pub struct NodeCtx<'a> {
    pub node: NodeId,
    pub now: f64,
    pub rng: &'a mut RngStream,
}

/// A message a protocol wants to hand down the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing {
    pub msg: Message,
    pub dest: Dest,
}

/// A dissemination protocol. The shared cache is owned by the forwarding
/// layer; protocols only read it and decide what to send.
pub trait ForwardingProtocol: std::fmt::Debug + Send {
    fn name(&self) -> &'static str;

    /// Period of [`on_timer`](Self::on_timer), if the protocol uses one.
    fn timer_interval(&self) -> Option<f64> {
        None
    }

    fn on_neighbors(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        change: &NeighborChange,
    ) -> Vec<Outgoing>;

    fn on_timer(
        &mut self,
        _ctx: &mut NodeCtx<'_>,
        _cache: &Cache,
        _neighbors: &[NodeId],
    ) -> Vec<Outgoing> {
        Vec::new()
    }

    /// Non-data messages addressed to this node.
    fn on_control(
        &mut self,
        _ctx: &mut NodeCtx<'_>,
        _cache: &Cache,
        _from: NodeId,
        _payload: &Payload,
    ) -> Vec<Outgoing> {
        Vec::new()
    }

    /// Called after the layer has tried to cache a received item.
    fn on_data(
        &mut self,
        _ctx: &mut NodeCtx<'_>,
        _cache: &Cache,
        _from: NodeId,
        _item: &DataItem,
        _is_new: bool,
    ) -> Vec<Outgoing> {
        Vec::new()
    }

    /// Called after an item generated on this node entered the cache.
    fn on_local_item(
        &mut self,
        _ctx: &mut NodeCtx<'_>,
        _cache: &Cache,
        _item: &DataItem,
    ) -> Vec<Outgoing> {
        Vec::new()
    }
}

/// Protocol selection and parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProtocolConfig {
    Epidemic,
    Rrs { interval: f64 },
    Odd { threshold: f64, top_k: usize },
}

impl ProtocolConfig {
    pub fn build(&self) -> Box<dyn ForwardingProtocol> {
        match *self {
            ProtocolConfig::Epidemic => Box::new(Epidemic::new()),
            ProtocolConfig::Rrs { interval } => Box::new(Rrs::new(interval)),
            ProtocolConfig::Odd { threshold, top_k } => Box::new(Odd::new(threshold, top_k)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolConfig::Epidemic => "epidemic",
            ProtocolConfig::Rrs { .. } => "rrs",
            ProtocolConfig::Odd { .. } => "odd",
        }
    }

    pub fn is_unicast(&self) -> bool {
        matches!(self, ProtocolConfig::Epidemic)
    }
}

/// Forwarding layer of one node: the cache, the protocol, and the node's
/// latest neighbor set as reported by the link layer.
#[derive(Debug)]
pub struct ForwardingLayer {
    pub cache: Cache,
    pub protocol: Box<dyn ForwardingProtocol>,
    pub neighbors: Vec<NodeId>,
}

impl ForwardingLayer {
    pub fn new(cache: Cache, protocol: Box<dyn ForwardingProtocol>) -> Self {
        Self {
            cache,
            protocol,
            neighbors: Vec::new(),
        }
    }
}
