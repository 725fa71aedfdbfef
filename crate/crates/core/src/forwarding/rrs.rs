//! Randomised Rumor Spreading: on every tick, broadcast one random cached item.

use super::{Cache, CacheEntry, ForwardingProtocol, NodeCtx, Outgoing};
use crate::engine::{Layer, Message, RngStream};
use crate::forwarding::DataItem;
use crate::ids::NodeId;
use crate::link::{Dest, NeighborChange};

/// Picks the item to broadcast on a tick, if any.
///
/// Items received at this very instant are not eligible, so a node never
/// rebroadcasts within the tick it received something.
pub fn rrs_tick(
    cache: &Cache,
    neighbors: &[NodeId],
    now: f64,
    rng: &mut RngStream,
) -> Option<DataItem> {
    if neighbors.is_empty() {
        return None;
    }
    let eligible: Vec<&CacheEntry> = cache.entries().filter(|e| e.inserted_at < now).collect();
    if eligible.is_empty() {
        return None;
    }
    Some(eligible[rng.below(eligible.len())].item.clone())
}

#[derive(Debug, Clone)]
pub struct Rrs {
    interval: f64,
}

impl Rrs {
    pub fn new(interval: f64) -> Self {
        Self { interval }
    }
}

impl ForwardingProtocol for Rrs {
    fn name(&self) -> &'static str {
        "rrs"
    }

    fn timer_interval(&self) -> Option<f64> {
        Some(self.interval)
    }

    fn on_neighbors(
        &mut self,
        _: &mut NodeCtx<'_>,
        _: &Cache,
        _: &NeighborChange,
    ) -> Vec<Outgoing> {
        Vec::new()
    }

    fn on_timer(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        neighbors: &[NodeId],
    ) -> Vec<Outgoing> {
        rrs_tick(cache, neighbors, ctx.now, ctx.rng)
            .map(|item| Outgoing {
                msg: Message::data(item, ctx.node, Layer::Link),
                dest: Dest::Broadcast,
            })
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Purpose;
    use crate::ids::DataId;

    fn item(id: &str) -> DataItem {
        DataItem {
            id: DataId::new(id),
            origin: NodeId(0),
            created_at: 0.0,
            size: 10,
            destination: None,
            payload_tag: 0,
        }
    }

    #[test]
    fn empty_cache_sends_nothing() {
        let mut rng = RngStream::new(0, Purpose::Protocol);
        assert!(rrs_tick(&Cache::new(100), &[NodeId(1)], 5.0, &mut rng).is_none());
    }

    #[test]
    fn single_item_always_chosen() {
        let mut rng = RngStream::new(0, Purpose::Protocol);
        let mut c = Cache::new(100);
        c.insert(item("only"), 0.0).unwrap();
        for k in 1..50 {
            let got = rrs_tick(&c, &[NodeId(1)], k as f64, &mut rng).unwrap();
            assert_eq!(got.id.as_str(), "only");
        }
    }

    #[test]
    fn no_neighbors_or_fresh_item_sends_nothing() {
        let mut rng = RngStream::new(0, Purpose::Protocol);
        let mut c = Cache::new(100);
        c.insert(item("x"), 3.0).unwrap();
        assert!(rrs_tick(&c, &[], 4.0, &mut rng).is_none());
        assert!(rrs_tick(&c, &[NodeId(2)], 3.0, &mut rng).is_none());
    }

    #[test]
    fn choice_is_roughly_uniform() {
        let mut rng = RngStream::new(9, Purpose::Protocol);
        let mut c = Cache::new(100);
        for id in ["a", "b", "c", "d"] {
            c.insert(item(id), 0.0).unwrap();
        }
        let mut counts = std::collections::HashMap::new();
        for _ in 0..8000 {
            *counts
                .entry(rrs_tick(&c, &[NodeId(1)], 1.0, &mut rng).unwrap().id)
                .or_insert(0) += 1;
        }
        for v in counts.values() {
            assert!((1800..2200).contains(v), "{counts:?}");
        }
    }
}
