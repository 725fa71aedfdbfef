//! Organic Data Dissemination, reduced form.
//!
//! Only two ideas are modeled: a node measures how much its neighborhood
//! changed, and a large change pushes the most popular data while a small one
//! pushes a random item. The concrete rules are this crate's interpretation:
//!
//! * significance `s = (|arrived| + |left|) / max(1, |prev ∪ current|)`;
//! * popularity of an item is the number of times this node received it
//!   (duplicates included);
//! * `s >= threshold` broadcasts the `top_k` most popular cached items (ties by
//!   id), otherwise one uniformly random cached item.

use std::collections::{BTreeSet, HashMap};

use super::{Cache, DataItem, ForwardingProtocol, NodeCtx, Outgoing};
use crate::engine::{Layer, Message, RngStream};
use crate::ids::{DataId, NodeId};
use crate::link::{Dest, NeighborChange};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct OddState {
    pub prev_neighbors: BTreeSet<NodeId>,
    pub popularity: HashMap<DataId, u64>,
    pub significance_threshold: f64,
    pub top_k: usize,
}

impl OddState {
    pub fn new(significance_threshold: f64, top_k: usize) -> Self {
        Self {
            prev_neighbors: BTreeSet::new(),
            popularity: HashMap::new(),
            significance_threshold,
            top_k,
        }
    }

    pub fn record_receipt(&mut self, id: &DataId) {
        *self.popularity.entry(id.clone()).or_insert(0) += 1;
    }

    pub fn popularity_of(&self, id: &DataId) -> u64 {
        self.popularity.get(id).copied().unwrap_or(0)
    }
}

impl Default for OddState {
    fn default() -> Self {
        Self::new(DEFAULT_THRESHOLD, DEFAULT_TOP_K)
    }
}

pub fn significance(
    prev: &BTreeSet<NodeId>,
    arrived: &[NodeId],
    left: &[NodeId],
    current: &[NodeId],
) -> f64 {
    let union = prev
        .iter()
        .chain(current.iter())
        .collect::<BTreeSet<_>>()
        .len();
    (arrived.len() + left.len()) as f64 / union.max(1) as f64
}

/// Items to broadcast after a neighborhood change; updates `prev_neighbors`.
///
/// Nothing is sent when the new neighborhood is empty. Items inserted at `now`
/// are not eligible.
pub fn odd_on_neighborhood_change(
    state: &mut OddState,
    arrived: &[NodeId],
    left: &[NodeId],
    current: &[NodeId],
    cache: &Cache,
    now: f64,
    rng: &mut RngStream,
) -> Vec<DataItem> {
    let s = significance(&state.prev_neighbors, arrived, left, current);
    state.prev_neighbors = current.iter().copied().collect();
    if current.is_empty() {
        return Vec::new();
    }
    let mut eligible: Vec<&DataItem> = cache
        .entries()
        .filter(|e| e.inserted_at < now)
        .map(|e| &e.item)
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }
    if s >= state.significance_threshold {
        eligible.sort_by(|a, b| {
            state
                .popularity_of(&b.id)
                .cmp(&state.popularity_of(&a.id))
                .then_with(|| a.id.cmp(&b.id))
        });
        eligible.into_iter().take(state.top_k).cloned().collect()
    } else {
        vec![eligible[rng.below(eligible.len())].clone()]
    }
}

#[derive(Debug, Clone, Default)]
pub struct Odd {
    pub state: OddState,
}

impl Odd {
    pub fn new(threshold: f64, top_k: usize) -> Self {
        Self {
            state: OddState::new(threshold, top_k),
        }
    }
}

impl ForwardingProtocol for Odd {
    fn name(&self) -> &'static str {
        "odd"
    }

    fn on_neighbors(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        change: &NeighborChange,
    ) -> Vec<Outgoing> {
        odd_on_neighborhood_change(
            &mut self.state,
            &change.arrived,
            &change.left,
            &change.current,
            cache,
            ctx.now,
            ctx.rng,
        )
        .into_iter()
        .map(|item| Outgoing {
            msg: Message::data(item, ctx.node, Layer::Link),
            dest: Dest::Broadcast,
        })
        .collect()
    }

    fn on_data(
        &mut self,
        _: &mut NodeCtx<'_>,
        _: &Cache,
        _: NodeId,
        item: &DataItem,
        _: bool,
    ) -> Vec<Outgoing> {
        self.state.record_receipt(&item.id);
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Purpose;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    fn cache_with(ids: &[&str]) -> Cache {
        let mut c = Cache::new(1_000);
        for id in ids {
            c.insert(
                DataItem {
                    id: DataId::new(id),
                    origin: NodeId(0),
                    created_at: 0.0,
                    size: 1,
                    destination: None,
                    payload_tag: 0,
                },
                0.0,
            )
            .unwrap();
        }
        c
    }

    #[test]
    fn significance_of_swap() {
        let prev: BTreeSet<NodeId> = ids(&[1, 2]).into_iter().collect();
        let s = significance(&prev, &ids(&[3]), &ids(&[1]), &ids(&[2, 3]));
        assert!((s - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unchanged_neighborhood_takes_random_branch() {
        let mut st = OddState::new(0.5, 2);
        st.prev_neighbors = ids(&[1]).into_iter().collect();
        assert_eq!(significance(&st.prev_neighbors, &[], &[], &ids(&[1])), 0.0);
        let c = cache_with(&["d1", "d2", "d3"]);
        let mut rng = RngStream::new(1, Purpose::Protocol);
        let out = odd_on_neighborhood_change(&mut st, &[], &[], &ids(&[1]), &c, 1.0, &mut rng);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn significant_change_sends_top_k() {
        let mut st = OddState::new(0.5, 2);
        st.prev_neighbors = ids(&[1, 2]).into_iter().collect();
        for (id, n) in [("d1", 5), ("d2", 3), ("d3", 1)] {
            for _ in 0..n {
                st.record_receipt(&DataId::new(id));
            }
        }
        let c = cache_with(&["d3", "d2", "d1"]);
        let mut rng = RngStream::new(1, Purpose::Protocol);
        let out = odd_on_neighborhood_change(
            &mut st,
            &ids(&[3]),
            &ids(&[1]),
            &ids(&[2, 3]),
            &c,
            1.0,
            &mut rng,
        );
        let got: Vec<&str> = out.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(got, vec!["d1", "d2"]);
        assert_eq!(st.prev_neighbors, ids(&[2, 3]).into_iter().collect());
    }

    #[test]
    fn popularity_ties_break_by_id() {
        let mut st = OddState::new(0.0, 2);
        let c = cache_with(&["b", "c", "a"]);
        let mut rng = RngStream::new(1, Purpose::Protocol);
        let out =
            odd_on_neighborhood_change(&mut st, &ids(&[4]), &[], &ids(&[4]), &c, 1.0, &mut rng);
        let got: Vec<&str> = out.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(got, vec!["a", "b"]);
    }

    #[test]
    fn empty_neighborhood_sends_nothing() {
        let mut st = OddState::new(0.0, 2);
        st.prev_neighbors = ids(&[4]).into_iter().collect();
        let c = cache_with(&["a"]);
        let mut rng = RngStream::new(1, Purpose::Protocol);
        assert!(
            odd_on_neighborhood_change(&mut st, &[], &ids(&[4]), &[], &c, 1.0, &mut rng).is_empty()
        );
        assert!(st.prev_neighbors.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn significance_in_unit_interval(
            prev in proptest::collection::btree_set(0u32..12, 0..12),
            current in proptest::collection::btree_set(0u32..12, 0..12),
        ) {
            let prev: BTreeSet<NodeId> = prev.into_iter().map(NodeId).collect();
            let current: BTreeSet<NodeId> = current.into_iter().map(NodeId).collect();
            let change = NeighborChange::between(&prev, &current);
            let s = significance(&prev, &change.arrived, &change.left, &change.current);
            proptest::prop_assert!((0.0..=1.0).contains(&s));
            proptest::prop_assert_eq!(s == 0.0, prev == current);
        }
    }
}
