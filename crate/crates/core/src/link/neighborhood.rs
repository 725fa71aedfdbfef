//! Neighbor-set deltas and contact bookkeeping.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ids::NodeId;

/// Upward notification produced by a beacon whose neighbor set changed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborChange {
    pub arrived: Vec<NodeId>,
    pub left: Vec<NodeId>,
    pub current: Vec<NodeId>,
}

impl NeighborChange {
    pub fn between(prev: &BTreeSet<NodeId>, next: &BTreeSet<NodeId>) -> Self {
        Self {
            arrived: next.difference(prev).copied().collect(),
            left: prev.difference(next).copied().collect(),
            current: next.iter().copied().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.arrived.is_empty() && self.left.is_empty()
    }
}

/// A maximal interval during which two nodes were in contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    /// Smaller node id of the pair.
    pub a: NodeId,
    pub b: NodeId,
    pub start: f64,
    pub end: f64,
}

impl Contact {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactEdge {
    Open(NodeId, NodeId),
    Close(NodeId, NodeId),
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Tracks each node's last beacon view and the pairs currently in contact.
///
/// A pair is in contact while at least one of the two nodes has the other in
/// its latest view, so contacts of a pair never overlap and each one spans
/// from the first detection to the last loss.
#[derive(Debug, Clone, Default)]
pub struct ContactTracker {
    views: Vec<BTreeSet<NodeId>>,
    open: BTreeMap<(NodeId, NodeId), f64>,
}

impl ContactTracker {
    pub fn new(node_count: usize) -> Self {
        Self {
            views: vec![BTreeSet::new(); node_count],
            open: BTreeMap::new(),
        }
    }

    pub fn view(&self, node: NodeId) -> &BTreeSet<NodeId> {
        &self.views[node.index()]
    }

    /// Replaces `node`'s view and reports the delta plus contact edges.
    pub fn update(
        &mut self,
        node: NodeId,
        next: BTreeSet<NodeId>,
        t: f64,
    ) -> (NeighborChange, Vec<ContactEdge>) {
        let change = NeighborChange::between(&self.views[node.index()], &next);
        self.views[node.index()] = next;
        let mut edges = Vec::new();
        for &peer in &change.arrived {
            let key = ordered(node, peer);
            if let std::collections::btree_map::Entry::Vacant(e) = self.open.entry(key) {
                e.insert(t);
                edges.push(ContactEdge::Open(key.0, key.1));
            }
        }
        for &peer in &change.left {
            let key = ordered(node, peer);
            if !self.views[peer.index()].contains(&node) && self.open.remove(&key).is_some() {
                edges.push(ContactEdge::Close(key.0, key.1));
            }
        }
        (change, edges)
    }

    /// Pairs still in contact with their opening times.
    pub fn open_contacts(&self) -> impl Iterator<Item = ((NodeId, NodeId), f64)> + '_ {
        self.open.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_open(&self, a: NodeId, b: NodeId) -> bool {
        self.open.contains_key(&ordered(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u32]) -> BTreeSet<NodeId> {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn unchanged_set_is_empty_delta() {
        let d = NeighborChange::between(&set(&[1]), &set(&[1]));
        assert!(d.is_empty());
    }

    #[test]
    fn delta_is_set_difference() {
        let d = NeighborChange::between(&set(&[1, 2]), &set(&[2, 3]));
        assert_eq!(d.arrived, vec![NodeId(3)]);
        assert_eq!(d.left, vec![NodeId(1)]);
        assert_eq!(d.current, vec![NodeId(2), NodeId(3)]);
    }

    #[test]
    fn contact_closes_only_when_both_views_drop() {
        let mut tr = ContactTracker::new(2);
        let (_, e) = tr.update(NodeId(0), set(&[1]), 1.0);
        assert_eq!(e, vec![ContactEdge::Open(NodeId(0), NodeId(1))]);
        let (_, e) = tr.update(NodeId(1), set(&[0]), 1.5);
        assert!(e.is_empty());
        let (_, e) = tr.update(NodeId(0), set(&[]), 9.0);
        assert!(e.is_empty());
        assert!(tr.is_open(NodeId(1), NodeId(0)));
        let (_, e) = tr.update(NodeId(1), set(&[]), 9.5);
        assert_eq!(e, vec![ContactEdge::Close(NodeId(0), NodeId(1))]);
        assert_eq!(tr.open_contacts().count(), 0);
    }
}
