use std::collections::HashMap;

use crate::engine::RngStream;
use crate::ids::{DataId, NodeId};

/// Which node likes which item; fixed before the run for catalog items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UsefulnessTable {
    node_count: usize,
    liked: HashMap<DataId, Vec<bool>>,
}

impl UsefulnessTable {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            liked: HashMap::new(),
        }
    }

    /// Draws one independent Bernoulli(`p`) label per node for `id`.
    pub fn label(&mut self, id: &DataId, p: f64, rng: &mut RngStream) {
        let labels = (0..self.node_count).map(|_| rng.bernoulli(p)).collect();
        self.liked.insert(id.clone(), labels);
    }

    /// `false` for items that were never labeled.
    pub fn is_liked(&self, node: NodeId, id: &DataId) -> bool {
        self.liked
            .get(id)
            .and_then(|v| v.get(node.index()))
            .copied()
            .unwrap_or(false)
    }

    pub fn item_count(&self) -> usize {
        self.liked.len()
    }

    pub fn liked_fraction(&self) -> f64 {
        let total = self.liked.len() * self.node_count;
        if total == 0 {
            return 0.0;
        }
        let yes: usize = self
            .liked
            .values()
            .map(|v| v.iter().filter(|&&b| b).count())
            .sum();
        yes as f64 / total as f64
    }
}

/// Labels every `(node, item)` pair of a catalog, item by item.
pub fn assign_usefulness(
    nodes: usize,
    catalog: &[DataId],
    p: f64,
    rng: &mut RngStream,
) -> UsefulnessTable {
    let mut table = UsefulnessTable::new(nodes);
    for id in catalog {
        table.label(id, p, rng);
    }
    table
}
