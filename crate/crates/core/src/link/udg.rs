//! Unit-disk connectivity.

use std::collections::HashMap;

use crate::geometry::Point;
use crate::ids::NodeId;
use crate::num::Scalar;

/// In-range sets for every node at one instant, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Neighborhood {
    pub sets: Vec<Vec<NodeId>>,
}

impl Neighborhood {
    pub fn of(&self, node: NodeId) -> &[NodeId] {
        &self.sets[node.index()]
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.sets[a.index()].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.sets.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// `true` iff two points are within `range` (inclusive).
pub fn in_range<T: Scalar>(a: &Point<T>, b: &Point<T>, range: T) -> bool {
    a.distance(b) <= range
}

/// Adjacency of the unit disk graph over `positions`.
///
/// Buckets points into a uniform grid slightly coarser than `range` and only
/// compares points in adjacent buckets.
pub fn udg_neighbors<T: Scalar>(positions: &[Point<T>], range: T) -> Neighborhood {
    let n = positions.len();
    let mut sets = vec![Vec::new(); n];
    if n == 0 || range.is_nan() || range < T::zero() {
        return Neighborhood { sets };
    }
    if range == T::zero() || !range.is_finite() {
        for i in 0..n {
            for j in (i + 1)..n {
                if in_range(&positions[i], &positions[j], range) {
                    sets[i].push(NodeId::from_index(j));
                    sets[j].push(NodeId::from_index(i));
                }
            }
        }
        return Neighborhood { sets };
    }

    let cell = range * T::of(1.0 + 1e-6);
    let key = |p: &Point<T>| -> (i64, i64, i64) {
        let f = |v: T| (v / cell).floor().to_i64().unwrap_or(i64::MAX);
        (f(p.x), f(p.y), f(p.z))
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy, cz) = key(p);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let k = (
                        cx.saturating_add(dx),
                        cy.saturating_add(dy),
                        cz.saturating_add(dz),
                    );
                    if let Some(bucket) = grid.get(&k) {
                        for &j in bucket {
                            if j != i && in_range(p, &positions[j], range) {
                                sets[i].push(NodeId::from_index(j));
                            }
                        }
                    }
                }
            }
        }
        sets[i].sort_unstable();
    }
    Neighborhood { sets }
}

/// Nodes within `range` of `node`, ascending, never including `node` itself.
pub fn neighbors_of<T: Scalar>(positions: &[Point<T>], node: usize, range: T) -> Vec<NodeId> {
    let me = &positions[node];
    positions
        .iter()
        .enumerate()
        .filter(|&(j, p)| j != node && in_range(me, p, range))
        .map(|(j, _)| NodeId::from_index(j))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Purpose, RngStream};
    use proptest::prelude::*;

    #[test]
    fn boundary_is_inclusive() {
        let p = [Point::planar(0.0, 0.0), Point::planar(0.0, 30.0)];
        assert!(udg_neighbors(&p, 30.0).contains(NodeId(0), NodeId(1)));
        let q = [Point::planar(0.0, 0.0), Point::planar(0.0, 30.01)];
        assert!(!udg_neighbors(&q, 30.0).contains(NodeId(0), NodeId(1)));
    }

    #[test]
    fn matches_all_pairs_scan() {
        let mut rng = RngStream::new(17, Purpose::Mobility);
        let pts: Vec<Point<f64>> = (0..100)
            .map(|_| Point::planar(rng.unit() * 500.0, rng.unit() * 500.0))
            .collect();
        let nb = udg_neighbors(&pts, 60.0);
        for i in 0..pts.len() {
            let mut brute = Vec::new();
            for j in 0..pts.len() {
                if i != j {
                    let dx = pts[i].x - pts[j].x;
                    let dy = pts[i].y - pts[j].y;
                    if (dx * dx + dy * dy).sqrt() <= 60.0 {
                        brute.push(NodeId::from_index(j));
                    }
                }
            }
            assert_eq!(nb.sets[i], brute);
            assert_eq!(neighbors_of(&pts, i, 60.0), brute);
        }
    }

    #[test]
    fn zero_range_only_links_coincident_points() {
        let p = [
            Point::planar(1.0f32, 1.0),
            Point::planar(1.0, 1.0),
            Point::planar(2.0, 1.0),
        ];
        let nb = udg_neighbors(&p, 0.0);
        assert_eq!(nb.sets[0], vec![NodeId(1)]);
        assert!(nb.sets[2].is_empty());
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric_and_irreflexive(
            pts in prop::collection::vec((-200f64..200.0, -200f64..200.0, -5f64..5.0), 0..60),
            range in 0.0f64..120.0,
        ) {
            let pts: Vec<Point<f64>> = pts.into_iter().map(|(x, y, z)| Point::new(x, y, z)).collect();
            let nb = udg_neighbors(&pts, range);
            for (i, set) in nb.sets.iter().enumerate() {
                let me = NodeId::from_index(i);
                prop_assert!(!set.contains(&me));
                for &j in set {
                    prop_assert!(nb.contains(j, me));
                }
            }
        }
    }
}
