//! Simplified Small Worlds in Motion.
//!
//! Each node has a uniform random home point. The area is divided into square
//! cells; a node picks its next destination cell with weight
//!
//! ```text
//! alpha * decay(home, cell) + (1 - alpha) * seen(cell) / (n - 1)
//! ```
//!
//! where `decay(d) = 1 / (1 + d / home_radius)^2` and `seen(cell)` counts the
//! distinct other nodes this node has observed in that cell on its earlier
//! visits. The destination is a uniform point inside the chosen cell's spot,
//! a square of side `spot_size` at the cell center (the whole cell when
//! `spot_size >= cell_size`); the node moves there at `speed` and pauses for
//! an exponential time.
//!
//! This is a reduced form of SWIM: it keeps the home attraction and the
//! popularity feedback that produce clustering, nothing else. Because the
//! popularity of a cell depends on where the *other* nodes are, trajectories
//! are produced jointly in time order by [`swim_generate_all`].

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::{MobilityError, Trajectory, Waypoint};
use crate::engine::{Distribution, Purpose, RngStream};
use crate::geometry::Point;
use crate::ids::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwimConfig {
    pub width: f64,
    pub height: f64,
    pub home_radius: f64,
    pub alpha: f64,
    pub cell_size: f64,
    /// Side of the square around each cell center where destinations fall.
    pub spot_size: f64,
    pub speed: f64,
    pub pause_mean: f64,
}

impl SwimConfig {
    /// Defaults that make nodes gather at a few popular spots: weak home
    /// attraction, 500 m cells with 20 m gathering spots, walking speed and
    /// half-hour pauses.
    pub fn clustered(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            home_radius: 500.0,
            alpha: 0.1,
            cell_size: 500.0,
            spot_size: 20.0,
            speed: 1.5,
            pause_mean: 1800.0,
        }
    }

    pub fn validate(&self) -> Result<(), MobilityError> {
        let bad = |msg: &str| Err(MobilityError::InvalidConfig(msg.to_string()));
        if !(self.width > 0.0 && self.height > 0.0) {
            return bad("swim area dimensions must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("swim alpha must lie in [0, 1]");
        }
        if !(self.cell_size > 0.0) || CellGrid::new(self).len() < 4 {
            return bad("swim cell_size must divide the area into at least 4 cells");
        }
        if !(self.spot_size > 0.0) {
            return bad("swim spot_size must be positive");
        }
        if !(self.home_radius > 0.0) {
            return bad("swim home_radius must be positive");
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return bad("swim speed must be positive");
        }
        if !(self.pause_mean >= 0.0 && self.pause_mean.is_finite()) {
            return bad("swim pause_mean must be >= 0");
        }
        Ok(())
    }
}

/// Square cells covering the area; edge cells may be partial.
#[derive(Debug, Clone, Copy)]
pub struct CellGrid {
    cols: usize,
    rows: usize,
    size: f64,
    width: f64,
    height: f64,
}

impl CellGrid {
    pub fn new(cfg: &SwimConfig) -> Self {
        let cols = (cfg.width / cfg.cell_size).ceil().max(1.0) as usize;
        let rows = (cfg.height / cfg.cell_size).ceil().max(1.0) as usize;
        Self {
            cols,
            rows,
            size: cfg.cell_size,
            width: cfg.width,
            height: cfg.height,
        }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_of(&self, p: &Point<f64>) -> usize {
        let c = ((p.x / self.size).floor().max(0.0) as usize).min(self.cols - 1);
        let r = ((p.y / self.size).floor().max(0.0) as usize).min(self.rows - 1);
        r * self.cols + c
    }

    /// `(x0, y0, x1, y1)` of a cell, clipped to the area.
    pub fn bounds(&self, cell: usize) -> (f64, f64, f64, f64) {
        let (r, c) = (cell / self.cols, cell % self.cols);
        let x0 = c as f64 * self.size;
        let y0 = r as f64 * self.size;
        (
            x0,
            y0,
            (x0 + self.size).min(self.width),
            (y0 + self.size).min(self.height),
        )
    }

    /// Bounds of the square of side `spot` centered in `cell`, clipped to it.
    pub fn spot_bounds(&self, cell: usize, spot: f64) -> (f64, f64, f64, f64) {
        let (x0, y0, x1, y1) = self.bounds(cell);
        let c = self.center(cell);
        let h = 0.5 * spot;
        (
            (c.x - h).max(x0),
            (c.y - h).max(y0),
            (c.x + h).min(x1),
            (c.y + h).min(y1),
        )
    }

    pub fn center(&self, cell: usize) -> Point<f64> {
        let (x0, y0, x1, y1) = self.bounds(cell);
        Point::planar(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }
}

/// Destination-choice state of one node.
#[derive(Debug, Clone)]
pub struct SwimNode {
    pub home: Point<f64>,
    /// Distinct other nodes observed per cell.
    pub seen: HashMap<usize, BTreeSet<NodeId>>,
    decay: Vec<f64>,
}

impl SwimNode {
    pub fn new(home: Point<f64>, grid: &CellGrid, cfg: &SwimConfig) -> Self {
        let decay = (0..grid.len())
            .map(|c| {
                let d = home.distance(&grid.center(c));
                1.0 / (1.0 + d / cfg.home_radius).powi(2)
            })
            .collect();
        Self {
            home,
            seen: HashMap::new(),
            decay,
        }
    }

    pub fn popularity(&self, cell: usize) -> usize {
        self.seen.get(&cell).map_or(0, BTreeSet::len)
    }

    /// Unnormalized choice weight of every cell.
    pub fn cell_weights(&self, cfg: &SwimConfig, node_count: usize) -> Vec<f64> {
        let others = node_count.saturating_sub(1).max(1) as f64;
        self.decay
            .iter()
            .enumerate()
            .map(|(c, &d)| cfg.alpha * d + (1.0 - cfg.alpha) * self.popularity(c) as f64 / others)
            .collect()
    }

    /// Draws a destination cell; uniform when every weight is zero.
    pub fn choose_cell(&self, cfg: &SwimConfig, node_count: usize, rng: &mut RngStream) -> usize {
        let weights = self.cell_weights(cfg, node_count);
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return rng.below(weights.len());
        }
        let mut target = rng.unit() * total;
        let mut last_positive = 0;
        for (c, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                if target < *w {
                    return c;
                }
                target -= w;
                last_positive = c;
            }
        }
        last_positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Step {
    // arrival observations sort before departures at the same instant
    Observe,
    Decide,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    t: f64,
    step: Step,
    node: usize,
    seq: u64,
}

impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.step.cmp(&other.step))
            .then(self.seq.cmp(&other.seq))
    }
}

/// Generates SWIM trajectories for `node_count` nodes over `[0, horizon]`.
///
/// Node `i` draws from the mobility substream `i` of `seed`, so regeneration
/// with the same inputs reproduces every trajectory exactly.
pub fn swim_generate_all(
    cfg: &SwimConfig,
    node_count: usize,
    horizon: f64,
    seed: u64,
) -> Result<Vec<Trajectory<f64>>, MobilityError> {
    cfg.validate()?;
    let grid = CellGrid::new(cfg);
    let mut rngs: Vec<RngStream> = (0..node_count)
        .map(|i| RngStream::indexed(seed, Purpose::Mobility, i as u32))
        .collect();
    let mut nodes: Vec<SwimNode> = rngs
        .iter_mut()
        .map(|rng| {
            let home = Point::planar(rng.unit() * cfg.width, rng.unit() * cfg.height);
            SwimNode::new(home, &grid, cfg)
        })
        .collect();
    let mut wps: Vec<Vec<Waypoint<f64>>> = nodes
        .iter()
        .map(|n| {
            vec![Waypoint {
                t: 0.0,
                pos: n.home,
            }]
        })
        .collect();
    let pause = Distribution::Exponential {
        mean: cfg.pause_mean,
    };

    let mut seq = 0u64;
    let mut queue = BinaryHeap::new();
    let mut push = |queue: &mut BinaryHeap<Reverse<Pending>>, t, step, node| {
        queue.push(Reverse(Pending { t, step, node, seq }));
        seq += 1;
    };
    for i in 0..node_count {
        push(&mut queue, 0.0, Step::Observe, i);
        push(&mut queue, 0.0, Step::Decide, i);
    }

    while let Some(Reverse(p)) = queue.pop() {
        let i = p.node;
        match p.step {
            Step::Observe => {
                // every other node's trajectory is known up to at least p.t
                let here = position_in(&wps[i], p.t);
                let cell = grid.cell_of(&here);
                for (j, other) in wps.iter().enumerate() {
                    if j != i && grid.cell_of(&position_in(other, p.t)) == cell {
                        nodes[i]
                            .seen
                            .entry(cell)
                            .or_default()
                            .insert(NodeId::from_index(j));
                    }
                }
            }
            Step::Decide => {
                if p.t >= horizon {
                    continue;
                }
                let rng = &mut rngs[i];
                let from = wps[i].last().expect("non-empty").pos;
                let (dest, arrive) = loop {
                    let cell = nodes[i].choose_cell(cfg, node_count, rng);
                    let (x0, y0, x1, y1) = grid.spot_bounds(cell, cfg.spot_size);
                    let dest =
                        Point::planar(x0 + (x1 - x0) * rng.unit(), y0 + (y1 - y0) * rng.unit());
                    let arrive = p.t + from.distance(&dest) / cfg.speed;
                    if arrive > p.t {
                        break (dest, arrive);
                    }
                };
                wps[i].push(Waypoint {
                    t: arrive,
                    pos: dest,
                });
                let stay = if cfg.pause_mean > 0.0 {
                    rng.draw(&pause).expect("validated")
                } else {
                    0.0
                };
                let resume = arrive + stay;
                if resume > arrive {
                    wps[i].push(Waypoint {
                        t: resume,
                        pos: dest,
                    });
                }
                push(&mut queue, arrive, Step::Observe, i);
                push(&mut queue, resume.max(arrive), Step::Decide, i);
            }
        }
    }

    wps.into_iter().map(Trajectory::new).collect()
}

fn position_in(wps: &[Waypoint<f64>], t: f64) -> Point<f64> {
    let after = wps.partition_point(|w| w.t <= t);
    if after == 0 {
        return wps[0].pos;
    }
    if after == wps.len() {
        return wps[after - 1].pos;
    }
    let (a, b) = (&wps[after - 1], &wps[after]);
    a.pos.lerp(&b.pos, (t - a.t) / (b.t - a.t))
}
