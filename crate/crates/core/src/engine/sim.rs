//! One simulation run: a layer stack per node driven by the event queue.
//!
//! Messages leave a protocol as [`Outgoing`] values, cross the adaptation
//! layer downwards, wait in the sender's transmit queue and, once their
//! service time has elapsed, cross the receivers' adaptation layers upwards.
//! Neighbor changes found by beacons travel up the same way.

use std::collections::{BTreeSet, HashSet};

use super::{
    pass_thru, Direction, EngineError, EventQueue, Layer, Message, PassThru, Payload, Purpose,
    RngStream, SimTime,
};
use crate::application::{AppConfig, AppError, GenerationMode, TrafficGenerator};
use crate::forwarding::{
    Cache, DataItem, ForwardingError, ForwardingLayer, InsertOutcome, NodeCtx, Outgoing,
    ProtocolConfig,
};
use crate::ids::{DataId, NodeId};
use crate::link::{
    in_range, Connectivity, ContactEdge, ContactTracker, Dest, Frame, LinkConfig, LinkError,
    LinkStats, TransmitQueue,
};
use crate::metrics::{DropReason, Ledger, LogEvent};
use crate::mobility::Mobility;

/// Everything a run needs besides the mobility.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub link: LinkConfig,
    pub connectivity: Connectivity,
    pub protocol: ProtocolConfig,
    /// Bytes per node.
    pub cache_capacity: u64,
    /// `None` runs without traffic; items can still be injected.
    pub app: Option<AppConfig>,
    /// Keep every beacon's neighbor set for later inspection.
    pub record_beacons: bool,
}

impl SimConfig {
    pub fn new(seed: u64, protocol: ProtocolConfig, cache_capacity: u64) -> Self {
        Self {
            seed,
            link: LinkConfig::default(),
            connectivity: Connectivity::UnitDisk,
            protocol,
            cache_capacity,
            app: None,
            record_beacons: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Beacon(NodeId),
    ForwardingTimer(NodeId),
    /// Next generation of a per-node process, or of the network-wide one.
    Generate(Option<NodeId>),
    /// A scripted item entering a node's cache.
    Inject(NodeId, DataItem),
    TxComplete(NodeId),
}

/// The neighbor set one node computed at one beacon.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconSnapshot {
    pub t: SimTime,
    pub node: NodeId,
    pub neighbors: Vec<NodeId>,
}

/// Application layer state of one node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AppLayer {
    /// Runs its own generation process.
    pub generating: bool,
    /// Generation stopped after an error (catalog exhausted).
    pub stopped: bool,
}

#[derive(Debug)]
pub struct NodeStack {
    pub node_id: NodeId,
    pub app: AppLayer,
    pub fwd: ForwardingLayer,
    pub adapt: PassThru,
    pub link: TransmitQueue,
    rng: RngStream,
}

#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    mobility: Mobility,
    nodes: Vec<NodeStack>,
    queue: EventQueue<Event>,
    tracker: ContactTracker,
    ledger: Ledger,
    stats: LinkStats,
    generator: Option<TrafficGenerator>,
    delivered: HashSet<(DataId, NodeId)>,
    beacons: Vec<BeaconSnapshot>,
    /// Per ordered pair, the earliest time the two nodes can be in range,
    /// from their last measured distance and top speeds.
    not_before: Vec<f64>,
    finished: bool,
}

fn setup(msg: impl ToString) -> EngineError {
    EngineError::InvalidSetup(msg.to_string())
}

impl Simulation {
    pub fn new(config: SimConfig, mobility: Mobility) -> Result<Self, EngineError> {
        config.link.validate().map_err(setup)?;
        let n = mobility.node_count();
        if let Connectivity::Fixed(adj) = &config.connectivity {
            if adj.len() != n {
                return Err(setup(format!(
                    "fixed topology has {} nodes, mobility has {n}",
                    adj.len()
                )));
            }
        }
        match config.protocol {
            ProtocolConfig::Rrs { interval } if !(interval > 0.0 && interval.is_finite()) => {
                return Err(setup("rrs interval must be positive"))
            }
            ProtocolConfig::Odd { threshold, top_k }
                if !(0.0..=1.0).contains(&threshold) || top_k == 0 =>
            {
                return Err(setup(
                    "odd threshold must lie in [0, 1] and top_k be positive",
                ))
            }
            _ => {}
        }
        if config.cache_capacity == 0 {
            return Err(setup("cache capacity must be positive"));
        }
        let generator = config
            .app
            .clone()
            .map(|app| TrafficGenerator::new(app, n, config.seed))
            .transpose()
            .map_err(setup)?;
        let per_node = generator
            .as_ref()
            .is_some_and(|g| g.config().generation_mode == GenerationMode::PerNode);
        let nodes = (0..n)
            .map(|i| NodeStack {
                node_id: NodeId::from_index(i),
                app: AppLayer {
                    generating: per_node,
                    stopped: false,
                },
                fwd: ForwardingLayer::new(
                    Cache::new(config.cache_capacity),
                    config.protocol.build(),
                ),
                adapt: PassThru,
                link: TransmitQueue::new(config.link.queue_capacity),
                rng: RngStream::indexed(config.seed, Purpose::Protocol, i as u32),
            })
            .collect();
        let mut sim = Self {
            tracker: ContactTracker::new(n),
            ledger: Ledger::new(n),
            stats: LinkStats::default(),
            queue: EventQueue::new(),
            delivered: HashSet::new(),
            beacons: Vec::new(),
            not_before: vec![0.0; n * n],
            finished: false,
            generator,
            nodes,
            mobility,
            config,
        };
        sim.schedule_initial()?;
        Ok(sim)
    }

    fn schedule_initial(&mut self) -> Result<(), EngineError> {
        let n = self.nodes.len();
        let timer = self.config.protocol.build().timer_interval();
        for i in 0..n {
            let node = NodeId::from_index(i);
            let phase = self.config.link.beacon_phase(node, n);
            self.queue.schedule(phase, Event::Beacon(node))?;
            if timer.is_some() {
                self.queue.schedule(phase, Event::ForwardingTimer(node))?;
            }
        }
        if let Some(generator) = self.generator.as_mut() {
            let first = |g: &mut TrafficGenerator| g.next_time(0.0).map_err(setup);
            match generator.config().generation_mode {
                GenerationMode::PerNode => {
                    for i in 0..n {
                        let t = first(generator)?;
                        self.queue
                            .schedule(t, Event::Generate(Some(NodeId::from_index(i))))?;
                    }
                }
                GenerationMode::Network if n > 0 => {
                    let t = first(generator)?;
                    self.queue.schedule(t, Event::Generate(None))?;
                }
                GenerationMode::Network => {}
            }
        }
        Ok(())
    }

    /// Schedules `item` to appear in `node`'s cache at `t`, as if generated there.
    pub fn schedule_injection(
        &mut self,
        t: SimTime,
        node: NodeId,
        item: DataItem,
    ) -> Result<(), EngineError> {
        if node.index() >= self.nodes.len() {
            return Err(setup(format!("no node {node}")));
        }
        self.queue
            .schedule(t, Event::Inject(node, item))
            .map(|_| ())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clock(&self) -> SimTime {
        self.queue.clock()
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeStack] {
        &self.nodes
    }

    pub fn link_stats(&self) -> LinkStats {
        self.stats
    }

    pub fn beacon_snapshots(&self) -> &[BeaconSnapshot] {
        &self.beacons
    }

    pub fn generator(&self) -> Option<&TrafficGenerator> {
        self.generator.as_ref()
    }

    /// Dispatches every event due at or before `t_end`, closes the contacts
    /// still open and hands over the ledger.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<Ledger, EngineError> {
        if self.finished {
            return Err(EngineError::Finished(self.queue.clock()));
        }
        if t_end.is_nan() || t_end < self.queue.clock() {
            return Err(EngineError::SchedulingInPast {
                time: t_end,
                clock: self.queue.clock(),
            });
        }
        while let Some(ev) = self.queue.pop_until(t_end) {
            self.dispatch(ev.time, ev.payload)?;
        }
        self.queue.advance_to(t_end);
        let open: Vec<_> = self.tracker.open_contacts().collect();
        for ((a, b), start) in open {
            if start < t_end {
                self.ledger.push(t_end, LogEvent::ContactClose { a, b });
            }
        }
        self.stats.unfinished = self.nodes.iter().map(|n| n.link.len() as u64).sum();
        self.ledger.t_end = t_end;
        self.finished = true;
        Ok(std::mem::take(&mut self.ledger))
    }

    fn dispatch(&mut self, t: SimTime, event: Event) -> Result<(), EngineError> {
        match event {
            Event::Beacon(n) => {
                self.on_beacon(n, t)?;
                self.queue
                    .schedule(t + self.config.link.beacon_interval, Event::Beacon(n))?;
            }
            Event::ForwardingTimer(n) => {
                let interval = self.nodes[n.index()].fwd.protocol.timer_interval();
                self.on_timer(n, t)?;
                if let Some(dt) = interval {
                    self.queue.schedule(t + dt, Event::ForwardingTimer(n))?;
                }
            }
            Event::Generate(g) => self.on_generate(g, t)?,
            Event::Inject(n, item) => self.originate(n, item, t)?,
            Event::TxComplete(n) => self.on_tx_complete(n, t)?,
        }
        Ok(())
    }

    fn neighbors_at(&mut self, node: NodeId, t: SimTime) -> BTreeSet<NodeId> {
        match &self.config.connectivity {
            Connectivity::Fixed(adj) => adj[node.index()].clone(),
            Connectivity::UnitDisk => {
                let n = self.nodes.len();
                let i = node.index();
                let range = self.config.link.range;
                let here = self.mobility.position_now(i, t);
                let mut out = BTreeSet::new();
                for j in 0..n {
                    if j == i || t < self.not_before[i * n + j] {
                        continue;
                    }
                    let there = self.mobility.position_now(j, t);
                    let d = here.distance(&there);
                    if d <= range {
                        out.insert(NodeId::from_index(j));
                        continue;
                    }
                    // slack covers rounding in the speed estimate
                    let closing = (self.mobility.max_speed(node)
                        + self.mobility.max_speed(NodeId::from_index(j)))
                        * (1.0 + 1e-9);
                    let wait = if closing > 0.0 {
                        (d - range) / closing
                    } else {
                        f64::INFINITY
                    };
                    self.not_before[i * n + j] = t + wait;
                    self.not_before[j * n + i] = t + wait;
                }
                out
            }
        }
    }

    fn reachable(&mut self, a: NodeId, b: NodeId, t: SimTime) -> bool {
        match &self.config.connectivity {
            Connectivity::Fixed(adj) => adj[a.index()].contains(&b),
            Connectivity::UnitDisk => {
                let pa = self.mobility.position_now(a.index(), t);
                let pb = self.mobility.position_now(b.index(), t);
                a != b && in_range(&pa, &pb, self.config.link.range)
            }
        }
    }

    fn on_beacon(&mut self, n: NodeId, t: SimTime) -> Result<(), EngineError> {
        let next = self.neighbors_at(n, t);
        if self.config.record_beacons {
            self.beacons.push(BeaconSnapshot {
                t,
                node: n,
                neighbors: next.iter().copied().collect(),
            });
        }
        let (change, edges) = self.tracker.update(n, next, t);
        for edge in edges {
            let event = match edge {
                ContactEdge::Open(a, b) => LogEvent::ContactOpen { a, b },
                ContactEdge::Close(a, b) => LogEvent::ContactClose { a, b },
            };
            self.ledger.push(t, event);
        }
        if change.is_empty() {
            return Ok(());
        }
        let msg = Message::control(n, Some(n), Payload::Neighbors(change), Layer::Forwarding);
        let msg = self.nodes[n.index()].adapt.relay(msg, Direction::Up)?;
        let Payload::Neighbors(change) = msg.payload else {
            return Err(EngineError::MalformedMessage(
                "neighbor notification lost its payload",
            ));
        };
        let node = &mut self.nodes[n.index()];
        node.fwd.neighbors = change.current.clone();
        let mut ctx = NodeCtx {
            node: n,
            now: t,
            rng: &mut node.rng,
        };
        let out = node
            .fwd
            .protocol
            .on_neighbors(&mut ctx, &node.fwd.cache, &change);
        self.send_all(n, out, t)
    }

    fn on_timer(&mut self, n: NodeId, t: SimTime) -> Result<(), EngineError> {
        let node = &mut self.nodes[n.index()];
        let mut ctx = NodeCtx {
            node: n,
            now: t,
            rng: &mut node.rng,
        };
        let out = node
            .fwd
            .protocol
            .on_timer(&mut ctx, &node.fwd.cache, &node.fwd.neighbors);
        self.send_all(n, out, t)
    }

    fn on_generate(&mut self, g: Option<NodeId>, t: SimTime) -> Result<(), EngineError> {
        let Some(generator) = self.generator.as_mut() else {
            return Ok(());
        };
        let reason = match generator.generate_item(t, g) {
            Ok((item, origin)) => {
                let next = generator.next_time(t).map_err(setup)?;
                self.queue.schedule(next, Event::Generate(g))?;
                return self.originate(origin, item, t);
            }
            Err(AppError::CatalogExhausted) => DropReason::CatalogExhausted,
            Err(AppError::NoValidDestination) => DropReason::NoValidDestination,
            Err(e) => return Err(setup(e)),
        };
        // the process stops for good
        let node = g.unwrap_or(NodeId(0));
        if let Some(stack) = self.nodes.get_mut(node.index()) {
            stack.app.stopped = true;
        }
        self.ledger.push(
            t,
            LogEvent::Dropped {
                node,
                item: None,
                reason,
            },
        );
        Ok(())
    }

    /// An item created at node `n`.
    fn originate(&mut self, n: NodeId, item: DataItem, t: SimTime) -> Result<(), EngineError> {
        self.ledger.push(
            t,
            LogEvent::Generated {
                item: item.id.clone(),
                origin: n,
                destination: item.destination,
                size: item.size,
            },
        );
        let msg = Message::data(item, n, Layer::Forwarding);
        msg.validate()?;
        let Payload::Data(item) = msg.payload else {
            unreachable!("data constructor builds a data payload")
        };
        let node = &mut self.nodes[n.index()];
        match node.fwd.cache.insert(item.clone(), t) {
            Err(ForwardingError::ItemTooLarge { id, .. }) => {
                self.ledger.push(
                    t,
                    LogEvent::Dropped {
                        node: n,
                        item: Some(id),
                        reason: DropReason::ItemTooLarge,
                    },
                );
                Ok(())
            }
            Err(e) => Err(setup(e)),
            Ok(InsertOutcome::Duplicate) => Ok(()),
            Ok(InsertOutcome::Inserted { evicted }) => {
                for e in evicted {
                    self.ledger.push(
                        t,
                        LogEvent::Evicted {
                            node: n,
                            item: e.id,
                        },
                    );
                }
                let node = &mut self.nodes[n.index()];
                let mut ctx = NodeCtx {
                    node: n,
                    now: t,
                    rng: &mut node.rng,
                };
                let out = node
                    .fwd
                    .protocol
                    .on_local_item(&mut ctx, &node.fwd.cache, &item);
                self.send_all(n, out, t)
            }
        }
    }

    fn send_all(&mut self, n: NodeId, out: Vec<Outgoing>, t: SimTime) -> Result<(), EngineError> {
        for o in out {
            let msg = self.nodes[n.index()].adapt.relay(o.msg, Direction::Down)?;
            let item = msg.data_id.clone();
            let size = msg.size;
            self.stats.offered += 1;
            match self.nodes[n.index()]
                .link
                .push(n, Frame { msg, dest: o.dest })
            {
                Ok(true) => {
                    let done = t + self.config.link.service_time(size);
                    self.queue.schedule(done, Event::TxComplete(n))?;
                }
                Ok(false) => {}
                Err(LinkError::QueueFull(_)) => {
                    self.stats.dropped_queue_full += 1;
                    self.ledger.push(
                        t,
                        LogEvent::Dropped {
                            node: n,
                            item,
                            reason: DropReason::QueueFull,
                        },
                    );
                }
                Err(e) => return Err(setup(e)),
            }
        }
        Ok(())
    }

    fn on_tx_complete(&mut self, n: NodeId, t: SimTime) -> Result<(), EngineError> {
        let Some(frame) = self.nodes[n.index()].link.pop() else {
            return Err(setup(format!("transmission completed on idle node {n}")));
        };
        if let Some(next) = self.nodes[n.index()].link.head() {
            let done = t + self.config.link.service_time(next.msg.size);
            self.queue.schedule(done, Event::TxComplete(n))?;
        }
        if let Payload::Data(item) = &frame.msg.payload {
            let peer = match frame.dest {
                Dest::Unicast(p) => Some(p),
                Dest::Broadcast => None,
            };
            self.ledger.push(
                t,
                LogEvent::Sent {
                    node: n,
                    peer,
                    item: item.id.clone(),
                    size: item.size,
                },
            );
        }
        let receivers: Vec<NodeId> = match frame.dest {
            Dest::Unicast(p) => {
                if self.reachable(n, p, t) {
                    vec![p]
                } else {
                    Vec::new()
                }
            }
            Dest::Broadcast => self.neighbors_at(n, t).into_iter().collect(),
        };
        if receivers.is_empty() {
            self.stats.dropped_out_of_range += 1;
            self.ledger.push(
                t,
                LogEvent::Dropped {
                    node: n,
                    item: frame.msg.data_id.clone(),
                    reason: DropReason::OutOfRange,
                },
            );
            return Ok(());
        }
        self.stats.delivered += 1;
        let unicast = matches!(frame.dest, Dest::Unicast(_));
        for r in receivers {
            let msg = pass_thru(frame.msg.clone(), Direction::Up)?;
            self.receive(r, msg, unicast, t)?;
        }
        Ok(())
    }

    fn receive(
        &mut self,
        r: NodeId,
        msg: Message,
        unicast: bool,
        t: SimTime,
    ) -> Result<(), EngineError> {
        let from = msg.hop_source;
        let item = match msg.payload {
            Payload::Data(item) => item,
            payload => {
                let node = &mut self.nodes[r.index()];
                let mut ctx = NodeCtx {
                    node: r,
                    now: t,
                    rng: &mut node.rng,
                };
                let out = node
                    .fwd
                    .protocol
                    .on_control(&mut ctx, &node.fwd.cache, from, &payload);
                return self.send_all(r, out, t);
            }
        };
        let outcome = self.nodes[r.index()].fwd.cache.insert(item.clone(), t);
        let is_new = match outcome {
            Err(ForwardingError::ItemTooLarge { id, .. }) => {
                self.ledger.push(
                    t,
                    LogEvent::Dropped {
                        node: r,
                        item: Some(id),
                        reason: DropReason::ItemTooLarge,
                    },
                );
                false
            }
            Err(e) => return Err(setup(e)),
            Ok(InsertOutcome::Duplicate) => {
                if unicast {
                    self.ledger.push(
                        t,
                        LogEvent::Dropped {
                            node: r,
                            item: Some(item.id.clone()),
                            reason: DropReason::Duplicate,
                        },
                    );
                }
                false
            }
            Ok(InsertOutcome::Inserted { evicted }) => {
                let liked = self
                    .generator
                    .as_ref()
                    .is_some_and(|g| g.usefulness().is_liked(r, &item.id));
                self.ledger.push(
                    t,
                    LogEvent::Received {
                        node: r,
                        from,
                        item: item.id.clone(),
                        liked,
                    },
                );
                for e in evicted {
                    self.ledger.push(
                        t,
                        LogEvent::Evicted {
                            node: r,
                            item: e.id,
                        },
                    );
                }
                if item.destination == Some(r) && self.delivered.insert((item.id.clone(), r)) {
                    self.ledger.push(
                        t,
                        LogEvent::Delivered {
                            node: r,
                            item: item.id.clone(),
                        },
                    );
                }
                true
            }
        };
        let node = &mut self.nodes[r.index()];
        let mut ctx = NodeCtx {
            node: r,
            now: t,
            rng: &mut node.rng,
        };
        let out = node
            .fwd
            .protocol
            .on_data(&mut ctx, &node.fwd.cache, from, &item, is_new);
        self.send_all(r, out, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forwarding::ProtocolConfig;
    use crate::geometry::Point;
    use crate::metrics::MetricsReport;

    fn item(id: &str, origin: u32, dest: Option<u32>) -> DataItem {
        DataItem {
            id: DataId::new(id),
            origin: NodeId(origin),
            created_at: 0.0,
            size: 1000,
            destination: dest.map(NodeId),
            payload_tag: 0,
        }
    }

    #[test]
    fn empty_scenario_gives_empty_ledger() {
        let mut sim = Simulation::new(
            SimConfig::new(1, ProtocolConfig::Epidemic, 1_000_000),
            Mobility::new(Vec::new()),
        )
        .unwrap();
        let ledger = sim.run_until(100.0).unwrap();
        assert!(ledger.is_empty());
        assert_eq!(sim.clock(), 100.0);
    }

    #[test]
    fn static_pair_has_one_contact_spanning_the_run() {
        let mobility = Mobility::stationary(&[Point::planar(0.0, 0.0), Point::planar(10.0, 0.0)]);
        let mut sim = Simulation::new(
            SimConfig::new(1, ProtocolConfig::Epidemic, 1_000_000),
            mobility,
        )
        .unwrap();
        let ledger = sim.run_until(50.0).unwrap();
        let contacts = ledger.contacts();
        assert_eq!(contacts.len(), 1);
        assert_eq!(contacts[0].duration(), 50.0);
    }

    #[test]
    fn epidemic_pair_delivers() {
        let mobility = Mobility::stationary(&[Point::planar(0.0, 0.0), Point::planar(10.0, 0.0)]);
        let mut sim = Simulation::new(
            SimConfig::new(1, ProtocolConfig::Epidemic, 1_000_000),
            mobility,
        )
        .unwrap();
        sim.schedule_injection(0.0, NodeId(0), item("x", 0, Some(1)))
            .unwrap();
        let ledger = sim.run_until(10.0).unwrap();
        let report = MetricsReport::from_ledger(&ledger);
        assert_eq!(report.delivery_ratio, Some(1.0));
        assert!(sim.link_stats().is_conserved());
    }

    #[test]
    fn rrs_timer_broadcasts() {
        let mobility = Mobility::stationary(&[
            Point::planar(0.0, 0.0),
            Point::planar(10.0, 0.0),
            Point::planar(20.0, 0.0),
        ]);
        let mut sim = Simulation::new(
            SimConfig::new(1, ProtocolConfig::Rrs { interval: 1.0 }, 1_000_000),
            mobility,
        )
        .unwrap();
        sim.schedule_injection(0.0, NodeId(0), item("x", 0, Some(2)))
            .unwrap();
        let ledger = sim.run_until(5.0).unwrap();
        assert_eq!(ledger.receipts().count(), 2);
        assert_eq!(ledger.deliveries().count(), 1);
    }

    #[test]
    fn run_twice_is_rejected() {
        let mut sim = Simulation::new(
            SimConfig::new(1, ProtocolConfig::Epidemic, 10),
            Mobility::new(Vec::new()),
        )
        .unwrap();
        sim.run_until(1.0).unwrap();
        assert!(matches!(sim.run_until(2.0), Err(EngineError::Finished(_))));
    }
}
