//! Append-only record of everything metrics are computed from.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ids::{DataId, NodeId};
use crate::link::Contact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DropReason {
    QueueFull,
    OutOfRange,
    ItemTooLarge,
    /// A unicast data frame reached a node that already held the item.
    Duplicate,
    CatalogExhausted,
    NoValidDestination,
}

impl DropReason {
    pub const ALL: [DropReason; 6] = [
        DropReason::QueueFull,
        DropReason::OutOfRange,
        DropReason::ItemTooLarge,
        DropReason::Duplicate,
        DropReason::CatalogExhausted,
        DropReason::NoValidDestination,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::QueueFull => "queue_full",
            DropReason::OutOfRange => "out_of_range",
            DropReason::ItemTooLarge => "item_too_large",
            DropReason::Duplicate => "duplicate",
            DropReason::CatalogExhausted => "catalog_exhausted",
            DropReason::NoValidDestination => "no_valid_destination",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DropReason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DropReason::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown drop reason {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogEvent {
    Generated {
        item: DataId,
        origin: NodeId,
        destination: Option<NodeId>,
        size: u64,
    },
    /// A data frame left `node`'s queue; `peer` is `None` for broadcasts.
    Sent {
        node: NodeId,
        peer: Option<NodeId>,
        item: DataId,
        size: u64,
    },
    /// `node` cached an item it did not hold, coming from `from`.
    Received {
        node: NodeId,
        from: NodeId,
        item: DataId,
        liked: bool,
    },
    Delivered {
        node: NodeId,
        item: DataId,
    },
    ContactOpen {
        a: NodeId,
        b: NodeId,
    },
    ContactClose {
        a: NodeId,
        b: NodeId,
    },
    Dropped {
        node: NodeId,
        item: Option<DataId>,
        reason: DropReason,
    },
    Evicted {
        node: NodeId,
        item: DataId,
    },
}

impl LogEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            LogEvent::Generated { .. } => "generated",
            LogEvent::Sent { .. } => "sent",
            LogEvent::Received { .. } => "received",
            LogEvent::Delivered { .. } => "delivered",
            LogEvent::ContactOpen { .. } => "contact_open",
            LogEvent::ContactClose { .. } => "contact_close",
            LogEvent::Dropped { .. } => "dropped",
            LogEvent::Evicted { .. } => "evicted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub seq: u64,
    pub event: LogEvent,
}

/// Records of one run in `(t, seq)` order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ledger {
    pub node_count: usize,
    pub t_end: f64,
    pub records: Vec<Record>,
}

impl Ledger {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            t_end: 0.0,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, event: LogEvent) {
        let seq = self.records.len() as u64;
        self.records.push(Record { t, seq, event });
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// `(item, t, origin, destination)` of every generation.
    pub fn generations(&self) -> impl Iterator<Item = (&DataId, f64, NodeId, Option<NodeId>)> {
        self.records.iter().filter_map(|r| match &r.event {
            LogEvent::Generated {
                item,
                origin,
                destination,
                ..
            } => Some((item, r.t, *origin, *destination)),
            _ => None,
        })
    }

    /// `(item, node, t, liked)` of every receipt.
    pub fn receipts(&self) -> impl Iterator<Item = (&DataId, NodeId, f64, bool)> {
        self.records.iter().filter_map(|r| match &r.event {
            LogEvent::Received {
                item, node, liked, ..
            } => Some((item, *node, r.t, *liked)),
            _ => None,
        })
    }

    /// `(item, destination, t)` of every delivery.
    pub fn deliveries(&self) -> impl Iterator<Item = (&DataId, NodeId, f64)> {
        self.records.iter().filter_map(|r| match &r.event {
            LogEvent::Delivered { item, node } => Some((item, *node, r.t)),
            _ => None,
        })
    }

    pub fn drops(&self) -> impl Iterator<Item = (DropReason, f64)> + '_ {
        self.records.iter().filter_map(|r| match &r.event {
            LogEvent::Dropped { reason, .. } => Some((*reason, r.t)),
            _ => None,
        })
    }

    pub fn count_drops(&self, reason: DropReason) -> usize {
        self.drops().filter(|(r, _)| *r == reason).count()
    }

    /// Contacts rebuilt from open/close records; still-open ones end at `t_end`.
    pub fn contacts(&self) -> Vec<Contact> {
        let mut open: std::collections::HashMap<(NodeId, NodeId), f64> = Default::default();
        let mut out = Vec::new();
        for r in &self.records {
            match r.event {
                LogEvent::ContactOpen { a, b } => {
                    open.insert((a, b), r.t);
                }
                LogEvent::ContactClose { a, b } => {
                    if let Some(start) = open.remove(&(a, b)) {
                        out.push(Contact {
                            a,
                            b,
                            start,
                            end: r.t,
                        });
                    }
                }
                _ => {}
            }
        }
        let mut rest: Vec<_> = open.into_iter().collect();
        rest.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        for ((a, b), start) in rest {
            if self.t_end > start {
                out.push(Contact {
                    a,
                    b,
                    start,
                    end: self.t_end,
                });
            }
        }
        out
    }

    /// The ledger as it would look had the run stopped at `horizon`.
    pub fn truncated(&self, horizon: f64) -> Ledger {
        let mut out = Ledger {
            node_count: self.node_count,
            t_end: horizon.min(self.t_end),
            records: Vec::new(),
        };
        for r in self.records.iter().filter(|r| r.t <= horizon) {
            // contacts closed exactly at the horizon remain closed; the rest
            // are closed by `contacts()` at the new t_end
            out.records.push(r.clone());
        }
        out
    }
}
