//! Epidemic Routing with summary-vector negotiation.
//!
//! When two nodes meet, the one with the lower id opens an anti-entropy
//! session by sending its summary vector (the ids it caches). The peer
//! answers with its own vector. Each side then requests the ids it is missing
//! one after the other: the next request goes out only after the previous
//! item (or a refusal) has arrived.
//!
//! A session lasts for the whole contact. Items a node acquires while the
//! session is open are announced to its session peers with a one-id summary,
//! so data keeps flowing along static paths without renegotiating. A node
//! never requests an id it already holds or has requested from someone else.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{Cache, DataItem, ForwardingProtocol, NodeCtx, Outgoing};
use crate::engine::{Layer, Message, Payload};
use crate::ids::{DataId, NodeId};
use crate::link::{Dest, NeighborChange};

/// Ids in `peer` that are absent from `own`, in `peer` order.
pub fn missing(own: &Cache, peer: &[DataId]) -> Vec<DataId> {
    peer.iter()
        .filter(|id| !own.contains(id))
        .cloned()
        .collect()
}

/// Opening move of a session with a newly arrived peer: the summary vector,
/// or nothing if `me` is not the lower id of the pair.
pub fn epidemic_on_contact(me: NodeId, peer: NodeId, cache: &Cache) -> Option<Outgoing> {
    (me < peer).then(|| summary(me, peer, cache.ids(), true))
}

fn summary(me: NodeId, peer: NodeId, ids: Vec<DataId>, initial: bool) -> Outgoing {
    Outgoing {
        msg: Message::control(
            me,
            Some(peer),
            Payload::SummaryVector { ids, initial },
            Layer::Link,
        ),
        dest: Dest::Unicast(peer),
    }
}

fn unicast(me: NodeId, peer: NodeId, payload: Payload) -> Outgoing {
    Outgoing {
        msg: Message::control(me, Some(peer), payload, Layer::Link),
        dest: Dest::Unicast(peer),
    }
}

#[derive(Debug, Clone, Default)]
struct Session {
    pending: VecDeque<DataId>,
    awaiting: Option<DataId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EpidemicStats {
    pub sessions_opened: u64,
    pub sessions_aborted: u64,
    pub requests_sent: u64,
    pub items_served: u64,
    pub refusals_sent: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Epidemic {
    sessions: BTreeMap<NodeId, Session>,
    /// Ids currently requested, and from whom.
    outstanding: HashMap<DataId, NodeId>,
    pub stats: EpidemicStats,
}

impl Epidemic {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has_session(&self, peer: NodeId) -> bool {
        self.sessions.contains_key(&peer)
    }

    fn abort(&mut self, peer: NodeId) {
        if let Some(s) = self.sessions.remove(&peer) {
            self.stats.sessions_aborted += 1;
            if let Some(id) = s.awaiting {
                self.outstanding.remove(&id);
            }
        }
    }

    fn enqueue_missing(&mut self, peer: NodeId, ids: &[DataId], cache: &Cache) {
        let Some(s) = self.sessions.get_mut(&peer) else {
            return;
        };
        for id in ids {
            if !cache.contains(id) && s.awaiting.as_ref() != Some(id) && !s.pending.contains(id) {
                s.pending.push_back(id.clone());
            }
        }
    }

    /// Issues the next request on every idle session.
    fn pump_all(&mut self, me: NodeId, cache: &Cache, out: &mut Vec<Outgoing>) {
        let peers: Vec<NodeId> = self.sessions.keys().copied().collect();
        for peer in peers {
            self.pump(me, peer, cache, out);
        }
    }

    fn pump(&mut self, me: NodeId, peer: NodeId, cache: &Cache, out: &mut Vec<Outgoing>) {
        let Some(s) = self.sessions.get_mut(&peer) else {
            return;
        };
        if s.awaiting.is_some() {
            return;
        }
        s.pending.retain(|id| !cache.contains(id));
        let outstanding = &self.outstanding;
        if let Some(pos) = s
            .pending
            .iter()
            .position(|id| !outstanding.contains_key(id))
        {
            let id = s.pending.remove(pos).expect("position is in range");
            s.awaiting = Some(id.clone());
            self.outstanding.insert(id.clone(), peer);
            self.stats.requests_sent += 1;
            out.push(unicast(me, peer, Payload::Request(id)));
        }
    }

    fn clear_awaiting(&mut self, peer: NodeId, id: &DataId) {
        if let Some(s) = self.sessions.get_mut(&peer) {
            if s.awaiting.as_ref() == Some(id) {
                s.awaiting = None;
            }
        }
        if self.outstanding.get(id) == Some(&peer) {
            self.outstanding.remove(id);
        }
    }

    fn announce(&self, me: NodeId, id: &DataId, except: Option<NodeId>, out: &mut Vec<Outgoing>) {
        for &peer in self.sessions.keys() {
            if Some(peer) != except {
                out.push(summary(me, peer, vec![id.clone()], false));
            }
        }
    }
}

impl ForwardingProtocol for Epidemic {
    fn name(&self) -> &'static str {
        "epidemic"
    }

    fn on_neighbors(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        change: &NeighborChange,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        for &peer in &change.left {
            self.abort(peer);
        }
        for &peer in &change.arrived {
            if self.sessions.contains_key(&peer) {
                continue;
            }
            if let Some(opening) = epidemic_on_contact(ctx.node, peer, cache) {
                self.sessions.insert(peer, Session::default());
                self.stats.sessions_opened += 1;
                out.push(opening);
            }
        }
        if !change.left.is_empty() {
            self.pump_all(ctx.node, cache, &mut out);
        }
        out
    }

    fn on_control(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        from: NodeId,
        payload: &Payload,
    ) -> Vec<Outgoing> {
        let me = ctx.node;
        let mut out = Vec::new();
        match payload {
            Payload::SummaryVector { ids, initial } => {
                if *initial {
                    // a fresh session from the peer replaces any stale one
                    self.abort(from);
                    self.sessions.insert(from, Session::default());
                    self.stats.sessions_opened += 1;
                    out.push(summary(me, from, cache.ids(), false));
                } else if let Entry::Vacant(e) = self.sessions.entry(from) {
                    e.insert(Session::default());
                    self.stats.sessions_opened += 1;
                }
                self.enqueue_missing(from, ids, cache);
                self.pump(me, from, cache, &mut out);
            }
            Payload::Request(id) => match cache.get(id) {
                Some(entry) => {
                    self.stats.items_served += 1;
                    out.push(Outgoing {
                        msg: Message::data(entry.item.clone(), me, Layer::Link),
                        dest: Dest::Unicast(from),
                    });
                }
                None => {
                    self.stats.refusals_sent += 1;
                    out.push(unicast(me, from, Payload::Unavailable(id.clone())));
                }
            },
            Payload::Unavailable(id) => {
                self.clear_awaiting(from, id);
                self.pump_all(me, cache, &mut out);
            }
            Payload::Data(_) | Payload::Neighbors(_) => {}
        }
        out
    }

    fn on_data(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        cache: &Cache,
        from: NodeId,
        item: &DataItem,
        is_new: bool,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        self.clear_awaiting(from, &item.id);
        if is_new {
            self.announce(ctx.node, &item.id, Some(from), &mut out);
        }
        self.pump_all(ctx.node, cache, &mut out);
        out
    }

    fn on_local_item(
        &mut self,
        ctx: &mut NodeCtx<'_>,
        _: &Cache,
        item: &DataItem,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        self.announce(ctx.node, &item.id, None, &mut out);
        out
    }
}
