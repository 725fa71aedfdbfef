//! The inter-layer message format and the PassThru adaptation layer.
//!
//! Every message crossing a layer boundary carries the same header: source
//! node, hop source, optional destination, data id, payload size in bytes,
//! message kind and the layer it is addressed to. This header is this
//! crate's own definition of the "standard format" between layers.

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::forwarding::DataItem;
use crate::ids::{DataId, NodeId};
use crate::link::NeighborChange;

/// Bytes charged for a summary vector header.
pub const SUMMARY_HEADER_BYTES: u64 = 16;
/// Bytes charged per id listed in a summary vector.
pub const SUMMARY_ID_BYTES: u64 = 8;
/// Bytes charged for small control messages (requests, refusals).
pub const CONTROL_BYTES: u64 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Layer {
    Application,
    Forwarding,
    Adaptation,
    Link,
}

impl Layer {
    /// The adjacent layer in `dir`, if any.
    pub fn next(self, dir: Direction) -> Option<Layer> {
        use Layer::*;
        match (self, dir) {
            (Application, Direction::Down) => Some(Forwarding),
            (Forwarding, Direction::Down) => Some(Adaptation),
            (Adaptation, Direction::Down) => Some(Link),
            (Link, Direction::Up) => Some(Adaptation),
            (Adaptation, Direction::Up) => Some(Forwarding),
            (Forwarding, Direction::Up) => Some(Application),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Data,
    SummaryVector,
    DataRequest,
    DataUnavailable,
    NeighborChange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Data(DataItem),
    /// Ids held by the sender. `initial` marks the first vector of a session,
    /// which asks the receiver to answer with its own.
    SummaryVector {
        ids: Vec<DataId>,
        initial: bool,
    },
    Request(DataId),
    Unavailable(DataId),
    Neighbors(NeighborChange),
}

impl Payload {
    pub fn kind(&self) -> MessageKind {
        match self {
            Payload::Data(_) => MessageKind::Data,
            Payload::SummaryVector { .. } => MessageKind::SummaryVector,
            Payload::Request(_) => MessageKind::DataRequest,
            Payload::Unavailable(_) => MessageKind::DataUnavailable,
            Payload::Neighbors(_) => MessageKind::NeighborChange,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub kind: MessageKind,
    pub source: NodeId,
    pub hop_source: NodeId,
    pub destination: Option<NodeId>,
    pub data_id: Option<DataId>,
    pub size: u64,
    pub target: Option<Layer>,
    pub payload: Payload,
}

impl Message {
    /// A data message carrying `item`, sent by `hop` towards `target`.
    pub fn data(item: DataItem, hop: NodeId, target: Layer) -> Self {
        Self {
            kind: MessageKind::Data,
            source: item.origin,
            hop_source: hop,
            destination: item.destination,
            data_id: Some(item.id.clone()),
            size: item.size,
            target: Some(target),
            payload: Payload::Data(item),
        }
    }

    /// A control message originated by `from`.
    pub fn control(from: NodeId, to: Option<NodeId>, payload: Payload, target: Layer) -> Self {
        let (size, data_id) = match &payload {
            Payload::SummaryVector { ids, .. } => (
                SUMMARY_HEADER_BYTES + SUMMARY_ID_BYTES * ids.len() as u64,
                None,
            ),
            Payload::Request(id) | Payload::Unavailable(id) => (CONTROL_BYTES, Some(id.clone())),
            Payload::Neighbors(_) => (0, None),
            Payload::Data(item) => (item.size, Some(item.id.clone())),
        };
        Self {
            kind: payload.kind(),
            source: from,
            hop_source: from,
            destination: to,
            data_id,
            size,
            target: Some(target),
            payload,
        }
    }

    /// Checks the header fields the contract requires.
    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |what: &'static str| Err(EngineError::MalformedMessage(what));
        if self.target.is_none() {
            return fail("missing target layer");
        }
        if self.kind != self.payload.kind() {
            return fail("kind does not match payload");
        }
        match &self.payload {
            Payload::Data(item) => {
                if self.data_id.as_ref() != Some(&item.id) {
                    return fail("data message without matching data id");
                }
                if self.size == 0 {
                    return fail("data message with zero size");
                }
            }
            Payload::Request(id) | Payload::Unavailable(id)
                if self.data_id.as_ref() != Some(id) =>
            {
                return fail("control message without matching data id");
            }
            _ => {}
        }
        Ok(())
    }
}

/// Link adaptation layer that performs no conversion.
#[derive(Debug, Default, Clone, Copy)]
pub struct PassThru;

impl PassThru {
    /// Validates `msg` and hands it on unchanged in `direction`.
    pub fn relay(&self, msg: Message, direction: Direction) -> Result<Message, EngineError> {
        pass_thru(msg, direction)
    }
}

/// Identity transform between the forwarding and link layers.
pub fn pass_thru(msg: Message, _direction: Direction) -> Result<Message, EngineError> {
    msg.validate()?;
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn item(id: &str) -> DataItem {
        DataItem {
            id: DataId::new(id),
            origin: NodeId(0),
            created_at: 1.0,
            size: 1000,
            destination: Some(NodeId(2)),
            payload_tag: 7,
        }
    }

    #[test]
    fn data_down_is_identity() {
        let m = Message::data(item("d1"), NodeId(0), Layer::Link);
        assert_eq!(pass_thru(m.clone(), Direction::Down).unwrap(), m);
    }

    #[test]
    fn neighbor_notification_up_is_identity() {
        let change = NeighborChange {
            arrived: vec![NodeId(3)],
            left: vec![],
            current: vec![NodeId(3)],
        };
        let m = Message::control(
            NodeId(1),
            None,
            Payload::Neighbors(change),
            Layer::Forwarding,
        );
        assert_eq!(pass_thru(m.clone(), Direction::Up).unwrap(), m);
    }

    #[test]
    fn missing_target_is_malformed() {
        let mut m = Message::data(item("d1"), NodeId(0), Layer::Link);
        m.target = None;
        assert!(matches!(
            pass_thru(m, Direction::Down),
            Err(EngineError::MalformedMessage(_))
        ));
    }

    #[test]
    fn layer_adjacency() {
        assert_eq!(
            Layer::Forwarding.next(Direction::Down),
            Some(Layer::Adaptation)
        );
        assert_eq!(
            Layer::Adaptation.next(Direction::Up),
            Some(Layer::Forwarding)
        );
        assert_eq!(Layer::Link.next(Direction::Down), None);
    }

    fn arb_message() -> impl Strategy<Value = Message> {
        (
            0u32..50,
            0u32..50,
            proptest::option::of(0u32..50),
            "[a-z0-9]{1,12}",
            1u64..1_000_000,
            0usize..4,
            prop::collection::vec("[a-z]{1,6}", 0..5),
        )
            .prop_map(|(src, hop, dst, id, size, which, ids)| {
                let id = DataId::new(id);
                let payload = match which {
                    0 => Payload::Data(DataItem {
                        id: id.clone(),
                        origin: NodeId(src),
                        created_at: 0.0,
                        size,
                        destination: dst.map(NodeId),
                        payload_tag: size,
                    }),
                    1 => Payload::SummaryVector {
                        ids: ids.into_iter().map(DataId::new).collect(),
                        initial: size % 2 == 0,
                    },
                    2 => Payload::Request(id.clone()),
                    _ => Payload::Unavailable(id.clone()),
                };
                let mut m = Message::control(NodeId(src), dst.map(NodeId), payload, Layer::Link);
                m.hop_source = NodeId(hop);
                m
            })
    }

    proptest! {
        #[test]
        fn pass_thru_is_identity(m in arb_message(), up in any::<bool>()) {
            let dir = if up { Direction::Up } else { Direction::Down };
            prop_assert_eq!(pass_thru(m.clone(), dir).unwrap(), m);
        }
    }
}
