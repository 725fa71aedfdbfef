//! Discrete-event core: the event queue, seeded random streams, the message
//! format shared by all layers, the PassThru adaptation layer and the
//! simulation that wires one layer stack per node.

mod message;
mod queue;
mod rng;
mod sim;

use thiserror::Error;

pub use message::{
    pass_thru, Direction, Layer, Message, MessageKind, PassThru, Payload, CONTROL_BYTES,
    SUMMARY_HEADER_BYTES, SUMMARY_ID_BYTES,
};
pub use queue::{EventQueue, SimEvent};
pub use rng::{rng_draw, Distribution, Purpose, RngStream};
pub use sim::{AppLayer, BeaconSnapshot, Event, NodeStack, SimConfig, Simulation};

/// Simulation time in seconds.
pub type SimTime = f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("cannot schedule at {time} s, clock is already at {clock} s")]
    SchedulingInPast { time: SimTime, clock: SimTime },
    #[error("malformed message: {0}")]
    MalformedMessage(&'static str),
    #[error("invalid distribution {0:?}")]
    InvalidDistribution(Distribution),
    #[error("invalid simulation setup: {0}")]
    InvalidSetup(String),
    #[error("simulation already finished at {0} s")]
    Finished(SimTime),
}
