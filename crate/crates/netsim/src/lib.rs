//! Deterministic discrete-event simulation of a Social Internet of Vehicles
//! network layer.
//!
//! Time is a logical tick of [`TICK_SECONDS`]; every latency is quantized to
//! ticks and every random draw comes from one seeded generator, so the same
//! `(seed, config)` always yields the same event trace.

pub mod channel;
pub mod config;
pub mod message;
pub mod queue;
pub mod sim;
pub mod trace;

pub use channel::{Channel, TICK_SECONDS};
pub use config::{AttackSpec, NetConfig, NodeKind, NodeSpec, SimParams};
pub use message::{papa_check, Message, MessageKey, MessageKind, PapaOutcome, PapaPolicy, PapaViolation, Payload, Region};
pub use queue::EventQueue;
pub use sim::{Corroboration, NetError, RightOfWay, SendOutcome, Simulation};
pub use trace::{DropReason, Summary, TraceEvent, TraceRecord};

pub type NodeId = siov_core::EntityId;
pub type Tick = u64;
