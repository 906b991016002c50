//! Conflict negotiation and the shared tuple space.

pub mod negotiate;
pub mod space;

pub use negotiate::{negotiate_round_robin, Negotiator, Resolution, Settlement, Turn};
pub use space::{Event, Op, Phase, SpaceClosed, Tuple, TupleSpace};
