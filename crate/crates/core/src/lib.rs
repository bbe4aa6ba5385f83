//! Two-receiver Poisson channels: orderings, capacity regions, exact
//! block-input filtering and information densities, and superposition
//! coding experiments.

pub mod capacity;
pub mod channel;
pub mod codingsim;
pub mod error;
pub mod hull;
pub mod inference;
pub mod numeric;
pub mod optimize;
pub mod process;
pub mod rng;

pub use channel::{classify_ordering, ChannelParams, OrderingVerdict, Receiver, ReceiverParams};
pub use error::{Error, Result};
pub use process::{BlockInputModel, ChannelRealization, PointProcess};
