//! Coded network-function-virtualisation (NFV) decoding: GF(2) codes,
//! dependency-graph structure, channel/decoder and latency models,
//! frame-unavailability bounds, Monte Carlo and queueing simulation.

pub mod analysis;
pub mod channel;
pub mod error;
pub mod gf2;
pub mod latency;
pub mod montecarlo;
pub mod numeric;
pub mod queueing;
pub mod structure;

pub use analysis::{BoundValue, DecoderSpec, SystemConfig, SystemParams};
pub use channel::{BscChannel, DecoderKind, DecoderModel, RegularLdpc};
pub use error::{NfvError, Result};
pub use gf2::{make_code, BitMatrix, BitVec, CodeKind, NfvCode};
pub use latency::{LatencyModel, ServiceModel};
pub use montecarlo::FupCurve;
pub use queueing::{Policy, QueueConfig, QueueStats};
pub use structure::{ChiSource, ColoringMode, ColoringResult, DependencyGraph};
