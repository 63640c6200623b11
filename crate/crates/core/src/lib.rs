//! Rate-energy (R-E) region simulation for simultaneous wireless information
//! and power transfer in a two-user single-antenna OFDM interference channel.
//!
//! Receiver 1 harvests energy (EH) and receiver 2 decodes information (ID).
//! The EH transmitter puts its power on a single subcarrier chosen by one of
//! several selection strategies; the ID transmitter's allocation is solved
//! exactly through its Lagrangian dual. Sweeping the energy constraint traces
//! the achievable R-E boundary.
//!
//! All powers are expressed in microwatts and the per-subcarrier noise power
//! is the unit, so a received SNR is simply `p * |h|^2`.

pub mod channel;
pub mod config;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod region;
mod roots;
pub mod selection;

pub use channel::{ChannelSet, DiagonalChannel, TapVector};
pub use config::SimConfig;
pub use error::{Result, SwiptError};
pub use metrics::{LinkDiagnostics, PowerAllocation, REPoint};
pub use optimizer::{AlgoConfig, Algorithm1Outcome, DualSolution, DualState, IterationTrace};
pub use region::{CurvePoint, RECurve};
pub use selection::{Selection, SelectionContext, StrategyKind};
