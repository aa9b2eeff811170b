//! Detectors, receivers and the light that reaches them.

mod detector;
mod incident;
mod optics;
mod receiver;

pub use detector::{ArrivalTally, Detector, DetectorModel, DetectorOutcome};
pub use incident::{Incident, Light};
pub use optics::{OpticalChain, OpticalElement};
pub use receiver::{
    resolve_arm, ActiveReceiver, Branch, PassiveReading, PassiveReceiver, Receiver, ReceiverConfig, Setting,
};

use crate::photonic::{StateError, TimeBin};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("invalid detector thresholds: {0}")]
    Thresholds(String),
    #[error("gate opens at {open} after it closes at {close}")]
    Gate { open: TimeBin, close: TimeBin },
    #[error("background must be finite and non-negative, got {0}")]
    Background(f64),
    #[error("light on the blocked port of a sealed passive receiver")]
    BlockedPortSealed,
    #[error("light on path {0}, which this receiver does not expose")]
    UnexpectedPath(String),
    #[error("operation not available on an {0} receiver")]
    WrongStyle(&'static str),
    #[error("steering the passive beam splitter requires a compromised receiver")]
    NotCompromised,
    #[error(transparent)]
    State(#[from] StateError),
}
