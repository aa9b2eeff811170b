//! Photonic states: exact few-photon Fock superpositions and bright pulses.

mod mode;
mod pulse;
mod state;
mod unitary;

use thiserror::Error;

pub use mode::{Basis, ModeId, Path, Polarization, Pulse, TimeBin};
pub use pulse::{LinearPolarization, MacroPulse};
pub use state::{polarization_modes, OccupationVector, PureState, AMPLITUDE_FLOOR, DEFAULT_PHOTON_CAP};
pub use unitary::TwoModeUnitary;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("a state needs at least one mode")]
    EmptyModeSet,
    #[error("mode {0} appears in both tensor factors")]
    OverlappingModes(ModeId),
    #[error("{photons} photons exceed the exact-regime cap of {cap}; describe the light as a MacroPulse")]
    PhotonCap { photons: u32, cap: u32 },
    #[error("transmittance {0} outside [0, 1]")]
    Transmittance(f64),
    #[error("two-mode operation needs two distinct input and two distinct output modes")]
    DegenerateModePair,
    #[error("relabeling maps two modes onto one")]
    RelabelCollision,
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("intensity must be a non-negative finite number, got {0}")]
    NegativeIntensity(f64),
}
