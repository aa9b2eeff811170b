use super::AnalyzerError;
use crate::devices::{ReceiverConfig, Setting};
use crate::photonic::{Basis, OccupationVector, Path, PureState, TimeBin};

/// A single click Eve wants Bob to see: bit `bit` measured in `basis` at
/// `time_bin`. For a passive receiver `basis` selects the arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesiredOutcome {
    pub basis: Basis,
    pub bit: u8,
    pub time_bin: TimeBin,
}

/// Runs Bob's optics backwards from one photon in front of the desired
/// detector, giving the state Eve must send for that click to happen with
/// certainty.
pub fn reverse_bob_unitary(receiver: &ReceiverConfig, desired: DesiredOutcome) -> Result<PureState, AnalyzerError> {
    let (detector, setting) = match receiver {
        ReceiverConfig::Active(_) => (desired.bit as usize, Setting::Active(desired.basis)),
        ReceiverConfig::Passive(_) => {
            (2 * desired.basis.index() + desired.bit as usize, Setting::Passive { forced_arm: None })
        }
    };
    let model = receiver.detector_models()[detector];
    if !model.in_gate(desired.time_bin) {
        return Err(AnalyzerError::NotFound(format!("detector {detector} is not sensitive at {}", desired.time_bin)));
    }
    let mode = ReceiverConfig::detector_mode(detector, desired.time_bin);
    let click = PureState::basis_state([mode], OccupationVector::from_counts([(mode, 1)]))?;
    let optics = receiver.optics(setting, &[desired.time_bin].into_iter().collect())?;
    let state = optics.inverse().apply_state(&click)?;

    let needs_blocked_port = state.terms().any(|(occ, _)| occ.iter().any(|(m, n)| *n > 0 && m.path == Path::Blocked));
    if let ReceiverConfig::Passive(p) = receiver {
        if needs_blocked_port && !p.compromised {
            return Err(AnalyzerError::NotFound("a deterministic click needs light on the blocked input port".into()));
        }
    }
    Ok(state)
}
