//! Eavesdropping strategies that sit in the channel between Alice and Bob.
//!
//! A strategy sees what Alice emitted (after channel loss, unless it
//! intercepts at the source), commits to a key claim, and hands Bob an
//! [`Incident`]. Only strategies that declare [`AttackStrategy::uses_basis_oracle`]
//! are shown Bob's basis.

mod config;
mod strategies;

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::devices::{DeviceError, Incident, ReceiverConfig};
use crate::photonic::{Basis, Pulse, PureState, StateError};

pub use config::AttackConfig;
pub use strategies::{
    BasisProbe, BrightIllumination, FakedStatesTiming, FixedApparatus, InterceptResend, NoAttack, Pns, RecipeAttack,
    TrojanPony,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("{attack}: {reason}")]
    Precondition { attack: String, reason: String },
    #[error("{attack} refuses to run: {reason}")]
    Refused { attack: String, reason: String },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

/// The run parameters a strategy may inspect before the first round.
#[derive(Debug, Clone, Copy)]
pub struct AttackContext<'a> {
    pub receiver: &'a ReceiverConfig,
    pub multi_photon_prob: f64,
    pub channel_loss: f64,
}

/// One round as Eve sees it.
#[derive(Debug, Clone, Copy)]
pub struct Interception<'a> {
    pub emitted: &'a PureState,
    /// Alice's signal pulse.
    pub signal: Pulse,
    /// Present only for strategies with basis-oracle access.
    pub bob_basis: Option<Basis>,
}

/// Eve's statement about the key bit of one round.
#[derive(Debug, Clone, PartialEq)]
pub enum EveClaim {
    Known(u8),
    /// A stored photon, measured once Alice announces her basis.
    Deferred(PureState),
    /// Eve has nothing and guesses uniformly.
    Guess,
}

/// What Eve measured this round, when she measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveRecord {
    pub basis: Basis,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EveAction {
    pub incident: Incident,
    pub claim: EveClaim,
    /// Steers a compromised passive receiver onto one arm.
    pub forced_arm: Option<Basis>,
    pub record: Option<EveRecord>,
}

impl EveAction {
    /// Forward an incident untouched, guessing the key bit.
    pub fn passthrough(incident: Incident) -> Self {
        Self { incident, claim: EveClaim::Guess, forced_arm: None, record: None }
    }
}

pub trait AttackStrategy: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Rejects run configurations the attack cannot work against.
    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError>;

    fn uses_basis_oracle(&self) -> bool {
        false
    }

    /// Attacks that replace the lossy channel receive Alice's state before
    /// channel loss.
    fn intercepts_at_source(&self) -> bool {
        false
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError>;
}

/// Ideal polarization measurement of all photons in `pulse`: the majority
/// outcome in `basis`, a coin flip on ties, `None` for vacuum.
pub fn ideal_measure(
    state: &PureState,
    pulse: Pulse,
    basis: Basis,
    rng: &mut dyn RngCore,
) -> Result<Option<u8>, StateError> {
    let rotated;
    let state = match basis {
        Basis::Computational => state,
        Basis::Hadamard => {
            rotated = state.apply_polarization_rotation(pulse, FRAC_PI_4)?;
            &rotated
        }
    };
    let modes = [pulse.h(), pulse.v()].into_iter().collect();
    let (occ, _) = state.measure_occupation(&modes, rng);
    let (h, v) = (occ.get(&pulse.h()), occ.get(&pulse.v()));
    Ok(match h.cmp(&v) {
        _ if h + v == 0 => None,
        std::cmp::Ordering::Greater => Some(0),
        std::cmp::Ordering::Less => Some(1),
        std::cmp::Ordering::Equal => Some(u8::from(rng.random::<bool>())),
    })
}

pub(crate) fn random_basis(rng: &mut dyn RngCore) -> Basis {
    if rng.random::<bool>() {
        Basis::Hadamard
    } else {
        Basis::Computational
    }
}
