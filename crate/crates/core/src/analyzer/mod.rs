//! Black-box analysis of Bob's receiver: threshold discovery, enumeration of
//! the incidents Eve could send, classification of Bob's responses, and
//! synthesis of zero-error faked-state attacks.

mod probe;
mod response;
mod reverse;
mod space;
mod synth;

use thiserror::Error;

use crate::devices::DeviceError;
use crate::photonic::StateError;

pub use probe::{probe_thresholds, BlackBoxDetector, ThresholdEstimate};
pub use response::{classify_response, Evaluation, OutcomeDistribution, Response, ResponseProfile};
pub use reverse::{reverse_bob_unitary, DesiredOutcome};
pub use space::{count_candidates, enumerate_protocol_space, SpaceBounds, DEFAULT_CANDIDATE_CAP};
pub use synth::{synthesize_faked_states, AttackRecipe, RecipeEntry, Synthesis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzerError {
    #[error("no transition found below k_max = {k_max}")]
    NoTransition { k_max: u64 },
    #[error("no damage found below k_max = {k_max}")]
    NoDamage { k_max: u64 },
    #[error("{count} candidates exceed the cap of {cap}")]
    TooManyCandidates { count: u128, cap: usize },
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    State(#[from] StateError),
}
