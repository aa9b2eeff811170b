use rayon::prelude::*;

use super::response::{classify_response, Evaluation, OutcomeDistribution, ResponseProfile};
use super::AnalyzerError;
use crate::devices::{DeviceError, Incident, ReceiverConfig};
use crate::photonic::Basis;
use crate::protocol::InvalidPolicy;

/// Probabilities below this count as zero in exact evaluation.
const ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeEntry {
    pub basis: Basis,
    pub bit: u8,
    /// Position in the candidate list.
    pub candidate: usize,
    pub incident: Incident,
}

/// A faked state for each result Eve can measure.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackRecipe {
    /// Indexed by `[basis.index()][bit]`.
    entries: [[RecipeEntry; 2]; 2],
    pub background: f64,
    /// Expected fraction of basis-matched rounds Bob loses under the recipe.
    pub achieved_loss: f64,
}

impl AttackRecipe {
    pub fn incident(&self, basis: Basis, bit: u8) -> &Incident {
        &self.entries[basis.index()][bit as usize].incident
    }

    pub fn entry(&self, basis: Basis, bit: u8) -> &RecipeEntry {
        &self.entries[basis.index()][bit as usize]
    }

    pub fn entries(&self) -> impl Iterator<Item = &RecipeEntry> {
        self.entries.iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Synthesis {
    Found(AttackRecipe),
    NotFound,
}

impl Synthesis {
    pub fn recipe(&self) -> Option<&AttackRecipe> {
        match self {
            Synthesis::Found(r) => Some(r),
            Synthesis::NotFound => None,
        }
    }
}

/// Share of a distribution Bob throws away (losses, plus double clicks
/// when they are treated as losses).
fn dropped(d: &OutcomeDistribution, policy: InvalidPolicy) -> f64 {
    match policy {
        InvalidPolicy::AsLoss => d.loss + d.invalid,
        InvalidPolicy::AsError => d.loss,
    }
}

fn clean(d: &OutcomeDistribution, policy: InvalidPolicy) -> bool {
    d.burned <= ZERO && (policy == InvalidPolicy::AsLoss || d.invalid <= ZERO)
}

/// Whether `profile` is a faked state for Eve's result `(basis, bit)`:
/// Bob measuring in `basis` gets `bit` with probability at least
/// `1 - epsilon`, Bob measuring in the other basis gets a key bit with
/// probability at most `epsilon`, nothing burns and no double click is
/// counted as an error.
fn accepts(profile: &ResponseProfile, basis: Basis, bit: u8, epsilon: f64, policy: InvalidPolicy) -> bool {
    let Some(matched) = profile.basis(basis) else {
        return false;
    };
    if matched.valid[bit as usize] < 1.0 - epsilon - ZERO || !clean(matched, policy) {
        return false;
    }
    match profile.basis(basis.other()) {
        None => true,
        Some(other) => other.valid_total() <= epsilon + ZERO && clean(other, policy),
    }
}

/// Bob's expected loss on basis-matched rounds when Eve measures in a
/// uniformly random basis and sends the chosen candidates.
fn expected_loss(profiles: &[[&ResponseProfile; 2]; 2], policy: InvalidPolicy) -> f64 {
    let (mut lost, mut kept) = (0.0, 0.0);
    for per_bit in profiles {
        for profile in per_bit {
            for alice in Basis::BOTH {
                if let Some(d) = profile.basis(alice) {
                    let w = profile.weights[alice.index()];
                    lost += w * dropped(d, policy);
                    kept += w;
                }
            }
        }
    }
    if kept == 0.0 {
        1.0
    } else {
        lost / kept
    }
}

/// Searches the candidates for four faked states sharing one background
/// level. Backgrounds are tried in order of first appearance and, within
/// one, the earliest acceptable candidate wins.
pub fn synthesize_faked_states(
    receiver: &ReceiverConfig,
    candidates: &[Incident],
    epsilon: f64,
    policy: InvalidPolicy,
    evaluation: Evaluation,
) -> Result<Synthesis, AnalyzerError> {
    if candidates.is_empty() {
        return Err(AnalyzerError::EmptyCandidates);
    }
    let profiles: Vec<Option<ResponseProfile>> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let eval = match evaluation {
                Evaluation::MonteCarlo { trials, seed } => {
                    Evaluation::MonteCarlo { trials, seed: seed.wrapping_add(i as u64) }
                }
                exact => exact,
            };
            match classify_response(receiver, c, eval) {
                Ok(p) => Ok(Some(p)),
                // the receiver offers no port for this candidate
                Err(DeviceError::BlockedPortSealed | DeviceError::UnexpectedPath(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut backgrounds: Vec<f64> = Vec::new();
    for c in candidates {
        if !backgrounds.iter().any(|b| b.to_bits() == c.background.to_bits()) {
            backgrounds.push(c.background);
        }
    }
    for background in backgrounds {
        let pick = |basis: Basis, bit: u8| {
            candidates.iter().zip(&profiles).position(|(c, p)| {
                c.background.to_bits() == background.to_bits()
                    && p.as_ref().is_some_and(|p| accepts(p, basis, bit, epsilon, policy))
            })
        };
        let chosen = [Basis::Computational, Basis::Hadamard].map(|b| [pick(b, 0), pick(b, 1)]);
        let Some(indices) = chosen.iter().map(|pair| Some([pair[0]?, pair[1]?])).collect::<Option<Vec<[usize; 2]>>>()
        else {
            continue;
        };
        let entry = |basis: Basis, bit: u8| {
            let candidate = indices[basis.index()][bit as usize];
            RecipeEntry { basis, bit, candidate, incident: candidates[candidate].clone() }
        };
        let profile =
            |basis: Basis, bit: u8| profiles[indices[basis.index()][bit as usize]].as_ref().expect("accepted");
        let used = [
            [profile(Basis::Computational, 0), profile(Basis::Computational, 1)],
            [profile(Basis::Hadamard, 0), profile(Basis::Hadamard, 1)],
        ];
        return Ok(Synthesis::Found(AttackRecipe {
            entries: [
                [entry(Basis::Computational, 0), entry(Basis::Computational, 1)],
                [entry(Basis::Hadamard, 0), entry(Basis::Hadamard, 1)],
            ],
            background,
            achieved_loss: expected_loss(&used, policy),
        }));
    }
    Ok(Synthesis::NotFound)
}
