use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::devices::{resolve_arm, DetectorOutcome, DeviceError, Incident, Receiver, ReceiverConfig, Setting};
use crate::photonic::Basis;

/// Bob's reading of one round before any policy is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Valid(u8),
    Loss,
    Invalid,
    Burned,
}

impl Response {
    pub fn of(outcomes: &[DetectorOutcome]) -> Response {
        if outcomes.contains(&DetectorOutcome::Burned) {
            return Response::Burned;
        }
        let mut fired = outcomes.iter().enumerate().filter(|(_, o)| o.clicked());
        match (fired.next(), fired.next()) {
            (None, _) => Response::Loss,
            (Some((i, _)), None) => Response::Valid((i % 2) as u8),
            _ => Response::Invalid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub valid: [f64; 2],
    pub loss: f64,
    pub invalid: f64,
    pub burned: f64,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.valid[0] + self.valid[1] + self.loss + self.invalid + self.burned
    }

    pub fn valid_total(&self) -> f64 {
        self.valid[0] + self.valid[1]
    }

    fn add(&mut self, response: Response, weight: f64) {
        match response {
            Response::Valid(b) => self.valid[b as usize] += weight,
            Response::Loss => self.loss += weight,
            Response::Invalid => self.invalid += weight,
            Response::Burned => self.burned += weight,
        }
    }

    fn scaled(self, f: f64) -> Self {
        Self {
            valid: [self.valid[0] * f, self.valid[1] * f],
            loss: self.loss * f,
            invalid: self.invalid * f,
            burned: self.burned * f,
        }
    }

    fn map(self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            valid: [g(self.valid[0]), g(self.valid[1])],
            loss: g(self.loss),
            invalid: g(self.invalid),
            burned: g(self.burned),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// Bob's response to one incident, per basis. For a passive receiver the
/// basis is the arm that measured, `weights` holds the arm probabilities and
/// each distribution is conditional on its arm; a basis never reached is
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseProfile {
    pub per_basis: [Option<OutcomeDistribution>; 2],
    pub weights: [f64; 2],
    /// Monte-Carlo standard errors of each entry.
    pub standard_errors: Option<[OutcomeDistribution; 2]>,
}

impl ResponseProfile {
    pub fn basis(&self, basis: Basis) -> Option<&OutcomeDistribution> {
        self.per_basis[basis.index()].as_ref()
    }

    fn from_tallies(tallies: [OutcomeDistribution; 2], weights: [f64; 2], samples: Option<[f64; 2]>) -> Self {
        let per_basis = [0, 1].map(|i| (weights[i] > 1e-15).then(|| tallies[i].scaled(1.0 / weights[i])));
        let standard_errors = samples.map(|n| {
            [0, 1].map(|i| match per_basis[i] {
                Some(d) if n[i] > 0.0 => d.map(|p| (p * (1.0 - p) / n[i]).sqrt()),
                _ => OutcomeDistribution::default(),
            })
        });
        let total: f64 = weights.iter().sum();
        Self { per_basis, weights: weights.map(|w| w / total), standard_errors }
    }
}

fn setting_for(receiver: &ReceiverConfig, basis: Basis) -> Setting {
    match receiver {
        ReceiverConfig::Active(_) => Setting::Active(basis),
        ReceiverConfig::Passive(_) => Setting::Passive { forced_arm: None },
    }
}

pub fn classify_response(
    receiver: &ReceiverConfig,
    incident: &Incident,
    evaluation: Evaluation,
) -> Result<ResponseProfile, DeviceError> {
    let mut tallies = [OutcomeDistribution::default(); 2];
    let mut weights = [0.0; 2];
    let active = matches!(receiver, ReceiverConfig::Active(_));
    match evaluation {
        Evaluation::Exact => {
            if active {
                for basis in Basis::BOTH {
                    for branch in receiver.branches(setting_for(receiver, basis), incident)? {
                        tallies[basis.index()].add(Response::of(&branch.outcomes), branch.probability);
                    }
                    weights[basis.index()] = 1.0;
                }
            } else {
                for branch in receiver.branches(Setting::Passive { forced_arm: None }, incident)? {
                    let response = Response::of(&branch.outcomes);
                    match resolve_arm(&branch.outcomes, branch.lit) {
                        Some(arm) => {
                            tallies[arm.index()].add(response, branch.probability);
                            weights[arm.index()] += branch.probability;
                        }
                        None => {
                            for arm in Basis::BOTH {
                                tallies[arm.index()].add(response, branch.probability / 2.0);
                                weights[arm.index()] += branch.probability / 2.0;
                            }
                        }
                    }
                }
            }
            Ok(ResponseProfile::from_tallies(tallies, weights, None))
        }
        Evaluation::MonteCarlo { trials, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if active {
                for basis in Basis::BOTH {
                    for _ in 0..trials {
                        let mut rx = Receiver::new(receiver.clone());
                        let outcomes = rx.receive_active(basis, incident, &mut rng)?;
                        tallies[basis.index()].add(Response::of(&outcomes), 1.0);
                    }
                    weights[basis.index()] = trials as f64;
                }
            } else {
                for _ in 0..trials {
                    let mut rx = Receiver::new(receiver.clone());
                    let reading = rx.receive_passive(incident, None, &mut rng)?;
                    tallies[reading.arm.index()].add(Response::of(&reading.outcomes), 1.0);
                    weights[reading.arm.index()] += 1.0;
                }
            }
            Ok(ResponseProfile::from_tallies(tallies, weights, Some(weights)))
        }
    }
}
