//! BB84 rounds end to end: preparation, channel, eavesdropper, receiver,
//! sifting, error estimation and the abort decision.

mod config;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{ideal_measure, AttackContext, AttackError, AttackStrategy, EveClaim, EveRecord, Interception};
use crate::devices::{DetectorOutcome, DeviceError, Incident, Receiver, ReceiverConfig};
use crate::photonic::{Basis, Path, Pulse, PureState, StateError, TimeBin};

pub use config::{ConfigError, InvalidPolicy, RunConfig, SourceConfig};

/// Alice's signal pulse: the middle time bin on the regular path.
pub fn signal_pulse() -> Pulse {
    Pulse::new(TimeBin::T_HALF, Path::Regular)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("injected Bob basis sequence has {got} entries for {needed} rounds")]
    BobBases { needed: u64, got: usize },
}

/// Stream identifiers: each consumer of randomness owns one ChaCha stream of
/// the run seed, so changing one consumer never shifts another's draws.
mod stream {
    pub const ALICE: u64 = 1;
    pub const BOB_BASIS: u64 = 2;
    pub const EVE: u64 = 3;
    pub const CHANNEL: u64 = 4;
    pub const BOB_MEASURE: u64 = 5;
    pub const SAMPLING: u64 = 6;
    pub const POST: u64 = 7;
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeClass {
    Valid(u8),
    Loss,
    Invalid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub bit: u8,
    pub basis: Basis,
    pub photons: u32,
    pub state: PureState,
}

/// Uniform bit and basis; two identically polarized photons with
/// probability `multi_photon_prob`, otherwise one.
pub fn alice_prepare<R: RngCore + ?Sized>(source: &SourceConfig, rng: &mut R) -> Emission {
    let bit = u8::from(rng.random::<bool>());
    let basis = if rng.random::<bool>() { Basis::Hadamard } else { Basis::Computational };
    let photons = if rng.random_bool(source.multi_photon_prob) { 2 } else { 1 };
    let state = PureState::encode_polarized(basis, bit, photons, signal_pulse()).expect("two photons fit the cap");
    Emission { bit, basis, photons, state }
}

/// Drops each photon independently with probability `loss`.
pub fn apply_channel_loss<R: RngCore + ?Sized>(emission: &Emission, loss: f64, rng: &mut R) -> PureState {
    if loss == 0.0 {
        return emission.state.clone();
    }
    let survivors = (0..emission.photons).filter(|_| !rng.random_bool(loss)).count() as u32;
    if survivors == emission.photons {
        emission.state.clone()
    } else {
        PureState::encode_polarized(emission.basis, emission.bit, survivors, signal_pulse())
            .expect("fewer photons than emitted fit the cap")
    }
}

/// Bob's classification of the detectors he read this round. Detector `i`
/// reports bit `i % 2`. A burned detector reads as a loss; the run loop
/// separately raises the burned flag.
pub fn classify_outcome(clicks: &[DetectorOutcome], policy: InvalidPolicy) -> OutcomeClass {
    if clicks.contains(&DetectorOutcome::Burned) {
        return OutcomeClass::Loss;
    }
    let mut fired = clicks.iter().enumerate().filter(|(_, o)| o.clicked());
    match (fired.next(), fired.next()) {
        (None, _) => OutcomeClass::Loss,
        (Some((i, _)), None) => OutcomeClass::Valid((i % 2) as u8),
        (Some(_), Some(_)) => match policy {
            InvalidPolicy::AsError => OutcomeClass::Invalid,
            InvalidPolicy::AsLoss => OutcomeClass::Loss,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub alice_bit: u8,
    pub alice_basis: Basis,
    pub photons_emitted: u32,
    pub eve: Option<EveRecord>,
    pub eve_claim: EveClaim,
    pub delivered: Incident,
    pub forced_arm: Option<Basis>,
    pub bob_basis: Basis,
    pub raw_clicks: Vec<DetectorOutcome>,
    pub outcome: OutcomeClass,
    /// Bit Bob records for an invalid round kept as an error.
    pub invalid_bit: Option<u8>,
}

impl RoundRecord {
    pub fn bases_match(&self) -> bool {
        self.alice_basis == self.bob_basis
    }

    pub fn double_click(&self) -> bool {
        self.raw_clicks.iter().filter(|o| o.clicked()).count() >= 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiftedPair {
    pub round: usize,
    pub alice_bit: u8,
    pub bob_bit: u8,
    /// Invalid round kept as a known error.
    pub flagged_error: bool,
}

impl SiftedPair {
    pub fn is_error(&self) -> bool {
        self.flagged_error || self.alice_bit != self.bob_bit
    }
}

/// Rounds with matching bases and a key bit, in round order.
pub fn sift(records: &[RoundRecord]) -> Vec<SiftedPair> {
    records
        .iter()
        .filter(|r| r.bases_match())
        .filter_map(|r| {
            let (bob_bit, flagged_error) = match r.outcome {
                OutcomeClass::Valid(b) => (b, false),
                OutcomeClass::Invalid => (r.invalid_bit.unwrap_or(0), true),
                OutcomeClass::Loss => return None,
            };
            Some(SiftedPair { round: r.round, alice_bit: r.alice_bit, bob_bit, flagged_error })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QberEstimate {
    pub qber: f64,
    pub tested: usize,
    pub remaining: Vec<SiftedPair>,
}

/// Reveals `ceil(test_fraction * n)` pairs chosen without replacement and
/// removes them from the key. `None` for an empty key.
pub fn estimate_qber<R: RngCore + ?Sized>(
    sifted: &[SiftedPair],
    test_fraction: f64,
    rng: &mut R,
) -> Option<QberEstimate> {
    let n = sifted.len();
    if n == 0 {
        return None;
    }
    let tested = ((test_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut revealed = vec![false; n];
    for i in index::sample(rng, n, tested) {
        revealed[i] = true;
    }
    let errors = sifted.iter().zip(&revealed).filter(|(p, r)| **r && p.is_error()).count();
    let remaining = sifted.iter().zip(&revealed).filter(|(_, r)| !**r).map(|(p, _)| *p).collect();
    Some(QberEstimate { qber: errors as f64 / tested as f64, tested, remaining })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Error rate on the revealed test bits; absent when nothing was sifted.
    pub qber: Option<f64>,
    pub loss_rate: f64,
    pub invalid_rate: f64,
    pub double_click_rate: f64,
    pub aborted: bool,
    pub eve_info: f64,
    pub sifted_key_length: usize,
    pub burned: bool,
    pub rounds_executed: u64,
    pub retained_key_length: usize,
}

/// One bit of the key left after error estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyBit {
    pub round: usize,
    pub alice_bit: u8,
    pub bob_bit: u8,
    pub eve_bit: u8,
    pub photons_emitted: u32,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub records: Vec<RoundRecord>,
    pub key: Vec<KeyBit>,
}

impl RunOutcome {
    /// Fraction of retained key bits Eve states correctly, over the bits
    /// selected by `keep`. `None` if no bit is selected.
    pub fn eve_info_where(&self, keep: impl Fn(&KeyBit) -> bool) -> Option<f64> {
        let selected: Vec<&KeyBit> = self.key.iter().filter(|k| keep(k)).collect();
        if selected.is_empty() {
            return None;
        }
        let right = selected.iter().filter(|k| k.eve_bit == k.bob_bit).count();
        Some(right as f64 / selected.len() as f64)
    }
}

/// A configured run. The strategy normally comes from the configuration;
/// tests may inject their own strategy or Bob's basis sequence.
pub struct Simulation<'a> {
    config: &'a RunConfig,
    strategy: Option<Box<dyn AttackStrategy>>,
    bob_bases: Option<Vec<Basis>>,
}

impl<'a> Simulation<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        Self { config, strategy: None, bob_bases: None }
    }

    pub fn with_strategy(mut self, strategy: Box<dyn AttackStrategy>) -> Self {
        self.strategy = Some(strategy);
        self
    }

    /// Replaces Bob's random basis draws (active receivers).
    pub fn with_bob_bases(mut self, bases: Vec<Basis>) -> Self {
        self.bob_bases = Some(bases);
        self
    }

    pub fn run(self) -> Result<RunOutcome, RunError> {
        let cfg = self.config;
        cfg.validate()?;
        let ctx = AttackContext {
            receiver: &cfg.receiver,
            multi_photon_prob: cfg.source.multi_photon_prob,
            channel_loss: cfg.channel_loss,
        };
        let strategy = match self.strategy {
            Some(s) => {
                s.check(&ctx)?;
                s
            }
            None => cfg.attack.build(&ctx)?,
        };
        if let Some(bases) = &self.bob_bases {
            if (bases.len() as u64) < cfg.rounds {
                return Err(RunError::BobBases { needed: cfg.rounds, got: bases.len() });
            }
        }

        let mut alice = stream_rng(cfg.seed, stream::ALICE);
        let mut bob_basis_rng = stream_rng(cfg.seed, stream::BOB_BASIS);
        let mut eve = stream_rng(cfg.seed, stream::EVE);
        let mut channel = stream_rng(cfg.seed, stream::CHANNEL);
        let mut measure = stream_rng(cfg.seed, stream::BOB_MEASURE);

        let mut receiver = Receiver::new(cfg.receiver.clone());
        let active = matches!(cfg.receiver, ReceiverConfig::Active(_));
        let signal = signal_pulse();
        let mut records = Vec::with_capacity(cfg.rounds.min(1 << 20) as usize);
        let mut burned = false;

        for round in 0..cfg.rounds as usize {
            let emission = alice_prepare(&cfg.source, &mut alice);
            let emitted = if strategy.intercepts_at_source() {
                emission.state.clone()
            } else {
                apply_channel_loss(&emission, cfg.channel_loss, &mut channel)
            };
            let drawn = match &self.bob_bases {
                Some(bases) => bases[round],
                None if bob_basis_rng.random::<bool>() => Basis::Hadamard,
                None => Basis::Computational,
            };
            let oracle = (active && strategy.uses_basis_oracle()).then_some(drawn);
            let interception = Interception { emitted: &emitted, signal, bob_basis: oracle };
            let action = strategy.intercept(&interception, &mut eve)?;

            let (bob_basis, raw_clicks) = if active {
                (drawn, receiver.receive_active(drawn, &action.incident, &mut measure)?.to_vec())
            } else {
                let reading = receiver.receive_passive(&action.incident, action.forced_arm, &mut measure)?;
                (reading.arm, reading.outcomes.to_vec())
            };
            let outcome = classify_outcome(&raw_clicks, cfg.invalid_policy);
            let invalid_bit = (outcome == OutcomeClass::Invalid).then(|| u8::from(measure.random::<bool>()));
            let burned_now = raw_clicks.contains(&DetectorOutcome::Burned);
            records.push(RoundRecord {
                round,
                alice_bit: emission.bit,
                alice_basis: emission.basis,
                photons_emitted: emission.photons,
                eve: action.record,
                eve_claim: action.claim,
                delivered: action.incident,
                forced_arm: action.forced_arm,
                bob_basis,
                raw_clicks,
                outcome,
                invalid_bit,
            });
            if burned_now {
                // the result is known to be invalid; nothing after it counts
                burned = true;
                break;
            }
        }
        Ok(finish(cfg, records, burned))
    }
}

fn finish(cfg: &RunConfig, records: Vec<RoundRecord>, burned: bool) -> RunOutcome {
    let executed = records.len();
    let matched: Vec<&RoundRecord> = records.iter().filter(|r| r.bases_match()).collect();
    let rate = |count: usize, total: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    let losses = matched.iter().filter(|r| r.outcome == OutcomeClass::Loss).count();
    let invalids = matched.iter().filter(|r| r.outcome == OutcomeClass::Invalid).count();
    let double_clicks = records.iter().filter(|r| r.double_click()).count();

    let sifted = sift(&records);
    let mut sampling = stream_rng(cfg.seed, stream::SAMPLING);
    let estimate = estimate_qber(&sifted, cfg.test_fraction, &mut sampling);

    let mut post = stream_rng(cfg.seed, stream::POST);
    let remaining = estimate.as_ref().map(|e| e.remaining.as_slice()).unwrap_or(&[]);
    let key: Vec<KeyBit> = remaining
        .iter()
        .map(|p| {
            let r = &records[p.round];
            KeyBit {
                round: p.round,
                alice_bit: p.alice_bit,
                bob_bit: p.bob_bit,
                eve_bit: resolve_claim(&r.eve_claim, r.alice_basis, &mut post),
                photons_emitted: r.photons_emitted,
            }
        })
        .collect();
    let eve_right = key.iter().filter(|k| k.eve_bit == k.bob_bit).count();

    let qber = estimate.as_ref().map(|e| e.qber);
    let aborted = burned || qber.is_none_or(|q| q > cfg.abort_qber);
    let report = RunReport {
        qber,
        loss_rate: rate(losses, matched.len()),
        invalid_rate: rate(invalids, matched.len()),
        double_click_rate: rate(double_clicks, executed),
        aborted,
        eve_info: rate(eve_right, key.len()),
        sifted_key_length: sifted.len(),
        burned,
        rounds_executed: executed as u64,
        retained_key_length: key.len(),
    };
    RunOutcome { report, records, key }
}

/// Eve's bit once Alice's basis is public.
fn resolve_claim(claim: &EveClaim, alice_basis: Basis, rng: &mut ChaCha8Rng) -> u8 {
    let guess = |rng: &mut ChaCha8Rng| u8::from(rng.random::<bool>());
    match claim {
        EveClaim::Known(b) => *b,
        EveClaim::Guess => guess(rng),
        EveClaim::Deferred(stored) => {
            let measured = stored
                .pulses()
                .first()
                .and_then(|pulse| ideal_measure(stored, *pulse, alice_basis, rng).ok().flatten());
            measured.unwrap_or_else(|| guess(rng))
        }
    }
}

/// Runs a configuration with its configured attack.
pub fn run(config: &RunConfig) -> Result<RunReport, RunError> {
    Simulation::new(config).run().map(|o| o.report)
}
