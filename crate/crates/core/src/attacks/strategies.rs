use rand::{Rng, RngCore};

use super::{
    ideal_measure, random_basis, AttackContext, AttackError, AttackStrategy, EveAction, EveClaim, EveRecord,
    Interception,
};
use crate::analyzer::AttackRecipe;
use crate::devices::{Incident, ReceiverConfig, Setting};
use crate::photonic::{
    Basis, LinearPolarization, MacroPulse, Path, Pulse, PureState, TimeBin, TwoModeUnitary, DEFAULT_PHOTON_CAP,
};

fn precondition(attack: &str, reason: impl Into<String>) -> AttackError {
    AttackError::Precondition { attack: attack.to_string(), reason: reason.into() }
}

fn refused(attack: &str, reason: impl Into<String>) -> AttackError {
    AttackError::Refused { attack: attack.to_string(), reason: reason.into() }
}

/// Measures Alice's light in `basis` and lets `resend` build Bob's incident
/// from the result. Vacuum is answered with `on_vacuum` and a guess.
fn measure_resend(
    round: &Interception<'_>,
    basis: Basis,
    rng: &mut dyn RngCore,
    on_vacuum: impl FnOnce() -> Incident,
    resend: impl FnOnce(Basis, u8) -> Result<Incident, AttackError>,
) -> Result<EveAction, AttackError> {
    match ideal_measure(round.emitted, round.signal, basis, rng)? {
        None => Ok(EveAction::passthrough(on_vacuum())),
        Some(bit) => Ok(EveAction {
            incident: resend(basis, bit)?,
            claim: EveClaim::Known(bit),
            forced_arm: None,
            record: Some(EveRecord { basis, bit }),
        }),
    }
}

fn single_photon(basis: Basis, bit: u8, time_bin: TimeBin) -> Incident {
    Incident::quantum(PureState::encode_qubit(basis, bit, time_bin, Path::Regular))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoAttack;

impl AttackStrategy for NoAttack {
    fn name(&self) -> &str {
        "none"
    }

    fn check(&self, _: &AttackContext<'_>) -> Result<(), AttackError> {
        Ok(())
    }

    fn intercept(&self, round: &Interception<'_>, _: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        Ok(EveAction::passthrough(Incident::quantum(round.emitted.clone())))
    }
}

/// Measure in a random basis, resend one photon carrying the result.
#[derive(Debug, Clone, Copy, Default)]
pub struct InterceptResend;

impl AttackStrategy for InterceptResend {
    fn name(&self) -> &str {
        "intercept_resend"
    }

    fn check(&self, _: &AttackContext<'_>) -> Result<(), AttackError> {
        Ok(())
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        let t = round.signal.time_bin;
        measure_resend(
            round,
            basis,
            rng,
            || Incident::quantum(round.emitted.clone()),
            |b, bit| Ok(single_photon(b, bit, t)),
        )
    }
}

/// Measure-resend with `k` identical photons. An active receiver measuring
/// in the other basis sees both detectors fire.
#[derive(Debug, Clone, Copy)]
pub struct TrojanPony {
    pub k: u32,
}

impl AttackStrategy for TrojanPony {
    fn name(&self) -> &str {
        "trojan_pony"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        if self.k < 2 {
            return Err(precondition(self.name(), format!("k must be at least 2, got {}", self.k)));
        }
        if !matches!(ctx.receiver, ReceiverConfig::Active(_)) {
            return Err(precondition(self.name(), "needs an active-basis receiver"));
        }
        Ok(())
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        let signal = round.signal;
        let k = self.k;
        measure_resend(
            round,
            basis,
            rng,
            || Incident::quantum(round.emitted.clone()),
            |b, bit| {
                Ok(if k <= DEFAULT_PHOTON_CAP {
                    Incident::quantum(PureState::encode_polarized(b, bit, k, signal)?)
                } else {
                    Incident::bright(MacroPulse::polarized(signal, LinearPolarization::of_bb84(b, bit), f64::from(k))?)
                })
            },
        )
    }
}

/// Against a passive receiver whose computational detectors see `t0` but not
/// `t1` and whose Hadamard detectors see `t1` but not `t0`: resend the
/// measured qubit at `t0` (computational) or `t1` (Hadamard).
#[derive(Debug, Clone, Copy, Default)]
pub struct FakedStatesTiming;

impl FakedStatesTiming {
    fn shift(basis: Basis) -> TimeBin {
        match basis {
            Basis::Computational => TimeBin::T0,
            Basis::Hadamard => TimeBin::T1,
        }
    }
}

impl AttackStrategy for FakedStatesTiming {
    fn name(&self) -> &str {
        "faked_states_timing"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        let ReceiverConfig::Passive(p) = ctx.receiver else {
            return Err(precondition(self.name(), "needs a passive receiver"));
        };
        let sees = |b: Basis, own: TimeBin, other: TimeBin| {
            let models = match b {
                Basis::Computational => &p.computational,
                Basis::Hadamard => &p.hadamard,
            };
            models.iter().all(|m| m.in_gate(own) && !m.in_gate(other))
        };
        if !sees(Basis::Computational, TimeBin::T0, TimeBin::T1) || !sees(Basis::Hadamard, TimeBin::T1, TimeBin::T0) {
            return Err(precondition(
                self.name(),
                "computational detectors must be gated to include t0 and exclude t1, hadamard detectors the reverse",
            ));
        }
        Ok(())
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        measure_resend(
            round,
            basis,
            rng,
            || Incident::quantum(round.emitted.clone()),
            |b, bit| Ok(single_photon(b, bit, Self::shift(b))),
        )
    }
}

/// Measure-resend that also steers a compromised passive receiver onto the
/// arm of Eve's basis.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedApparatus;

impl AttackStrategy for FixedApparatus {
    fn name(&self) -> &str {
        "fixed_apparatus"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        match ctx.receiver {
            ReceiverConfig::Passive(p) if p.compromised => Ok(()),
            ReceiverConfig::Passive(_) => Err(refused(self.name(), "the passive receiver has not been compromised")),
            ReceiverConfig::Active(_) => Err(precondition(self.name(), "needs a passive receiver")),
        }
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        let t = round.signal.time_bin;
        let mut action = measure_resend(
            round,
            basis,
            rng,
            || Incident::quantum(round.emitted.clone()),
            |b, bit| Ok(single_photon(b, bit, t)),
        )?;
        action.forced_arm = Some(basis);
        Ok(action)
    }
}

/// Blind every detector with continuous light, then resend the measured bit
/// as a pulse that only clicks a detector receiving all of it.
#[derive(Debug, Clone, Copy)]
pub struct BrightIllumination {
    pub k_pulse: f64,
    pub background: f64,
    /// Probability of sending no pulse, used to reproduce the channel loss
    /// Bob expects.
    pub suppress: Option<f64>,
}

impl BrightIllumination {
    pub fn new(k_pulse: f64, background: f64) -> Self {
        Self { k_pulse, background, suppress: None }
    }

    /// Replaces a channel with transmission loss `loss`. Bob's basis
    /// mismatch alone already loses half the sifted rounds, so `loss` must be
    /// at least 0.5.
    pub fn matching_loss(k_pulse: f64, background: f64, loss: f64) -> Self {
        Self { k_pulse, background, suppress: Some(2.0 * loss - 1.0) }
    }
}

impl AttackStrategy for BrightIllumination {
    fn name(&self) -> &str {
        "bright_illumination"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        let ReceiverConfig::Active(_) = ctx.receiver else {
            return Err(precondition(self.name(), "needs an active-basis receiver"));
        };
        let (k, bg) = (self.k_pulse, self.background);
        for (i, m) in ctx.receiver.detector_models().iter().enumerate() {
            let (n1, l, n2) = (m.n1() as f64, m.linear_threshold() as f64, m.n2() as f64);
            let fail = |what: String| Err(precondition(self.name(), format!("detector {i}: {what}")));
            if bg < n1 {
                return fail(format!("background >= N1 violated ({bg} < {n1})"));
            }
            if k <= n1 {
                return fail(format!("N1 < k_pulse violated ({k} <= {n1})"));
            }
            if k < l {
                return fail(format!("k_pulse >= L violated ({k} < {l})"));
            }
            if k / 2.0 >= l {
                return fail(format!("k_pulse/2 < L violated ({} >= {l})", k / 2.0));
            }
            if k + bg >= n2 {
                return fail(format!("k_pulse + background < N2 violated ({} >= {n2})", k + bg));
            }
            if !m.in_gate(TimeBin::T_HALF) {
                return fail("gate does not cover the signal time bin t_half".into());
            }
        }
        if let Some(q) = self.suppress {
            if !(0.0..=1.0).contains(&q) {
                return Err(precondition(
                    self.name(),
                    format!("matching channel_loss needs 0.5 <= channel_loss, got {}", ctx.channel_loss),
                ));
            }
        }
        Ok(())
    }

    fn intercepts_at_source(&self) -> bool {
        self.suppress.is_some()
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        let signal = round.signal;
        let (k, bg) = (self.k_pulse, self.background);
        let blinding = || Incident::bright(MacroPulse::dark()).with_background(bg);
        let mut action = measure_resend(round, basis, rng, blinding, |b, bit| {
            let pulse = MacroPulse::polarized(signal, LinearPolarization::of_bb84(b, bit), k)?;
            Ok(Incident::bright(pulse).with_background(bg))
        })?;
        if let Some(q) = self.suppress {
            if rng.random_bool(q) {
                action.incident = blinding();
            }
        }
        Ok(action)
    }
}

/// Photon-number splitting: keep one photon of every multi-photon pulse and
/// measure it after the basis announcement; forward everything else.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pns;

impl AttackStrategy for Pns {
    fn name(&self) -> &str {
        "pns"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        if ctx.multi_photon_prob > 0.0 {
            Ok(())
        } else {
            Err(precondition(self.name(), "source never emits multi-photon pulses (multi_photon_prob = 0)"))
        }
    }

    fn intercept(&self, round: &Interception<'_>, _: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        // the nondemolition photon count
        let photons = round.emitted.photon_number().unwrap_or(0);
        if photons < 2 {
            return Ok(EveAction::passthrough(Incident::quantum(round.emitted.clone())));
        }
        let (kept, forwarded) = split_one_photon(round.emitted, round.signal)?;
        Ok(EveAction {
            incident: Incident::quantum(forwarded),
            claim: EveClaim::Deferred(kept),
            forced_arm: None,
            record: None,
        })
    }
}

/// Removes exactly one photon from `pulse` into Eve's memory without
/// touching polarization: a polarization-independent beam splitter into the
/// [`Path::Eve`] pulse, conditioned on one photon arriving there. For photons
/// sharing a polarization the two outputs factorize.
pub fn split_one_photon(state: &PureState, pulse: Pulse) -> Result<(PureState, PureState), AttackError> {
    let memory = Pulse::new(pulse.time_bin, Path::Eve);
    let splitter = TwoModeUnitary::beam_splitter(0.5)?;
    let mut mixed = state.clone();
    for (a, b) in [(pulse.h(), memory.h()), (pulse.v(), memory.v())] {
        mixed = mixed.apply_two_mode((a, b), (a, b), &splitter)?;
    }
    let stolen = mixed
        .project(|occ| occ.get(&memory.h()) + occ.get(&memory.v()) == 1)
        .ok_or_else(|| precondition("pns", "no photon to split"))?;
    let memory_modes = [memory.h(), memory.v()].into_iter().collect();
    stolen
        .factor(&memory_modes)
        .ok_or_else(|| precondition("pns", "photons in the pulse do not share one polarization"))
}

/// Reads Bob's basis through the leak and measures in it, so Bob always
/// agrees with Eve.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasisProbe;

impl AttackStrategy for BasisProbe {
    fn name(&self) -> &str {
        "basis_probe"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        match ctx.receiver {
            ReceiverConfig::Active(a) if a.basis_leak => Ok(()),
            ReceiverConfig::Active(_) => {
                Err(refused(self.name(), "the receiver does not leak its basis (basis_leak = false)"))
            }
            ReceiverConfig::Passive(_) => Err(refused(self.name(), "needs an active receiver with basis_leak")),
        }
    }

    fn uses_basis_oracle(&self) -> bool {
        true
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = round.bob_basis.ok_or_else(|| refused(self.name(), "no basis oracle available"))?;
        let t = round.signal.time_bin;
        measure_resend(
            round,
            basis,
            rng,
            || Incident::quantum(round.emitted.clone()),
            |b, bit| Ok(single_photon(b, bit, t)),
        )
    }
}

/// Measure-resend with the faked states of a synthesized recipe.
#[derive(Debug, Clone)]
pub struct RecipeAttack {
    pub recipe: AttackRecipe,
}

impl AttackStrategy for RecipeAttack {
    fn name(&self) -> &str {
        "recipe"
    }

    fn check(&self, ctx: &AttackContext<'_>) -> Result<(), AttackError> {
        let setting = match ctx.receiver {
            ReceiverConfig::Active(_) => Setting::Active(Basis::Computational),
            ReceiverConfig::Passive(_) => Setting::Passive { forced_arm: None },
        };
        for entry in self.recipe.entries() {
            ctx.receiver.check_incident(&entry.incident, setting)?;
        }
        Ok(())
    }

    fn intercept(&self, round: &Interception<'_>, rng: &mut dyn RngCore) -> Result<EveAction, AttackError> {
        let basis = random_basis(rng);
        let bg = self.recipe.background;
        measure_resend(
            round,
            basis,
            rng,
            || Incident::bright(MacroPulse::dark()).with_background(bg),
            |b, bit| Ok(self.recipe.incident(b, bit).clone()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{ActiveReceiver, DetectorModel, PassiveReceiver};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn signal() -> Pulse {
        Pulse::new(TimeBin::T_HALF, Path::Regular)
    }

    fn ctx(receiver: &ReceiverConfig) -> AttackContext<'_> {
        AttackContext { receiver, multi_photon_prob: 0.0, channel_loss: 0.0 }
    }

    #[test]
    fn same_basis_resend_reproduces_alice() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..40 {
            let alice = PureState::encode_qubit(Basis::Hadamard, 1, TimeBin::T_HALF, Path::Regular);
            let round = Interception { emitted: &alice, signal: signal(), bob_basis: None };
            let action = InterceptResend.intercept(&round, &mut rng).unwrap();
            let record = action.record.unwrap();
            if record.basis == Basis::Hadamard {
                assert_eq!(record.bit, 1);
                assert_eq!(action.incident, Incident::quantum(alice.clone()));
            }
        }
    }

    #[test]
    fn bright_illumination_sends_k_photons_in_measured_polarization() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alice = PureState::encode_qubit(Basis::Computational, 1, TimeBin::T_HALF, Path::Regular);
        let attack = BrightIllumination::new(1100.0, 100.0);
        for _ in 0..20 {
            let round = Interception { emitted: &alice, signal: signal(), bob_basis: None };
            let action = attack.intercept(&round, &mut rng).unwrap();
            if action.record.unwrap().basis == Basis::Computational {
                let crate::devices::Light::Bright(p) = &action.incident.light else { panic!() };
                assert!((p.intensity(&signal().v()) - 1100.0).abs() < 1e-9);
                assert!(p.intensity(&signal().h()) < 1e-9);
                assert_eq!(action.incident.background, 100.0);
            }
        }
    }

    #[test]
    fn bright_illumination_names_the_violated_inequality() {
        let rx = ReceiverConfig::default();
        let err = BrightIllumination::new(2000.0, 100.0).check(&ctx(&rx)).unwrap_err();
        assert!(err.to_string().contains("k_pulse/2 < L"), "{err}");
        let err = BrightIllumination::new(1100.0, 10.0).check(&ctx(&rx)).unwrap_err();
        assert!(err.to_string().contains("background >= N1"), "{err}");
        let err = BrightIllumination::new(900.0, 100.0).check(&ctx(&rx)).unwrap_err();
        assert!(err.to_string().contains("k_pulse >= L"), "{err}");
        let err = BrightIllumination::new(1100.0, 999_000.0).check(&ctx(&rx)).unwrap_err();
        assert!(err.to_string().contains("< N2"), "{err}");
        assert!(BrightIllumination::new(1100.0, 100.0).check(&ctx(&rx)).is_ok());
    }

    #[test]
    fn refusals() {
        let sealed = ReceiverConfig::Passive(PassiveReceiver::default());
        assert!(matches!(FixedApparatus.check(&ctx(&sealed)), Err(AttackError::Refused { .. })));
        let no_leak = ReceiverConfig::Active(ActiveReceiver::default());
        assert!(matches!(BasisProbe.check(&ctx(&no_leak)), Err(AttackError::Refused { .. })));
        assert!(FakedStatesTiming.check(&ctx(&sealed)).is_err());
        let gated = ReceiverConfig::Passive(PassiveReceiver::overlapping_gates());
        assert!(FakedStatesTiming.check(&ctx(&gated)).is_ok());
        assert!(TrojanPony { k: 1 }.check(&ctx(&no_leak)).is_err());
        assert!(TrojanPony { k: 2 }.check(&ctx(&gated)).is_err());
        assert!(Pns.check(&ctx(&no_leak)).is_err());
        let geiger = DetectorModel::geiger_only(TimeBin::T_HALF, TimeBin::T_HALF).unwrap();
        let ideal = ReceiverConfig::Active(ActiveReceiver { detectors: [geiger; 2], basis_leak: false });
        assert!(BrightIllumination::new(1100.0, 100.0).check(&ctx(&ideal)).is_err());
    }

    #[test]
    fn splitting_keeps_polarization_on_both_sides() {
        let pulse = signal();
        let two = PureState::encode_polarized(Basis::Hadamard, 1, 2, pulse).unwrap();
        let (kept, forwarded) = split_one_photon(&two, pulse).unwrap();
        let expect_fwd = PureState::encode_qubit(Basis::Hadamard, 1, TimeBin::T_HALF, Path::Regular);
        assert!((forwarded.inner(&expect_fwd).norm() - 1.0).abs() < 1e-9);
        let expect_kept = PureState::encode_qubit(Basis::Hadamard, 1, TimeBin::T_HALF, Path::Eve);
        assert!((kept.inner(&expect_kept).norm() - 1.0).abs() < 1e-9);
        assert_eq!(kept.photon_number(), Some(1));
    }
}
