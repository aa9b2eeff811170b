//! Reversed-space analysis: round trips through Bob's optics, coverage of the
//! enumerated space, and end-to-end soundness of every synthesized recipe.

use qkdsim::analyzer::{
    classify_response, enumerate_protocol_space, reverse_bob_unitary, synthesize_faked_states, DesiredOutcome,
    Evaluation, SpaceBounds, Synthesis,
};
use qkdsim::attacks::RecipeAttack;
use qkdsim::devices::{Incident, Light, ReceiverConfig};
use qkdsim::photonic::{Basis, OccupationVector, PureState, TimeBin};
use qkdsim::protocol::{InvalidPolicy, RunConfig, Simulation};
use qkdsim::reports::{analyze_receiver, AnalysisOptions, ReceiverPreset};

fn exact_bounds() -> SpaceBounds {
    SpaceBounds::timed(4)
}

fn full_bounds() -> SpaceBounds {
    let o = AnalysisOptions::default();
    SpaceBounds::timed(o.n_max).with_grid(o.intensities, o.backgrounds)
}

fn synthesize(receiver: &ReceiverConfig, candidates: &[Incident]) -> Synthesis {
    synthesize_faked_states(receiver, candidates, 0.0, InvalidPolicy::AsError, Evaluation::Exact).unwrap()
}

fn run_recipe(receiver: &ReceiverConfig, synthesis: &Synthesis, seed: u64) -> qkdsim::protocol::RunReport {
    let recipe = synthesis.recipe().expect("recipe").clone();
    let cfg = RunConfig { rounds: 20_000, seed, receiver: receiver.clone(), ..RunConfig::default() };
    Simulation::new(&cfg).with_strategy(Box::new(RecipeAttack { recipe })).run().unwrap().report
}

#[test]
fn reversed_states_produce_the_desired_click() {
    for preset in ReceiverPreset::ALL {
        let receiver = preset.receiver();
        let mut reachable = 0;
        for basis in Basis::BOTH {
            for bit in 0..2 {
                for time_bin in TimeBin::STANDARD {
                    let Ok(state) = reverse_bob_unitary(&receiver, DesiredOutcome { basis, bit, time_bin }) else {
                        continue;
                    };
                    reachable += 1;
                    let profile = classify_response(&receiver, &Incident::quantum(state), Evaluation::Exact).unwrap();
                    let dist = profile.basis(basis).unwrap();
                    assert!(
                        (dist.valid[bit as usize] - 1.0).abs() < 1e-9,
                        "{} {basis} {bit} {time_bin}: {dist:?}",
                        preset.name()
                    );
                    if matches!(receiver, ReceiverConfig::Passive(_)) {
                        assert!((profile.weights[basis.index()] - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
        assert!(reachable > 0 || preset == ReceiverPreset::Gated, "{}", preset.name());
    }
}

#[test]
fn every_basis_state_is_a_candidate() {
    let bounds = exact_bounds();
    let candidates = bounds.enumerate().unwrap();
    let modes: Vec<_> = bounds.modes.iter().copied().collect();
    // all occupations of 6 modes with at most 2 photons
    for a in 0..modes.len() {
        for b in a..modes.len() {
            let occ = OccupationVector::from_counts([(modes[a], 1), (modes[b], 1)]);
            let want = PureState::basis_state(modes.clone(), occ).unwrap();
            let present = candidates.iter().any(|c| match &c.light {
                Light::Quantum(s) => (s.inner(&want).norm() - 1.0).abs() < 1e-12,
                Light::Bright(_) => false,
            });
            assert!(present, "missing {want}");
        }
    }
    let again = enumerate_protocol_space(&bounds.modes, 4, &[], &[], bounds.cap).unwrap();
    assert_eq!(candidates, again);
}

#[test]
fn ideal_receiver_cannot_be_faked() {
    let ideal = ReceiverPreset::Ideal.receiver();
    assert_eq!(synthesize(&ideal, &exact_bounds().enumerate().unwrap()), Synthesis::NotFound);
    assert_eq!(synthesize(&ideal, &full_bounds().enumerate().unwrap()), Synthesis::NotFound);
    let (report, recipe) = analyze_receiver("ideal", &ideal, &AnalysisOptions::default()).unwrap();
    assert!(recipe.is_none());
    assert!(report.thresholds.iter().all(|p| p.estimate.is_none()));
}

#[test]
fn gated_receiver_falls_to_time_shifted_photons() {
    let gated = ReceiverPreset::Gated.receiver();
    let synthesis = synthesize(&gated, &exact_bounds().enumerate().unwrap());
    let recipe = synthesis.recipe().unwrap();
    for basis in Basis::BOTH {
        for bit in 0..2 {
            let Light::Quantum(s) = &recipe.incident(basis, bit).light else { panic!("bright entry") };
            let expected_bin = if basis == Basis::Computational { TimeBin::T0 } else { TimeBin::T1 };
            let lit =
                s.terms().flat_map(|(occ, _)| occ.iter().filter(|(_, n)| **n > 0).map(|(m, _)| *m).collect::<Vec<_>>());
            assert!(lit.into_iter().all(|m| m.time_bin == expected_bin), "{basis} {bit}: {s}");
            assert_eq!(s.photon_number(), Some(1));
        }
    }
    assert!((recipe.achieved_loss - 0.5).abs() < 1e-9);
    let r = run_recipe(&gated, &synthesis, 3);
    assert_eq!(r.qber, Some(0.0));
    assert_eq!(r.eve_info, 1.0);
}

#[test]
fn blindable_receiver_yields_the_bright_illumination_recipe() {
    let blindable = ReceiverPreset::Blindable.receiver();
    assert_eq!(synthesize(&blindable, &exact_bounds().enumerate().unwrap()), Synthesis::NotFound);
    let synthesis = synthesize(&blindable, &full_bounds().enumerate().unwrap());
    let recipe = synthesis.recipe().unwrap();
    assert!(recipe.background >= 50.0);
    for e in recipe.entries() {
        let Light::Bright(p) = &e.incident.light else { panic!("quantum entry {}", e.incident.describe()) };
        assert!((1000.0..2000.0).contains(&p.total_intensity()), "{}", e.incident.describe());
    }
    let r = run_recipe(&blindable, &synthesis, 4);
    assert_eq!(r.qber, Some(0.0));
    assert_eq!(r.eve_info, 1.0);
    assert!((r.loss_rate - 0.5).abs() < 0.02);
}

#[test]
fn every_recipe_is_sound_end_to_end() {
    let options = AnalysisOptions { verify_rounds: 10_000, ..AnalysisOptions::default() };
    for preset in ReceiverPreset::ALL {
        let receiver = preset.receiver();
        let (report, recipe) = analyze_receiver(preset.name(), &receiver, &options).unwrap();
        match (preset, recipe) {
            (ReceiverPreset::Ideal, r) => assert!(r.is_none()),
            (_, None) => panic!("{} should be vulnerable", preset.name()),
            (_, Some(recipe)) => {
                let v = report.verification.unwrap();
                assert_eq!(v.qber, Some(0.0), "{}", preset.name());
                assert_eq!(v.eve_info, 1.0, "{}", preset.name());
                assert!(!v.aborted);
                let matched: f64 = 10_000.0 / 2.0;
                assert!((v.loss_rate - recipe.achieved_loss).abs() < 4.0 * (0.25 / matched).sqrt() + 1e-12);
            }
        }
    }
}
