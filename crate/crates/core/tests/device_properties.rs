//! Detector regimes, burn absorption, threshold probing and the equivalence
//! of passive and active basis choice.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qkdsim::analyzer::probe_thresholds;
use qkdsim::devices::{
    ArrivalTally, Detector, DetectorModel, DetectorOutcome, Incident, PassiveReceiver, Receiver, ReceiverConfig,
};
use qkdsim::photonic::{Basis, Path, PureState, TimeBin};

fn bin() -> impl Strategy<Value = TimeBin> {
    (0u8..5).prop_map(TimeBin)
}

/// Valid thresholds `n1 < l <= n2`.
fn thresholds() -> impl Strategy<Value = (u64, u64, u64)> {
    (1u64..5_000, 1u64..50_000, 0u64..2_000_000).prop_map(|(n1, dl, dn)| (n1, n1 + dl, n1 + dl + dn))
}

fn model() -> impl Strategy<Value = DetectorModel> {
    (bin(), bin(), thresholds()).prop_map(|(a, b, (n1, l, n2))| {
        let (open, close) = if a <= b { (a, b) } else { (b, a) };
        DetectorModel::new(open, close, n1, l, n2).unwrap()
    })
}

fn tally() -> impl Strategy<Value = ArrivalTally> {
    prop::collection::btree_map(bin(), 0u64..3_000_000, 0..4)
        .prop_map(|m| m.into_iter().map(|(b, n)| (b, n as f64)).collect())
}

fn in_gate(model: &DetectorModel, arrivals: &ArrivalTally) -> Vec<f64> {
    arrivals.iter().filter(|(b, _)| model.in_gate(**b)).map(|(_, n)| *n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn photons_outside_the_gate_never_matter(
        m in model(),
        arrivals in tally(),
        extra in prop::collection::vec((bin(), 1u64..10_000_000), 1..4),
        background in 0u64..3_000,
    ) {
        let mut padded = arrivals.clone();
        for (b, n) in extra {
            if !m.in_gate(b) {
                *padded.entry(b).or_insert(0.0) += n as f64;
            }
        }
        prop_assert_eq!(m.respond(&arrivals, background as f64), m.respond(&padded, background as f64));
    }

    #[test]
    fn geiger_regime_is_an_ideal_threshold_detector(
        m in model(),
        shares in prop::collection::btree_map(bin(), 0.0f64..1.0, 0..4),
        bg_share in 0.0f64..1.0,
        sparse in any::<bool>(),
    ) {
        // stay strictly inside the Geiger regime: background < N1, total < N2
        let scale = if sparse { 3.0 } else { m.n2() as f64 / 5.0 };
        let arrivals: ArrivalTally = shares.into_iter().map(|(b, s)| (b, (s * scale).floor())).collect();
        let background = (bg_share * m.n1() as f64).floor() as u64;
        let gated = in_gate(&m, &arrivals);
        let total = gated.iter().sum::<f64>() + background as f64;
        prop_assert!(background < m.n1() && total < m.n2() as f64);
        let expect = if total >= 1.0 { DetectorOutcome::Click } else { DetectorOutcome::NoClick };
        prop_assert_eq!(m.respond(&arrivals, background as f64), expect);
    }

    #[test]
    fn blinded_detector_compares_the_strongest_pulse_with_l(
        m in model(),
        arrivals in tally(),
        background in 0u64..10_000,
    ) {
        let gated = in_gate(&m, &arrivals);
        let total = gated.iter().sum::<f64>() + background as f64;
        prop_assume!(background >= m.n1() && total < m.n2() as f64);
        let strongest = gated.iter().copied().fold(0.0, f64::max);
        let expect = if strongest >= m.linear_threshold() as f64 {
            DetectorOutcome::Click
        } else {
            DetectorOutcome::NoClick
        };
        prop_assert_eq!(m.respond(&arrivals, background as f64), expect);
        prop_assert_eq!(m.respond(&arrivals, background as f64), expect);
    }

    #[test]
    fn burned_is_absorbing(m in model(), later in prop::collection::vec((tally(), 0u64..100), 1..8)) {
        let mut d = Detector::new(m);
        let kill: ArrivalTally = [(m.gate().0, m.n2() as f64)].into_iter().collect();
        prop_assert_eq!(d.respond(&kill, 0.0), DetectorOutcome::Burned);
        for (arrivals, bg) in later {
            prop_assert_eq!(d.respond(&arrivals, bg as f64), DetectorOutcome::Burned);
        }
        prop_assert!(d.is_burned());
    }

    #[test]
    fn probe_brackets_contain_the_true_thresholds((n1, l, n2) in thresholds()) {
        let m = DetectorModel::new(TimeBin::T_HALF, TimeBin::T_HALF, n1, l, n2).unwrap();
        let k_max = 1u64 << 24;
        let est = probe_thresholds(&m, k_max).unwrap();
        let (lo1, hi1) = est.n1_bracket;
        prop_assert!(lo1 < n1 && n1 < hi1 && hi1 - lo1 == 2, "{:?} vs N1 {}", est, n1);
        let (lo2, hi2) = est.n2_bracket;
        prop_assert!(lo2 <= n2 && n2 <= hi2, "{:?} vs N2 {}", est, n2);
        prop_assert!(hi2 <= 2 * lo2);
        prop_assert!(hi1 <= lo2);
        let ceil_log2 = 64 - (k_max - 1).leading_zeros() as usize;
        prop_assert!(est.sacrificed <= ceil_log2);
    }
}

#[test]
fn passive_choice_matches_a_random_active_basis() {
    const TRIALS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut active = Receiver::new(ReceiverConfig::default());
    let mut passive = Receiver::new(ReceiverConfig::Passive(PassiveReceiver::default()));
    let mut freq_active: BTreeMap<(Basis, [bool; 2]), f64> = BTreeMap::new();
    let mut freq_passive: BTreeMap<(Basis, [bool; 2]), f64> = BTreeMap::new();
    let unit = 1.0 / TRIALS as f64;
    for _ in 0..TRIALS {
        let basis = if rng.random::<bool>() { Basis::Hadamard } else { Basis::Computational };
        let bit = u8::from(rng.random::<bool>());
        let incident = Incident::quantum(PureState::encode_qubit(basis, bit, TimeBin::T_HALF, Path::Regular));

        let bob = if rng.random::<bool>() { Basis::Hadamard } else { Basis::Computational };
        let o = active.receive_active(bob, &incident, &mut rng).unwrap();
        *freq_active.entry((bob, [o[0].clicked(), o[1].clicked()])).or_default() += unit;

        let reading = passive.receive_passive(&incident, None, &mut rng).unwrap();
        let k = 2 * reading.arm.index();
        let pattern = [reading.outcomes[k].clicked(), reading.outcomes[k + 1].clicked()];
        *freq_passive.entry((reading.arm, pattern)).or_default() += unit;
    }
    let keys: Vec<_> = freq_active.keys().chain(freq_passive.keys()).copied().collect();
    for key in keys {
        let a = freq_active.get(&key).copied().unwrap_or(0.0);
        let p = freq_passive.get(&key).copied().unwrap_or(0.0);
        assert!((a - p).abs() < 0.01, "{key:?}: active {a} passive {p}");
    }
}

#[test]
fn passive_receiver_without_light_stays_dark() {
    let mut rx = Receiver::new(ReceiverConfig::Passive(PassiveReceiver::default()));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vacuum = PureState::vacuum([qkdsim::protocol::signal_pulse().h()]).unwrap();
    let reading = rx.receive_passive(&Incident::quantum(vacuum), None, &mut rng).unwrap();
    assert!(reading.outcomes.iter().all(|o| *o == DetectorOutcome::NoClick));
}
