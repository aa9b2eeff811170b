//! Configuration files and built-in scenarios.

use proptest::prelude::*;

use qkdsim::attacks::AttackConfig;
use qkdsim::devices::{ActiveReceiver, DetectorModel, PassiveReceiver, ReceiverConfig};
use qkdsim::photonic::TimeBin;
use qkdsim::protocol::{InvalidPolicy, RunConfig, SourceConfig};
use qkdsim::reports::{compare_runs, presets, run_scenario, ScenarioReport};

fn detector() -> impl Strategy<Value = DetectorModel> {
    (0u8..3, 0u8..3, 1u64..100, 1u64..5_000, 0u64..2_000_000).prop_map(|(a, b, n1, dl, dn)| {
        let (open, close) = (TimeBin(a.min(b)), TimeBin(a.max(b)));
        DetectorModel::new(open, close, n1, n1 + dl, n1 + dl + dn).unwrap()
    })
}

fn receiver() -> impl Strategy<Value = ReceiverConfig> {
    prop_oneof![
        (detector(), detector(), any::<bool>())
            .prop_map(|(a, b, basis_leak)| ReceiverConfig::Active(ActiveReceiver { detectors: [a, b], basis_leak })),
        (detector(), detector(), detector(), detector(), any::<bool>()).prop_map(|(a, b, c, d, compromised)| {
            ReceiverConfig::Passive(PassiveReceiver { computational: [a, b], hadamard: [c, d], compromised })
        }),
    ]
}

fn attack() -> impl Strategy<Value = AttackConfig> {
    prop_oneof![
        Just(AttackConfig::None),
        Just(AttackConfig::InterceptResend),
        (1u32..100).prop_map(|k| AttackConfig::TrojanPony { k }),
        Just(AttackConfig::FakedStatesTiming),
        Just(AttackConfig::FixedApparatus),
        (1.0f64..1e5, 0.0f64..1e4, any::<bool>()).prop_map(|(k_pulse, background, match_channel_loss)| {
            AttackConfig::BrightIllumination { k_pulse, background, match_channel_loss }
        }),
        Just(AttackConfig::Pns),
        Just(AttackConfig::BasisProbe),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        (1u64..1_000_000, any::<u64>(), any::<bool>()),
        (0.01f64..1.0, 0.0f64..=1.0, 0.0f64..0.99, 0.0f64..0.99),
        attack(),
        receiver(),
    )
        .prop_map(|((rounds, seed, as_loss), (test_fraction, abort_qber, channel_loss, p2), attack, receiver)| {
            RunConfig {
                rounds,
                seed,
                invalid_policy: if as_loss { InvalidPolicy::AsLoss } else { InvalidPolicy::AsError },
                test_fraction,
                abort_qber,
                channel_loss,
                attack,
                source: SourceConfig { multi_photon_prob: p2 },
                receiver,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn configs_survive_a_toml_round_trip(cfg in config()) {
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg, "{}", text);
    }
}

#[test]
fn loaded_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "rounds = 2000\nseed = 9\ninvalid_policy = \"as_loss\"\n\n[attack]\nname = \"trojan_pony\"\nk = 7\n\n[receiver]\nstyle = \"passive\"\ncompromised = true\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.attack, AttackConfig::TrojanPony { k: 7 });
    assert_eq!(cfg.invalid_policy, InvalidPolicy::AsLoss);
    std::fs::write(&path, cfg.to_toml()).unwrap();
    assert_eq!(RunConfig::load(&path).unwrap(), cfg);
    assert!(RunConfig::load(&dir.path().join("absent.toml")).is_err());
}

#[test]
fn minimal_file_takes_every_default() {
    let cfg = RunConfig::from_toml("attack = \"bright_illumination\"").unwrap();
    assert_eq!(cfg.rounds, 100_000);
    assert_eq!(cfg.seed, 1);
    let models = cfg.receiver.detector_models();
    assert!(models.iter().all(|m| m.n1() == 50 && m.linear_threshold() == 1000 && m.n2() == 1_000_000));
}

#[test]
fn every_preset_passes_its_own_check() {
    let mut reports = Vec::new();
    for scenario in presets() {
        scenario.config.validate().unwrap();
        let report = run_scenario(&scenario, None, None).unwrap();
        assert!(!report.checks.is_empty(), "{} has no expectation", scenario.name);
        assert!(report.checks_pass(), "{}:\n{}", scenario.name, report.table());
        reports.push(report);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bright.json");
    std::fs::write(&path, reports[0].to_json()).unwrap();
    assert_eq!(ScenarioReport::read(&path).unwrap(), reports[0]);

    let table = compare_runs(&reports).unwrap();
    assert_eq!(table.lines().count(), reports.len() + 2);
    assert!(compare_runs(&reports[..1]).is_err());
}

#[test]
fn baseline_and_bright_illumination_differ_only_in_eve_info() {
    let find = |name: &str| presets().into_iter().find(|s| s.name == name).unwrap();
    let baseline = run_scenario(&find("baseline"), None, Some(20_000)).unwrap();
    let bright = run_scenario(&find("bright_illumination"), None, Some(20_000)).unwrap();
    let table = compare_runs(&[baseline.clone(), bright.clone()]).unwrap();
    assert_eq!(baseline.report.qber, Some(0.0));
    assert_eq!(bright.report.qber, Some(0.0));
    assert!((baseline.report.eve_info - 0.5).abs() < 0.03);
    assert_eq!(bright.report.eve_info, 1.0);
    assert!(table.contains("silent, full info"), "{table}");
}
