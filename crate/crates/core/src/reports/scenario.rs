use serde::{Deserialize, Serialize};

use crate::attacks::AttackConfig;
use crate::devices::{ActiveReceiver, DetectorModel, PassiveReceiver, ReceiverConfig};
use crate::photonic::TimeBin;
use crate::protocol::{InvalidPolicy, RunConfig, RunReport, SourceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub tolerance: f64,
}

const fn near(value: f64, tolerance: f64) -> Option<Expectation> {
    Some(Expectation { value, tolerance })
}

const fn exactly(value: f64) -> Option<Expectation> {
    near(value, 0.0)
}

/// What a preset should produce at its default seed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExpectedSignature {
    pub qber: Option<Expectation>,
    pub loss_rate: Option<Expectation>,
    pub eve_info: Option<Expectation>,
    pub aborted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub field: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl ExpectedSignature {
    pub fn check(&self, report: &RunReport) -> Vec<Check> {
        let mut checks = Vec::new();
        let mut number = |field: &str, expect: Option<Expectation>, observed: Option<f64>| {
            if let Some(e) = expect {
                let pass = observed.is_some_and(|o| (o - e.value).abs() <= e.tolerance + 1e-12);
                checks.push(Check {
                    field: field.to_string(),
                    expected: format!("{} ± {}", e.value, e.tolerance),
                    observed: observed.map_or("undefined".into(), |o| format!("{o:.6}")),
                    pass,
                });
            }
        };
        number("qber", self.qber, report.qber);
        number("loss_rate", self.loss_rate, Some(report.loss_rate));
        number("eve_info", self.eve_info, Some(report.eve_info));
        if let Some(a) = self.aborted {
            checks.push(Check {
                field: "aborted".into(),
                expected: a.to_string(),
                observed: report.aborted.to_string(),
                pass: a == report.aborted,
            });
        }
        checks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: RunConfig,
    pub expected: Option<ExpectedSignature>,
}

fn with_attack(attack: AttackConfig) -> RunConfig {
    RunConfig { attack, ..RunConfig::default() }
}

fn zero_error_full_info(loss: f64, loss_tolerance: f64) -> Option<ExpectedSignature> {
    Some(ExpectedSignature {
        qber: exactly(0.0),
        loss_rate: near(loss, loss_tolerance),
        eve_info: exactly(1.0),
        aborted: Some(false),
    })
}

/// Built-in scenarios, in listing order.
pub fn presets() -> Vec<Scenario> {
    let bright = AttackConfig::BrightIllumination { k_pulse: 1100.0, background: 100.0, match_channel_loss: false };
    vec![
        Scenario {
            name: "baseline",
            summary: "no eavesdropper, ideal channel",
            config: RunConfig::default(),
            expected: Some(ExpectedSignature {
                qber: exactly(0.0),
                loss_rate: exactly(0.0),
                eve_info: near(0.5, 0.02),
                aborted: Some(false),
            }),
        },
        Scenario {
            name: "intercept_resend",
            summary: "measure in a random basis and resend one photon",
            config: with_attack(AttackConfig::InterceptResend),
            expected: Some(ExpectedSignature {
                qber: near(0.25, 0.01),
                loss_rate: exactly(0.0),
                eve_info: near(0.75, 0.02),
                aborted: Some(true),
            }),
        },
        Scenario {
            name: "trojan_pony_error",
            summary: "resend 20 photons; double clicks become error bits",
            config: RunConfig {
                invalid_policy: InvalidPolicy::AsError,
                ..with_attack(AttackConfig::TrojanPony { k: 20 })
            },
            expected: Some(ExpectedSignature { qber: near(0.5, 0.02), aborted: Some(true), ..Default::default() }),
        },
        Scenario {
            name: "trojan_pony_loss",
            summary: "resend 20 photons; double clicks are discarded as losses",
            config: RunConfig {
                invalid_policy: InvalidPolicy::AsLoss,
                ..with_attack(AttackConfig::TrojanPony { k: 20 })
            },
            expected: zero_error_full_info(0.5, 0.01),
        },
        Scenario {
            name: "faked_states",
            summary: "time-shifted resend against detectors with mismatched gates",
            config: RunConfig {
                receiver: ReceiverConfig::Passive(PassiveReceiver::overlapping_gates()),
                ..with_attack(AttackConfig::FakedStatesTiming)
            },
            expected: zero_error_full_info(0.5, 0.01),
        },
        Scenario {
            name: "fixed_apparatus",
            summary: "steer a compromised passive receiver into Eve's basis",
            config: RunConfig {
                receiver: ReceiverConfig::Passive(PassiveReceiver { compromised: true, ..Default::default() }),
                ..with_attack(AttackConfig::FixedApparatus)
            },
            expected: zero_error_full_info(0.0, 0.0),
        },
        Scenario {
            name: "bright_illumination",
            summary: "blind the detectors and resend bright pulses",
            config: with_attack(bright.clone()),
            expected: zero_error_full_info(0.5, 0.01),
        },
        Scenario {
            name: "bright_illumination_matched",
            summary: "bright illumination replacing a channel with 70% loss",
            config: RunConfig {
                channel_loss: 0.7,
                ..with_attack(AttackConfig::BrightIllumination {
                    k_pulse: 1100.0,
                    background: 100.0,
                    match_channel_loss: true,
                })
            },
            expected: zero_error_full_info(0.7, 0.01),
        },
        Scenario {
            name: "basis_probe",
            summary: "read Bob's basis before his detectors open",
            config: RunConfig {
                receiver: ReceiverConfig::Active(ActiveReceiver { basis_leak: true, ..Default::default() }),
                ..with_attack(AttackConfig::BasisProbe)
            },
            expected: zero_error_full_info(0.0, 0.0),
        },
        Scenario {
            name: "pns",
            summary: "photon-number splitting on a source with 10% two-photon pulses",
            config: RunConfig { source: SourceConfig { multi_photon_prob: 0.1 }, ..with_attack(AttackConfig::Pns) },
            expected: Some(ExpectedSignature {
                qber: exactly(0.0),
                loss_rate: exactly(0.0),
                eve_info: near(0.55, 0.02),
                aborted: Some(false),
            }),
        },
    ]
}

pub fn preset(name: &str) -> Option<Scenario> {
    presets().into_iter().find(|s| s.name == name)
}

/// Receivers the analyzer knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverPreset {
    /// Active receiver whose detectors never leave Geiger mode.
    Ideal,
    /// Passive receiver with mismatched detector gates.
    Gated,
    /// Active receiver with the default blindable detectors.
    Blindable,
    /// Passive receiver with its blocked port opened by Eve.
    Compromised,
}

impl ReceiverPreset {
    pub const ALL: [ReceiverPreset; 4] =
        [ReceiverPreset::Ideal, ReceiverPreset::Gated, ReceiverPreset::Blindable, ReceiverPreset::Compromised];

    pub fn name(self) -> &'static str {
        match self {
            ReceiverPreset::Ideal => "ideal",
            ReceiverPreset::Gated => "gated",
            ReceiverPreset::Blindable => "blindable",
            ReceiverPreset::Compromised => "compromised",
        }
    }

    pub fn from_name(name: &str) -> Option<ReceiverPreset> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn receiver(self) -> ReceiverConfig {
        match self {
            ReceiverPreset::Ideal => {
                let geiger = DetectorModel::geiger_only(TimeBin::T_HALF, TimeBin::T_HALF).expect("ordered gate");
                ReceiverConfig::Active(ActiveReceiver { detectors: [geiger; 2], basis_leak: false })
            }
            ReceiverPreset::Gated => ReceiverConfig::Passive(PassiveReceiver::overlapping_gates()),
            ReceiverPreset::Blindable => ReceiverConfig::default(),
            ReceiverPreset::Compromised => {
                ReceiverConfig::Passive(PassiveReceiver { compromised: true, ..Default::default() })
            }
        }
    }
}
