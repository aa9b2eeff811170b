use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::{
    AttackContext, AttackError, AttackStrategy, BasisProbe, BrightIllumination, FakedStatesTiming, FixedApparatus,
    InterceptResend, NoAttack, Pns, TrojanPony,
};

/// The `attack` entry of a run configuration. Either a bare strategy name
/// (`attack = "pns"`) or a table with `name` plus the strategy's parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AttackConfig {
    #[default]
    None,
    InterceptResend,
    TrojanPony {
        /// Photons per resent pulse.
        k: u32,
    },
    FakedStatesTiming,
    FixedApparatus,
    BrightIllumination {
        k_pulse: f64,
        background: f64,
        /// Suppress pulses so the sifted loss equals `channel_loss`.
        match_channel_loss: bool,
    },
    Pns,
    BasisProbe,
}

fn default_k() -> u32 {
    20
}

fn default_k_pulse() -> f64 {
    1100.0
}

fn default_background() -> f64 {
    100.0
}

impl AttackConfig {
    pub const NAMES: [&'static str; 8] = [
        "none",
        "intercept_resend",
        "trojan_pony",
        "faked_states_timing",
        "fixed_apparatus",
        "bright_illumination",
        "pns",
        "basis_probe",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackConfig::None => "none",
            AttackConfig::InterceptResend => "intercept_resend",
            AttackConfig::TrojanPony { .. } => "trojan_pony",
            AttackConfig::FakedStatesTiming => "faked_states_timing",
            AttackConfig::FixedApparatus => "fixed_apparatus",
            AttackConfig::BrightIllumination { .. } => "bright_illumination",
            AttackConfig::Pns => "pns",
            AttackConfig::BasisProbe => "basis_probe",
        }
    }

    /// Instantiates the strategy and checks it against the run.
    pub fn build(&self, ctx: &AttackContext<'_>) -> Result<Box<dyn AttackStrategy>, AttackError> {
        let strategy: Box<dyn AttackStrategy> = match *self {
            AttackConfig::None => Box::new(NoAttack),
            AttackConfig::InterceptResend => Box::new(InterceptResend),
            AttackConfig::TrojanPony { k } => Box::new(TrojanPony { k }),
            AttackConfig::FakedStatesTiming => Box::new(FakedStatesTiming),
            AttackConfig::FixedApparatus => Box::new(FixedApparatus),
            AttackConfig::BrightIllumination { k_pulse, background, match_channel_loss } => {
                if match_channel_loss {
                    Box::new(BrightIllumination::matching_loss(k_pulse, background, ctx.channel_loss))
                } else {
                    Box::new(BrightIllumination::new(k_pulse, background))
                }
            }
            AttackConfig::Pns => Box::new(Pns),
            AttackConfig::BasisProbe => Box::new(BasisProbe),
        };
        strategy.check(ctx)?;
        Ok(strategy)
    }
}

impl fmt::Display for AttackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackConfig::TrojanPony { k } => write!(f, "trojan_pony(k={k})"),
            AttackConfig::BrightIllumination { k_pulse, background, match_channel_loss } => {
                write!(f, "bright_illumination(k_pulse={k_pulse}, background={background}")?;
                if *match_channel_loss {
                    f.write_str(", match_channel_loss")?;
                }
                f.write_str(")")
            }
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Deserialize)]
#[serde(remote = "AttackConfig", tag = "name", rename_all = "snake_case", deny_unknown_fields)]
enum Tagged {
    None,
    InterceptResend,
    TrojanPony {
        #[serde(default = "default_k")]
        k: u32,
    },
    FakedStatesTiming,
    FixedApparatus,
    BrightIllumination {
        #[serde(default = "default_k_pulse")]
        k_pulse: f64,
        #[serde(default = "default_background")]
        background: f64,
        #[serde(default)]
        match_channel_loss: bool,
    },
    Pns,
    BasisProbe,
}

/// Accepts the bare-name form as well as the table form.
impl<'de> Deserialize<'de> for AttackConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<AttackConfig, D::Error> {
        deserialize_attack(d)
    }
}

fn deserialize_attack<'de, D: Deserializer<'de>>(d: D) -> Result<AttackConfig, D::Error> {
    struct AttackVisitor;

    impl<'de> Visitor<'de> for AttackVisitor {
        type Value = AttackConfig;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("an attack name or a table with `name` and parameters")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<AttackConfig, E> {
            let map = de::value::MapDeserializer::new(std::iter::once(("name", v)));
            Tagged::deserialize(map)
        }

        fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<AttackConfig, A::Error> {
            Tagged::deserialize(de::value::MapAccessDeserializer::new(map))
        }
    }

    d.deserialize_any(AttackVisitor)
}
