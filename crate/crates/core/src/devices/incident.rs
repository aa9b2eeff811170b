use std::collections::BTreeSet;
use std::fmt;

use crate::photonic::{MacroPulse, Path, PureState, TimeBin};

/// Light in exactly one description regime.
#[derive(Debug, Clone, PartialEq)]
pub enum Light {
    Quantum(PureState),
    Bright(MacroPulse),
}

/// What reaches Bob's input ports in one round, plus the continuous
/// background illumination (photons per gate, applied to every detector).
#[derive(Debug, Clone, PartialEq)]
pub struct Incident {
    pub light: Light,
    pub background: f64,
}

impl Incident {
    pub fn quantum(state: PureState) -> Self {
        Self { light: Light::Quantum(state), background: 0.0 }
    }

    pub fn bright(pulse: MacroPulse) -> Self {
        Self { light: Light::Bright(pulse), background: 0.0 }
    }

    pub fn with_background(mut self, background: f64) -> Self {
        self.background = background;
        self
    }

    pub fn time_bins(&self) -> BTreeSet<TimeBin> {
        self.paths_and_bins().into_iter().map(|(t, _)| t).collect()
    }

    pub fn paths(&self) -> BTreeSet<Path> {
        self.paths_and_bins().into_iter().map(|(_, p)| p).collect()
    }

    fn paths_and_bins(&self) -> BTreeSet<(TimeBin, Path)> {
        match &self.light {
            Light::Quantum(s) => s.modes().iter().map(|m| (m.time_bin, m.path)).collect(),
            Light::Bright(p) => p.modes().iter().map(|m| (m.time_bin, m.path)).collect(),
        }
    }

    /// Compact single-line description.
    pub fn describe(&self) -> String {
        let body = match &self.light {
            Light::Quantum(s) => format!("quantum[{s}]"),
            Light::Bright(p) => format!("bright[{p}]"),
        };
        if self.background > 0.0 {
            format!("{body} + background {}", self.background)
        } else {
            body
        }
    }
}

impl fmt::Display for Incident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
