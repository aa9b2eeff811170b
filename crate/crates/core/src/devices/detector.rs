//! Threshold detector with a time gate and three response regimes.
//!
//! Below the blinding threshold `n1` the detector is in Geiger mode: it
//! clicks on any photon it sees and cannot count them. A continuous
//! background at or above `n1` pushes it into linear mode, where it only
//! clicks for a single pulse carrying at least `linear_threshold` photons.
//! `n2` photons inside one gate burn it, and a burned detector stays burned.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DeviceError;
use crate::photonic::TimeBin;

/// Photons arriving at one detector, per time bin.
pub type ArrivalTally = BTreeMap<TimeBin, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorOutcome {
    NoClick,
    Click,
    Burned,
}

impl DetectorOutcome {
    pub fn clicked(self) -> bool {
        self == DetectorOutcome::Click
    }
}

impl fmt::Display for DetectorOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorOutcome::NoClick => "-",
            DetectorOutcome::Click => "click",
            DetectorOutcome::Burned => "burned",
        })
    }
}

/// Validated detector parameters. Thresholds are photons per gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DetectorSpec", into = "DetectorSpec")]
pub struct DetectorModel {
    gate_open: TimeBin,
    gate_close: TimeBin,
    n1: u64,
    linear_threshold: u64,
    n2: u64,
}

impl DetectorModel {
    pub const DEFAULT_N1: u64 = 50;
    pub const DEFAULT_LINEAR_THRESHOLD: u64 = 1000;
    pub const DEFAULT_N2: u64 = 1_000_000;

    pub fn new(
        gate_open: TimeBin,
        gate_close: TimeBin,
        n1: u64,
        linear_threshold: u64,
        n2: u64,
    ) -> Result<Self, DeviceError> {
        if n1 == 0 {
            return Err(DeviceError::Thresholds("n1 must be positive".into()));
        }
        if n1 >= linear_threshold {
            return Err(DeviceError::Thresholds(format!(
                "n1 < linear_threshold violated ({n1} >= {linear_threshold})"
            )));
        }
        if linear_threshold > n2 {
            return Err(DeviceError::Thresholds(format!(
                "linear_threshold <= n2 violated ({linear_threshold} > {n2})"
            )));
        }
        if gate_open > gate_close {
            return Err(DeviceError::Gate { open: gate_open, close: gate_close });
        }
        Ok(Self { gate_open, gate_close, n1, linear_threshold, n2 })
    }

    /// Default thresholds with a gate of exactly `gate`.
    pub fn gated(gate_open: TimeBin, gate_close: TimeBin) -> Result<Self, DeviceError> {
        Self::new(gate_open, gate_close, Self::DEFAULT_N1, Self::DEFAULT_LINEAR_THRESHOLD, Self::DEFAULT_N2)
    }

    /// A detector whose blinding and damage thresholds are far beyond any
    /// light the simulator produces: it behaves as an ideal Geiger counter.
    pub fn geiger_only(gate_open: TimeBin, gate_close: TimeBin) -> Result<Self, DeviceError> {
        const FAR: u64 = 1_000_000_000_000_000;
        Self::new(gate_open, gate_close, FAR, 2 * FAR, 4 * FAR)
    }

    pub fn gate(&self) -> (TimeBin, TimeBin) {
        (self.gate_open, self.gate_close)
    }

    pub fn n1(&self) -> u64 {
        self.n1
    }

    pub fn linear_threshold(&self) -> u64 {
        self.linear_threshold
    }

    pub fn n2(&self) -> u64 {
        self.n2
    }

    pub fn in_gate(&self, bin: TimeBin) -> bool {
        self.gate_open <= bin && bin <= self.gate_close
    }

    /// Stateless response of a fresh detector.
    pub fn respond(&self, arrivals: &ArrivalTally, background: f64) -> DetectorOutcome {
        let gated = arrivals.iter().filter(|(bin, _)| self.in_gate(**bin));
        let in_gate: f64 = gated.clone().map(|(_, n)| *n).sum();
        let total = in_gate + background;
        if total >= self.n2 as f64 {
            DetectorOutcome::Burned
        } else if background >= self.n1 as f64 {
            let strongest = gated.map(|(_, n)| *n).fold(0.0, f64::max);
            if strongest >= self.linear_threshold as f64 {
                DetectorOutcome::Click
            } else {
                DetectorOutcome::NoClick
            }
        } else if total > 0.0 {
            // macro intensities are means of many-photon pulses; any share
            // of one is at least a photon
            DetectorOutcome::Click
        } else {
            DetectorOutcome::NoClick
        }
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::gated(TimeBin::T_HALF, TimeBin::T_HALF).expect("default thresholds are ordered")
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorSpec {
    #[serde(default = "default_gate")]
    gate_open: TimeBin,
    #[serde(default = "default_gate")]
    gate_close: TimeBin,
    #[serde(default = "default_n1")]
    n1: u64,
    #[serde(default = "default_linear")]
    linear_threshold: u64,
    #[serde(default = "default_n2")]
    n2: u64,
}

fn default_gate() -> TimeBin {
    TimeBin::T_HALF
}
fn default_n1() -> u64 {
    DetectorModel::DEFAULT_N1
}
fn default_linear() -> u64 {
    DetectorModel::DEFAULT_LINEAR_THRESHOLD
}
fn default_n2() -> u64 {
    DetectorModel::DEFAULT_N2
}

impl TryFrom<DetectorSpec> for DetectorModel {
    type Error = DeviceError;

    fn try_from(s: DetectorSpec) -> Result<Self, Self::Error> {
        DetectorModel::new(s.gate_open, s.gate_close, s.n1, s.linear_threshold, s.n2)
    }
}

impl From<DetectorModel> for DetectorSpec {
    fn from(m: DetectorModel) -> Self {
        DetectorSpec {
            gate_open: m.gate_open,
            gate_close: m.gate_close,
            n1: m.n1,
            linear_threshold: m.linear_threshold,
            n2: m.n2,
        }
    }
}

/// A detector instance inside one run. Once burned it answers `Burned`
/// forever.
#[derive(Debug, Clone)]
pub struct Detector {
    model: DetectorModel,
    burned: bool,
}

impl Detector {
    pub fn new(model: DetectorModel) -> Self {
        Self { model, burned: false }
    }

    pub fn model(&self) -> &DetectorModel {
        &self.model
    }

    pub fn is_burned(&self) -> bool {
        self.burned
    }

    pub fn respond(&mut self, arrivals: &ArrivalTally, background: f64) -> DetectorOutcome {
        if self.burned {
            return DetectorOutcome::Burned;
        }
        let outcome = self.model.respond(arrivals, background);
        self.burned = outcome == DetectorOutcome::Burned;
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(bin: TimeBin, n: f64) -> ArrivalTally {
        [(bin, n)].into_iter().collect()
    }

    #[test]
    fn one_photon_in_gate_clicks() {
        let d = DetectorModel::default();
        assert_eq!(d.respond(&at(TimeBin::T_HALF, 1.0), 0.0), DetectorOutcome::Click);
        assert_eq!(d.respond(&ArrivalTally::new(), 0.0), DetectorOutcome::NoClick);
    }

    #[test]
    fn blinded_detector_needs_a_linear_mode_pulse() {
        let d = DetectorModel::default();
        let bg = DetectorModel::DEFAULT_N1 as f64;
        assert_eq!(d.respond(&at(TimeBin::T_HALF, 1000.0), bg), DetectorOutcome::Click);
        assert_eq!(d.respond(&at(TimeBin::T_HALF, 500.0), bg), DetectorOutcome::NoClick);
        assert_eq!(d.respond(&at(TimeBin::T_HALF, 1.0), bg), DetectorOutcome::NoClick);
    }

    #[test]
    fn photons_outside_the_gate_are_ignored() {
        let d = DetectorModel::default();
        assert_eq!(d.respond(&at(TimeBin::T0, 1.0), 0.0), DetectorOutcome::NoClick);
        assert_eq!(d.respond(&at(TimeBin::T1, 5e6), 0.0), DetectorOutcome::NoClick);
    }

    #[test]
    fn damage_threshold_burns_and_stays_burned() {
        let mut d = Detector::new(DetectorModel::default());
        assert_eq!(d.respond(&at(TimeBin::T_HALF, 1e6), 0.0), DetectorOutcome::Burned);
        assert_eq!(d.respond(&ArrivalTally::new(), 0.0), DetectorOutcome::Burned);
        assert!(d.is_burned());
    }

    #[test]
    fn background_alone_triggers_geiger_click() {
        let d = DetectorModel::default();
        assert_eq!(d.respond(&ArrivalTally::new(), 10.0), DetectorOutcome::Click);
        assert_eq!(d.respond(&ArrivalTally::new(), 0.5), DetectorOutcome::Click);
        assert_eq!(d.respond(&ArrivalTally::new(), 0.0), DetectorOutcome::NoClick);
    }

    #[test]
    fn thresholds_must_be_ordered() {
        let t = TimeBin::T_HALF;
        assert!(DetectorModel::new(t, t, 1000, 1000, 2000).is_err());
        assert!(DetectorModel::new(t, t, 10, 3000, 2000).is_err());
        assert!(DetectorModel::new(TimeBin::T1, TimeBin::T0, 10, 20, 30).is_err());
        assert!(DetectorModel::new(t, t, 10, 20, 20).is_ok());
    }
}
