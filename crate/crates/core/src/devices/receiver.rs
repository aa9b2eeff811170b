//! Bob's active (two-detector) and passive (four-detector) receivers.
//!
//! Detector arms are modelled as modes on [`Path::Detector`]. In both styles
//! even-numbered detectors sit behind the horizontal output of a polarizing
//! beam splitter and report bit 0, odd-numbered ones report bit 1. The
//! passive receiver's detectors 0/1 measure in the computational basis and
//! 2/3 in the Hadamard basis.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::detector::{ArrivalTally, Detector, DetectorModel, DetectorOutcome};
use super::incident::{Incident, Light};
use super::optics::{OpticalChain, OpticalElement};
use super::DeviceError;
use crate::photonic::{Basis, ModeId, OccupationVector, Path, Polarization, Pulse, TimeBin, TwoModeUnitary};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActiveReceiver {
    #[serde(default)]
    pub detectors: [DetectorModel; 2],
    /// The PBS orientation is observable before the detectors open.
    #[serde(default)]
    pub basis_leak: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveReceiver {
    #[serde(default)]
    pub computational: [DetectorModel; 2],
    #[serde(default)]
    pub hadamard: [DetectorModel; 2],
    /// Eve has opened the blocked input port of the entry beam splitter.
    #[serde(default)]
    pub compromised: bool,
}

impl PassiveReceiver {
    /// Computational detectors gated `[t0, t_half]`, Hadamard detectors
    /// gated `[t_half, t1]`.
    pub fn overlapping_gates() -> Self {
        let z = DetectorModel::gated(TimeBin::T0, TimeBin::T_HALF).expect("ordered gate");
        let x = DetectorModel::gated(TimeBin::T_HALF, TimeBin::T1).expect("ordered gate");
        Self { computational: [z; 2], hadamard: [x; 2], compromised: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "style", rename_all = "snake_case")]
pub enum ReceiverConfig {
    Active(ActiveReceiver),
    Passive(PassiveReceiver),
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig::Active(ActiveReceiver::default())
    }
}

/// How a receiver is set for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Active(Basis),
    /// `forced_arm` models Eve steering the entry beam splitter.
    Passive {
        forced_arm: Option<Basis>,
    },
}

/// One exactly enumerated measurement branch, seen by fresh detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub outcomes: Vec<DetectorOutcome>,
    /// Whether any light reached the computational / Hadamard detector pair.
    pub lit: [bool; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassiveReading {
    pub arm: Basis,
    pub outcomes: [DetectorOutcome; 4],
}

impl ReceiverConfig {
    pub fn style_name(&self) -> &'static str {
        match self {
            ReceiverConfig::Active(_) => "active",
            ReceiverConfig::Passive(_) => "passive",
        }
    }

    pub fn detector_models(&self) -> Vec<DetectorModel> {
        match self {
            ReceiverConfig::Active(a) => a.detectors.to_vec(),
            ReceiverConfig::Passive(p) => p.computational.iter().chain(p.hadamard.iter()).copied().collect(),
        }
    }

    /// Mode in front of detector `index` at `bin`.
    pub fn detector_mode(index: usize, bin: TimeBin) -> ModeId {
        let pol = if index.is_multiple_of(2) { Polarization::H } else { Polarization::V };
        ModeId::new(bin, Path::Detector(index as u8), pol)
    }

    pub fn detector_modes(&self, bins: &BTreeSet<TimeBin>) -> BTreeSet<ModeId> {
        let count = self.detector_models().len();
        bins.iter().flat_map(|b| (0..count).map(move |i| Self::detector_mode(i, *b))).collect()
    }

    /// The unitary applied before photon counting, for pulses in `bins`.
    pub fn optics(&self, setting: Setting, bins: &BTreeSet<TimeBin>) -> Result<OpticalChain, DeviceError> {
        let mut chain = OpticalChain::new();
        let rotate = |chain: &mut OpticalChain, pulse: Pulse| {
            chain.push(OpticalElement::TwoMode {
                inputs: (pulse.h(), pulse.v()),
                outputs: (pulse.h(), pulse.v()),
                unitary: TwoModeUnitary::rotation(FRAC_PI_4),
            })
        };
        match (self, setting) {
            (ReceiverConfig::Active(_), Setting::Active(basis)) => {
                let mut routes = Vec::new();
                for &t in bins {
                    let input = Pulse::new(t, Path::Regular);
                    if basis == Basis::Hadamard {
                        rotate(&mut chain, input);
                    }
                    routes.push((input.h(), Self::detector_mode(0, t)));
                    routes.push((input.v(), Self::detector_mode(1, t)));
                }
                chain.push(OpticalElement::Route(routes));
            }
            (ReceiverConfig::Passive(_), Setting::Passive { forced_arm }) => {
                let z = Path::Arm(Basis::Computational);
                let x = Path::Arm(Basis::Hadamard);
                for &t in bins {
                    let regular = Pulse::new(t, Path::Regular);
                    match forced_arm {
                        Some(arm) => {
                            let target = Pulse::new(t, Path::Arm(arm));
                            chain.push(OpticalElement::Route(vec![
                                (regular.h(), target.h()),
                                (regular.v(), target.v()),
                            ]));
                        }
                        None => {
                            let blocked = Pulse::new(t, Path::Blocked);
                            for pol in [Polarization::H, Polarization::V] {
                                chain.push(OpticalElement::TwoMode {
                                    inputs: (regular.mode(pol), blocked.mode(pol)),
                                    outputs: (Pulse::new(t, z).mode(pol), Pulse::new(t, x).mode(pol)),
                                    unitary: TwoModeUnitary::beam_splitter(0.5).expect("valid transmittance"),
                                });
                            }
                        }
                    }
                    rotate(&mut chain, Pulse::new(t, x));
                }
                let mut routes = Vec::new();
                for &t in bins {
                    routes.push((Pulse::new(t, z).h(), Self::detector_mode(0, t)));
                    routes.push((Pulse::new(t, z).v(), Self::detector_mode(1, t)));
                    routes.push((Pulse::new(t, x).h(), Self::detector_mode(2, t)));
                    routes.push((Pulse::new(t, x).v(), Self::detector_mode(3, t)));
                }
                chain.push(OpticalElement::Route(routes));
            }
            _ => return Err(DeviceError::WrongStyle(self.style_name())),
        }
        Ok(chain)
    }

    /// Rejects light on ports this receiver does not expose.
    pub fn check_incident(&self, incident: &Incident, setting: Setting) -> Result<(), DeviceError> {
        if !(incident.background >= 0.0 && incident.background.is_finite()) {
            return Err(DeviceError::Background(incident.background));
        }
        for path in incident.paths() {
            match (self, path, setting) {
                (_, Path::Regular, _) => {}
                (ReceiverConfig::Passive(p), Path::Blocked, Setting::Passive { forced_arm: None }) => {
                    if !p.compromised {
                        return Err(DeviceError::BlockedPortSealed);
                    }
                }
                (_, other, _) => return Err(DeviceError::UnexpectedPath(other.to_string())),
            }
        }
        Ok(())
    }

    /// Light as it arrives at the detector modes.
    pub fn propagate(&self, setting: Setting, incident: &Incident) -> Result<Light, DeviceError> {
        self.check_incident(incident, setting)?;
        let optics = self.optics(setting, &incident.time_bins())?;
        Ok(match &incident.light {
            Light::Quantum(s) => Light::Quantum(optics.apply_state(s)?),
            Light::Bright(p) => Light::Bright(optics.apply_pulse(p)),
        })
    }

    /// Exact branch enumeration over the photon-count outcomes, each seen
    /// by a fresh set of detectors.
    pub fn branches(&self, setting: Setting, incident: &Incident) -> Result<Vec<Branch>, DeviceError> {
        let bins = incident.time_bins();
        let models = self.detector_models();
        let light = self.propagate(setting, incident)?;
        let observe = |tallies: Vec<ArrivalTally>| -> Vec<DetectorOutcome> {
            models.iter().zip(&tallies).map(|(m, t)| m.respond(t, incident.background)).collect()
        };
        Ok(match light {
            Light::Quantum(state) => state
                .occupation_distribution(&self.detector_modes(&bins))
                .into_iter()
                .map(|(occ, probability)| {
                    let tallies = occupation_tallies(&occ, models.len(), &bins);
                    let lit = lit_pairs(&tallies);
                    Branch { probability, outcomes: observe(tallies), lit }
                })
                .collect(),
            Light::Bright(pulse) => {
                let tallies: Vec<ArrivalTally> = (0..models.len())
                    .map(|i| bins.iter().map(|b| (*b, pulse.intensity(&Self::detector_mode(i, *b)))).collect())
                    .collect();
                let lit = lit_pairs(&tallies);
                vec![Branch { probability: 1.0, outcomes: observe(tallies), lit }]
            }
        })
    }
}

fn occupation_tallies(occ: &OccupationVector, detectors: usize, bins: &BTreeSet<TimeBin>) -> Vec<ArrivalTally> {
    (0..detectors)
        .map(|i| bins.iter().map(|b| (*b, f64::from(occ.get(&ReceiverConfig::detector_mode(i, *b))))).collect())
        .collect()
}

fn lit_pairs(tallies: &[ArrivalTally]) -> [bool; 2] {
    let lit = |i: usize| tallies.get(i).is_some_and(|t| t.values().any(|n| *n > 1e-9));
    [lit(0) || lit(1), lit(2) || lit(3)]
}

/// Bob's basis in a passive round: the arm whose detectors clicked; failing
/// that, the only arm that received light. `None` when undetermined.
pub fn resolve_arm(outcomes: &[DetectorOutcome], lit: [bool; 2]) -> Option<Basis> {
    let clicked = |range: std::ops::Range<usize>| outcomes[range].iter().any(|o| o.clicked());
    match (clicked(0..2), clicked(2..4)) {
        (true, false) => Some(Basis::Computational),
        (false, true) => Some(Basis::Hadamard),
        _ => match lit {
            [true, false] => Some(Basis::Computational),
            [false, true] => Some(Basis::Hadamard),
            _ => None,
        },
    }
}

/// A receiver inside one run: configuration plus detector burn state.
#[derive(Debug, Clone)]
pub struct Receiver {
    config: ReceiverConfig,
    detectors: Vec<Detector>,
}

impl Receiver {
    pub fn new(config: ReceiverConfig) -> Self {
        let detectors = config.detector_models().into_iter().map(Detector::new).collect();
        Self { config, detectors }
    }

    pub fn config(&self) -> &ReceiverConfig {
        &self.config
    }

    pub fn is_burned(&self) -> bool {
        self.detectors.iter().any(Detector::is_burned)
    }

    fn sample<R: RngCore + ?Sized>(
        &mut self,
        setting: Setting,
        incident: &Incident,
        rng: &mut R,
    ) -> Result<(Vec<DetectorOutcome>, [bool; 2]), DeviceError> {
        let bins = incident.time_bins();
        let tallies: Vec<ArrivalTally> = match self.config.propagate(setting, incident)? {
            Light::Quantum(state) => {
                let (occ, _) = state.measure_occupation(&self.config.detector_modes(&bins), rng);
                occupation_tallies(&occ, self.detectors.len(), &bins)
            }
            Light::Bright(pulse) => (0..self.detectors.len())
                .map(|i| bins.iter().map(|b| (*b, pulse.intensity(&ReceiverConfig::detector_mode(i, *b)))).collect())
                .collect(),
        };
        let outcomes =
            self.detectors.iter_mut().zip(&tallies).map(|(d, t)| d.respond(t, incident.background)).collect();
        Ok((outcomes, lit_pairs(&tallies)))
    }

    /// Active receiver: outcomes of the bit-0 and bit-1 detectors.
    pub fn receive_active<R: RngCore + ?Sized>(
        &mut self,
        basis: Basis,
        incident: &Incident,
        rng: &mut R,
    ) -> Result<[DetectorOutcome; 2], DeviceError> {
        if !matches!(self.config, ReceiverConfig::Active(_)) {
            return Err(DeviceError::WrongStyle(self.config.style_name()));
        }
        let (o, _) = self.sample(Setting::Active(basis), incident, rng)?;
        Ok([o[0], o[1]])
    }

    /// Passive receiver. A forced-arm directive is only honoured when the
    /// receiver has been compromised.
    pub fn receive_passive<R: RngCore + ?Sized>(
        &mut self,
        incident: &Incident,
        forced_arm: Option<Basis>,
        rng: &mut R,
    ) -> Result<PassiveReading, DeviceError> {
        let ReceiverConfig::Passive(p) = &self.config else {
            return Err(DeviceError::WrongStyle(self.config.style_name()));
        };
        if forced_arm.is_some() && !p.compromised {
            return Err(DeviceError::NotCompromised);
        }
        let (o, lit) = self.sample(Setting::Passive { forced_arm }, incident, rng)?;
        let outcomes = [o[0], o[1], o[2], o[3]];
        let arm = forced_arm.or_else(|| resolve_arm(&outcomes, lit)).unwrap_or_else(|| {
            if rng.random::<bool>() {
                Basis::Hadamard
            } else {
                Basis::Computational
            }
        });
        Ok(PassiveReading { arm, outcomes })
    }
}
