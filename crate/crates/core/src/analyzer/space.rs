use std::collections::BTreeSet;

use super::AnalyzerError;
use crate::devices::Incident;
use crate::photonic::{
    Basis, LinearPolarization, MacroPulse, ModeId, OccupationVector, Path, Pulse, PureState, TimeBin,
    DEFAULT_PHOTON_CAP,
};

pub const DEFAULT_CANDIDATE_CAP: usize = 100_000;

/// Finite bounds on the incidents Eve may send.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBounds {
    /// Modes of the exact-regime candidates.
    pub modes: BTreeSet<ModeId>,
    /// Maximum total photon number of an exact candidate.
    pub n_max: u32,
    /// Mean photon numbers of the bright candidates.
    pub intensities: Vec<f64>,
    /// Background levels the bright candidates ride on.
    pub backgrounds: Vec<f64>,
    pub cap: usize,
}

impl SpaceBounds {
    /// Both polarizations of the regular path in every standard time bin.
    pub fn timed(n_max: u32) -> Self {
        let modes = TimeBin::STANDARD
            .iter()
            .flat_map(|t| {
                let p = Pulse::new(*t, Path::Regular);
                [p.h(), p.v()]
            })
            .collect();
        Self { modes, n_max, intensities: Vec::new(), backgrounds: Vec::new(), cap: DEFAULT_CANDIDATE_CAP }
    }

    pub fn with_grid(mut self, intensities: Vec<f64>, backgrounds: Vec<f64>) -> Self {
        self.intensities = intensities;
        self.backgrounds = backgrounds;
        self
    }

    pub fn enumerate(&self) -> Result<Vec<Incident>, AnalyzerError> {
        enumerate_protocol_space(&self.modes, self.n_max, &self.intensities, &self.backgrounds, self.cap)
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Pulses with both polarization modes in `modes`.
fn qubit_pulses(modes: &BTreeSet<ModeId>) -> Vec<Pulse> {
    let pulses: BTreeSet<Pulse> = modes.iter().map(ModeId::pulse).collect();
    pulses.into_iter().filter(|p| modes.contains(&p.h()) && modes.contains(&p.v())).collect()
}

fn time_bins(modes: &BTreeSet<ModeId>) -> BTreeSet<TimeBin> {
    modes.iter().map(|m| m.time_bin).collect()
}

/// Number of candidates [`enumerate_protocol_space`] would produce.
pub fn count_candidates(modes: &BTreeSet<ModeId>, n_max: u32, intensities: usize, backgrounds: usize) -> u128 {
    let m = modes.len() as u128;
    let exact = binomial(m + u128::from(n_max), u128::from(n_max)).unwrap_or(u128::MAX);
    let per_pulse = if n_max == 0 { 4 } else { 2 };
    let superpositions = per_pulse * qubit_pulses(modes).len() as u128;
    let bright = (intensities as u128)
        .saturating_mul(backgrounds as u128)
        .saturating_mul(4)
        .saturating_mul(time_bins(modes).len() as u128);
    exact.saturating_add(superpositions).saturating_add(bright)
}

/// Photon counts over `m` modes with total `n`, first mode filled first.
fn compositions(m: usize, n: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == m {
        prefix.push(n);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in (0..=n).rev() {
        prefix.push(k);
        compositions(m, n - k, prefix, out);
        prefix.pop();
    }
}

/// Candidate incidents in a fixed order: every occupation basis state over
/// `modes` with at most `n_max` photons (by total, then filling earlier
/// modes first), the qubit states of each pulse not already listed, then
/// bright pulses for each background, intensity, polarization
/// (H, V, +45, -45) and time bin.
pub fn enumerate_protocol_space(
    modes: &BTreeSet<ModeId>,
    n_max: u32,
    intensities: &[f64],
    backgrounds: &[f64],
    cap: usize,
) -> Result<Vec<Incident>, AnalyzerError> {
    if modes.is_empty() {
        return Err(AnalyzerError::Bounds("mode set is empty".into()));
    }
    if n_max > DEFAULT_PHOTON_CAP {
        return Err(AnalyzerError::Bounds(format!(
            "n_max {n_max} exceeds the exact-regime cap of {DEFAULT_PHOTON_CAP}"
        )));
    }
    if let Some(bad) = intensities.iter().chain(backgrounds).find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(AnalyzerError::Bounds(format!(
            "intensity and background grids need finite values >= 0, got {bad}"
        )));
    }
    let count = count_candidates(modes, n_max, intensities.len(), backgrounds.len());
    if count > cap as u128 {
        return Err(AnalyzerError::TooManyCandidates { count, cap });
    }

    let order: Vec<ModeId> = modes.iter().copied().collect();
    let mut out = Vec::with_capacity(count as usize);
    for total in 0..=n_max {
        let mut vectors = Vec::new();
        compositions(order.len(), total, &mut Vec::new(), &mut vectors);
        for counts in vectors {
            let occ = OccupationVector::from_counts(order.iter().copied().zip(counts));
            out.push(Incident::quantum(PureState::basis_state(modes.iter().copied(), occ)?));
        }
    }
    for pulse in qubit_pulses(modes) {
        let rest: Vec<ModeId> = modes.iter().copied().filter(|m| m.pulse() != pulse).collect();
        for basis in Basis::BOTH {
            if basis == Basis::Computational && n_max > 0 {
                continue;
            }
            for bit in 0..2 {
                let qubit = PureState::encode_qubit(basis, bit, pulse.time_bin, pulse.path);
                let state =
                    if rest.is_empty() { qubit } else { qubit.tensor(&PureState::vacuum(rest.iter().copied())?)? };
                out.push(Incident::quantum(state));
            }
        }
    }
    let bins = time_bins(modes);
    for &background in backgrounds {
        for &k in intensities {
            for pol in LinearPolarization::ALL {
                for &t in &bins {
                    let pulse = MacroPulse::polarized(Pulse::new(t, Path::Regular), pol, k)?;
                    out.push(Incident::bright(pulse).with_background(background));
                }
            }
        }
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}
