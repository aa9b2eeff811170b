use serde::{Deserialize, Serialize};

use super::AnalyzerError;
use crate::devices::{ArrivalTally, DetectorModel, DetectorOutcome};

/// A detector Eve can only poke from outside. Every probe sees a fresh
/// instance: a burned one is simply replaced.
pub trait BlackBoxDetector {
    /// One pulse of `pulse` photons inside the gate on top of `background`.
    fn probe(&self, pulse: u64, background: u64) -> DetectorOutcome;
}

impl BlackBoxDetector for DetectorModel {
    fn probe(&self, pulse: u64, background: u64) -> DetectorOutcome {
        let arrivals: ArrivalTally = [(self.gate().0, pulse as f64)].into_iter().collect();
        self.respond(&arrivals, background as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// `N1 - 1` and `N1 + 1` around the located blinding threshold.
    pub n1_bracket: (u64, u64),
    /// Inclusive range known to contain the damage threshold.
    pub n2_bracket: (u64, u64),
    pub probe_count: usize,
    /// Probes that destroyed their detector instance.
    pub sacrificed: usize,
}

/// Locates the blinding threshold by doubling then bisecting the background
/// under a one-photon pulse (a detector in Geiger mode clicks, a blinded one
/// stays silent), then escalates single-pulse energies from there until a
/// detector burns.
pub fn probe_thresholds(detector: &dyn BlackBoxDetector, k_max: u64) -> Result<ThresholdEstimate, AnalyzerError> {
    let mut probe_count = 0;
    let mut sacrificed = 0;
    let mut probe = |pulse: u64, background: u64| {
        probe_count += 1;
        let outcome = detector.probe(pulse, background);
        if outcome == DetectorOutcome::Burned {
            sacrificed += 1;
        }
        outcome
    };

    let mut clicking = 0;
    let mut silent = None;
    let mut b = 1;
    while b <= k_max {
        if probe(1, b) != DetectorOutcome::Click {
            silent = Some(b);
            break;
        }
        clicking = b;
        if b == k_max {
            break;
        }
        b = b.saturating_mul(2).min(k_max);
    }
    let mut silent = silent.ok_or(AnalyzerError::NoTransition { k_max })?;
    while silent - clicking > 1 {
        let mid = clicking + (silent - clicking) / 2;
        if probe(1, mid) == DetectorOutcome::Click {
            clicking = mid;
        } else {
            silent = mid;
        }
    }
    let n1 = silent;

    // below N1 nothing burns, so N1 photons are known to be safe
    let mut safe = n1;
    let n2_bracket = loop {
        let energy = safe.saturating_mul(2).min(k_max);
        if energy <= safe {
            return Err(AnalyzerError::NoDamage { k_max });
        }
        if probe(energy, 0) == DetectorOutcome::Burned {
            break (safe + 1, energy);
        }
        safe = energy;
    };

    Ok(ThresholdEstimate { n1_bracket: (n1 - 1, n1 + 1), n2_bracket, probe_count, sacrificed })
}
