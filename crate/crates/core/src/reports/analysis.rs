use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{aligned_pairs, ReportError};
use crate::analyzer::{
    probe_thresholds, reverse_bob_unitary, synthesize_faked_states, AttackRecipe, DesiredOutcome, Evaluation,
    SpaceBounds, Synthesis, ThresholdEstimate,
};
use crate::attacks::RecipeAttack;
use crate::devices::{Incident, ReceiverConfig};
use crate::photonic::{Basis, TimeBin};
use crate::protocol::{InvalidPolicy, RunConfig, RunReport, Simulation};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub k_max: u64,
    pub n_max: u32,
    pub intensities: Vec<f64>,
    pub backgrounds: Vec<f64>,
    pub epsilon: f64,
    pub policy: InvalidPolicy,
    /// Rounds of the end-to-end check of a found recipe; 0 skips it.
    pub verify_rounds: u64,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            k_max: 1 << 24,
            n_max: 4,
            intensities: vec![1.0, 10.0, 100.0, 500.0, 1000.0, 1500.0, 2000.0, 1e4, 1e6],
            backgrounds: vec![0.0, 10.0, 100.0, 1000.0],
            epsilon: 0.0,
            policy: InvalidPolicy::AsError,
            verify_rounds: 20_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorProbe {
    pub detector: usize,
    pub estimate: Option<ThresholdEstimate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeLine {
    pub basis: Basis,
    pub bit: u8,
    pub candidate: usize,
    pub incident: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeSummary {
    pub background: f64,
    pub achieved_loss: f64,
    pub entries: Vec<RecipeLine>,
}

impl RecipeSummary {
    pub fn of(recipe: &AttackRecipe) -> Self {
        Self {
            background: recipe.background,
            achieved_loss: recipe.achieved_loss,
            entries: recipe
                .entries()
                .map(|e| RecipeLine {
                    basis: e.basis,
                    bit: e.bit,
                    candidate: e.candidate,
                    incident: e.incident.describe(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub receiver: String,
    pub thresholds: Vec<DetectorProbe>,
    pub candidates: usize,
    /// Candidates obtained by running Bob's optics backwards.
    pub reversed_candidates: usize,
    pub recipe: Option<RecipeSummary>,
    /// End-to-end run with the recipe as Eve's strategy.
    pub verification: Option<RunReport>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![("receiver".into(), self.receiver.clone())];
        for p in &self.thresholds {
            let value = match (&p.estimate, &p.error) {
                (Some(e), _) => format!(
                    "N1 in {:?}, N2 in {:?} ({} probes, {} sacrificed)",
                    e.n1_bracket, e.n2_bracket, e.probe_count, e.sacrificed
                ),
                (None, Some(err)) => err.clone(),
                (None, None) => "not probed".into(),
            };
            rows.push((format!("detector {}", p.detector), value));
        }
        rows.push(("candidates".into(), format!("{} ({} reversed)", self.candidates, self.reversed_candidates)));
        match &self.recipe {
            None => rows.push(("recipe".into(), "not found".into())),
            Some(r) => {
                rows.push(("recipe background".into(), r.background.to_string()));
                rows.push(("recipe loss".into(), format!("{:.4}", r.achieved_loss)));
                for e in &r.entries {
                    rows.push((
                        format!("eve {} {}", e.basis.short(), e.bit),
                        format!("#{} {}", e.candidate, e.incident),
                    ));
                }
            }
        }
        if let Some(v) = &self.verification {
            let qber = v.qber.map_or("undefined".into(), |q| format!("{q:.6}"));
            rows.push((
                "end-to-end".into(),
                format!("qber {qber}, loss {:.4}, eve_info {:.6}, aborted {}", v.loss_rate, v.eve_info, v.aborted),
            ));
        }
        let borrowed: Vec<(&str, String)> = rows.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        let mut out = aligned_pairs(&borrowed);
        if self.recipe.is_none() {
            let _ = writeln!(out, "no zero-error faked-state attack exists within these bounds");
        }
        out
    }
}

/// Probes the receiver's detectors, searches the bounded protocol space
/// (plus the states obtained by reversing Bob's optics) for faked states,
/// and replays any recipe found through a full protocol run.
pub fn analyze_receiver(
    name: &str,
    receiver: &ReceiverConfig,
    options: &AnalysisOptions,
) -> Result<(AnalysisReport, Option<AttackRecipe>), ReportError> {
    let thresholds = receiver
        .detector_models()
        .iter()
        .enumerate()
        .map(|(detector, model)| match probe_thresholds(model, options.k_max) {
            Ok(e) => DetectorProbe { detector, estimate: Some(e), error: None },
            Err(e) => DetectorProbe { detector, estimate: None, error: Some(e.to_string()) },
        })
        .collect();

    let bounds = SpaceBounds::timed(options.n_max).with_grid(options.intensities.clone(), options.backgrounds.clone());
    let mut candidates = bounds.enumerate()?;
    let mut reversed = 0;
    for basis in Basis::BOTH {
        for bit in 0..2 {
            for time_bin in TimeBin::STANDARD {
                if let Ok(state) = reverse_bob_unitary(receiver, DesiredOutcome { basis, bit, time_bin }) {
                    candidates.push(Incident::quantum(state));
                    reversed += 1;
                }
            }
        }
    }

    let synthesis = synthesize_faked_states(receiver, &candidates, options.epsilon, options.policy, Evaluation::Exact)?;
    let recipe = match synthesis {
        Synthesis::Found(r) => Some(r),
        Synthesis::NotFound => None,
    };
    let verification = match &recipe {
        Some(r) if options.verify_rounds > 0 => {
            let config = RunConfig {
                rounds: options.verify_rounds,
                seed: options.seed,
                receiver: receiver.clone(),
                invalid_policy: options.policy,
                ..RunConfig::default()
            };
            let outcome = Simulation::new(&config).with_strategy(Box::new(RecipeAttack { recipe: r.clone() })).run()?;
            Some(outcome.report)
        }
        _ => None,
    };
    let report = AnalysisReport {
        receiver: name.to_string(),
        thresholds,
        candidates: candidates.len(),
        reversed_candidates: reversed,
        recipe: recipe.as_ref().map(RecipeSummary::of),
        verification,
    };
    Ok((report, recipe))
}
