//! Scenario presets, run and analysis reports, and their two renderings:
//! an aligned text table for people and JSON for scripts.

mod analysis;
mod scenario;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analyzer::AnalyzerError;
use crate::protocol::{run, RunConfig, RunError, RunReport};

pub use analysis::{analyze_receiver, AnalysisOptions, AnalysisReport, DetectorProbe, RecipeLine, RecipeSummary};
pub use scenario::{preset, presets, Check, Expectation, ExpectedSignature, ReceiverPreset, Scenario};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot read report {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("comparison needs at least two reports, got {0}")]
    TooFew(usize),
    #[error(transparent)]
    Analyzer(#[from] AnalyzerError),
    #[error(transparent)]
    Run(#[from] RunError),
}

/// A finished run with enough context to read it on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub attack: String,
    pub receiver: String,
    pub seed: u64,
    pub rounds: u64,
    #[serde(flatten)]
    pub report: RunReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn new(scenario: &str, config: &RunConfig, report: RunReport) -> Self {
        Self {
            scenario: scenario.to_string(),
            attack: config.attack.to_string(),
            receiver: config.receiver.style_name().to_string(),
            seed: config.seed,
            rounds: config.rounds,
            report,
            checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn read(path: &Path) -> Result<ScenarioReport, ReportError> {
        let unreadable = |reason: String| ReportError::Unreadable { path: path.display().to_string(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| unreadable(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| unreadable(e.to_string()))
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let r = &self.report;
        let mut rows: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.clone()),
            ("attack", self.attack.clone()),
            ("receiver", self.receiver.clone()),
            ("seed", self.seed.to_string()),
            ("rounds", format!("{} (executed {})", self.rounds, r.rounds_executed)),
            ("qber", r.qber.map_or("undefined".into(), |q| format!("{q:.6}"))),
            ("loss_rate", format!("{:.6}", r.loss_rate)),
            ("invalid_rate", format!("{:.6}", r.invalid_rate)),
            ("double_click_rate", format!("{:.6}", r.double_click_rate)),
            ("eve_info", format!("{:.6}", r.eve_info)),
            ("sifted_key_length", r.sifted_key_length.to_string()),
            ("retained_key_length", r.retained_key_length.to_string()),
            ("burned", r.burned.to_string()),
            ("aborted", r.aborted.to_string()),
        ];
        let checks: Vec<(String, String)> = self
            .checks
            .iter()
            .map(|c| {
                let verdict = if c.pass { "ok" } else { "MISMATCH" };
                (format!("expect {}", c.field), format!("{} (observed {}) {verdict}", c.expected, c.observed))
            })
            .collect();
        rows.extend(checks.iter().map(|(k, v)| (k.as_str(), v.clone())));
        aligned_pairs(&rows)
    }
}

fn aligned_pairs(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

/// Runs a preset, optionally overriding seed and round count, and attaches
/// the preset's self-check.
pub fn run_scenario(scenario: &Scenario, seed: Option<u64>, rounds: Option<u64>) -> Result<ScenarioReport, RunError> {
    let mut config = scenario.config.clone();
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(n) = rounds {
        config.rounds = n;
    }
    let report = run(&config)?;
    let mut out = ScenarioReport::new(scenario.name, &config, report);
    if let Some(expected) = &scenario.expected {
        out.checks = expected.check(&out.report);
    }
    Ok(out)
}

/// How a run reads at a glance.
pub fn verdict(report: &RunReport) -> &'static str {
    match report.qber {
        _ if report.burned => "burned",
        None => "no key",
        Some(_) if report.aborted => "detected",
        Some(q) if q == 0.0 && report.eve_info >= 0.99 => "silent, full info",
        Some(_) => "secure",
    }
}

/// Aligned side-by-side table of several reports.
pub fn compare_runs(reports: &[ScenarioReport]) -> Result<String, ReportError> {
    if reports.len() < 2 {
        return Err(ReportError::TooFew(reports.len()));
    }
    let header = ["scenario", "qber", "loss", "invalid", "eve_info", "aborted", "verdict"];
    let rows: Vec<[String; 7]> = reports
        .iter()
        .map(|s| {
            let r = &s.report;
            [
                s.scenario.clone(),
                r.qber.map_or("undefined".into(), |q| format!("{q:.4}")),
                format!("{:.4}", r.loss_rate),
                format!("{:.4}", r.invalid_rate),
                format!("{:.4}", r.eve_info),
                r.aborted.to_string(),
                verdict(r).to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };
    let mut out = String::new();
    let _ = writeln!(out, "{}", line(header.to_vec()));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", line(rule.iter().map(String::as_str).collect()));
    for row in &rows {
        let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
    }
    Ok(out)
}
