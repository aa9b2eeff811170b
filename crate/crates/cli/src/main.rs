use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};

use qkdsim::protocol::{run, RunConfig};
use qkdsim::reports::{
    analyze_receiver, compare_runs, preset, presets, run_scenario, AnalysisOptions, ReceiverPreset, ScenarioReport,
};

/// BB84 simulator with imperfect receivers and pluggable eavesdroppers.
#[derive(Parser)]
#[command(name = "qkdsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset scenario or a configuration file.
    ///
    /// Exits 0 on success, 2 when Alice and Bob abort, 1 on errors.
    Run {
        /// Preset name (see `list-presets`). `analyze` is accepted as an
        /// alias for the analyze command.
        preset: Option<String>,
        /// TOML run configuration instead of a preset.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rounds: Option<u64>,
        /// Write the JSON report here and the table next to it (.txt).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Receiver for the `analyze` alias.
        #[arg(long, default_value = "gated")]
        receiver: String,
    },
    /// Probe a receiver and search for a zero-error faked-state attack.
    Analyze {
        /// One of: ideal, gated, blindable, compromised.
        #[arg(long, default_value = "gated")]
        receiver: String,
        /// Rounds of the end-to-end check of a found recipe.
        #[arg(long, default_value_t = 20_000)]
        verify_rounds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Side-by-side table of two or more JSON reports.
    Compare { reports: Vec<PathBuf> },
    /// List the built-in scenarios.
    ListPresets,
}

fn write_outputs(out: &Path, json: &str, table: &str) -> Result<()> {
    std::fs::write(out, json).with_context(|| format!("writing {}", out.display()))?;
    let table_path = out.with_extension("txt");
    if table_path != out {
        std::fs::write(&table_path, table).with_context(|| format!("writing {}", table_path.display()))?;
    }
    Ok(())
}

fn cmd_run(
    name: Option<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    rounds: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExitCode> {
    let report = match (name, config) {
        (_, Some(path)) => {
            let mut cfg = RunConfig::load(&path)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = rounds {
                cfg.rounds = n;
            }
            let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("config").to_string();
            ScenarioReport::new(&label, &cfg, run(&cfg)?)
        }
        (Some(name), None) => {
            let scenario =
                preset(&name).ok_or_else(|| anyhow!("unknown preset `{name}`; see `qkdsim list-presets`"))?;
            run_scenario(&scenario, seed, rounds)?
        }
        (None, None) => bail!("give a preset name or --config <path>"),
    };
    let table = report.table();
    print!("{table}");
    if let Some(out) = out {
        write_outputs(&out, &report.to_json(), &table)?;
    }
    Ok(if report.report.aborted { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_analyze(receiver: &str, verify_rounds: u64, out: Option<PathBuf>) -> Result<ExitCode> {
    let preset = ReceiverPreset::from_name(receiver)
        .ok_or_else(|| anyhow!("unknown receiver `{receiver}`; choose ideal, gated, blindable or compromised"))?;
    let options = AnalysisOptions { verify_rounds, ..AnalysisOptions::default() };
    let (report, _) = analyze_receiver(preset.name(), &preset.receiver(), &options)?;
    let table = report.table();
    print!("{table}");
    if let Some(out) = out {
        write_outputs(&out, &report.to_json(), &table)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(paths: &[PathBuf]) -> Result<ExitCode> {
    let reports = paths.iter().map(|p| ScenarioReport::read(p)).collect::<Result<Vec<_>, _>>()?;
    print!("{}", compare_runs(&reports)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_list() -> ExitCode {
    let all = presets();
    let width = all.iter().map(|s| s.name.len()).max().unwrap_or(0);
    for s in all {
        println!("{:<width$}  {}", s.name, s.summary);
    }
    ExitCode::SUCCESS
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { preset, receiver, out, .. } if preset.as_deref() == Some("analyze") => {
            cmd_analyze(&receiver, 20_000, out)
        }
        Command::Run { preset, config, seed, rounds, out, .. } => cmd_run(preset, config, seed, rounds, out),
        Command::Analyze { receiver, verify_rounds, out } => cmd_analyze(&receiver, verify_rounds, out),
        Command::Compare { reports } => cmd_compare(&reports),
        Command::ListPresets => Ok(cmd_list()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
