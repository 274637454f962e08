use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;

use jamming_game::engine::{consensus_reached, run, GameMode, TraceRecord};
use jamming_game::error::{GameError, Result};
use jamming_game::pbe::EqClass;
use jamming_game::scenario::{load_scenario, write_trace, ScenarioConfig};
use jamming_game::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "jamming-game", version, about = "Jamming attacks on a consensus network as a repeated Bayesian game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bne,
    Screening,
    Signaling,
}

impl From<ModeArg> for GameMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bne => GameMode::Bne,
            ModeArg::Screening => GameMode::Screening,
            ModeArg::Signaling => GameMode::Signaling,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    TwoAgentOracle,
    Invariants,
    Theorems,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::TwoAgentOracle => Suite::TwoAgentOracle,
            SuiteArg::Invariants => Suite::Invariants,
            SuiteArg::Theorems => Suite::Theorems,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write its trace as CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's game mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Override the scenario's horizon.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Check the solvers against closed forms and invariants.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a scenario once per value of one scalar parameter.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// Dotted key of the parameter, e.g. `attacker.rho`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Run {
            scenario,
            out,
            mode,
            steps,
        } => cmd_run(&scenario, &out, mode.map(Into::into), steps).map(|_| true),
        Command::Verify { suite, trials, seed } => cmd_verify(suite.into(), trials, seed),
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => cmd_sweep(&scenario, &param, &values, &out).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// `pooling at k=0, separating from k=1`.
fn class_runs(trace: &[TraceRecord]) -> String {
    let mut runs: Vec<(EqClass, usize, usize)> = Vec::new();
    for r in trace {
        match runs.last_mut() {
            Some((c, _, end)) if *c == r.eq_class => *end = r.k,
            _ => runs.push((r.eq_class, r.k, r.k)),
        }
    }
    let last = runs.len().saturating_sub(1);
    runs.iter()
        .enumerate()
        .map(|(i, &(c, start, end))| {
            if i == last {
                format!("{c} from k={start}")
            } else if start == end {
                format!("{c} at k={start}")
            } else {
                format!("{c} for k={start}..{end}")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn summary(cfg: &ScenarioConfig, trace: &[TraceRecord]) -> String {
    let Some(last) = trace.last() else {
        return "no steps simulated".into();
    };
    let consensus = match consensus_reached(trace, cfg.epsilon_consensus) {
        Some(k) => format!("consensus reached at k={k}"),
        None => "consensus not reached".into(),
    };
    let monotone = trace
        .windows(2)
        .all(|w| w[1].z <= w[0].z + 1e-12 * w[0].z.max(1.0));
    let shape = match (monotone, last.z < trace[0].z) {
        (true, true) => "decreasing",
        (true, false) => "constant",
        (false, _) => "not monotone",
    };
    format!(
        "{consensus}; final z = {}; z {shape} ({} -> {}); {}",
        last.z,
        trace[0].z,
        last.z,
        class_runs(trace)
    )
}

fn cmd_run(path: &Path, out: &Path, mode: Option<GameMode>, steps: Option<usize>) -> Result<()> {
    let mut cfg = load_scenario(path)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(h) = steps {
        cfg.horizon = h;
    }
    let trace = run(&cfg)?;
    write_trace(&trace, cfg.n, out)?;
    println!("{}", summary(&cfg, &trace));
    Ok(())
}

fn cmd_verify(suite: Suite, trials: usize, seed: u64) -> Result<bool> {
    let report = run_suite(suite, trials, seed)?;
    for f in &report.failures {
        println!("FAIL {f}");
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict} {suite}: {} checks, {} failures",
        report.checks,
        report.failures.len()
    );
    Ok(report.passed())
}

/// Sets a numeric leaf addressed by a dotted key. Changing a true cost also
/// moves the type entry it coincides with, so the scenario stays valid.
fn set_param(doc: &mut Value, key: &str, value: f64) -> Result<()> {
    let bad = || GameError::InvalidScenario(format!("{key} does not address a numeric field"));
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().ok_or_else(bad)?;
    let mut parent = &mut *doc;
    for p in parts {
        parent = parent.get_mut(p).ok_or_else(bad)?;
    }
    let obj = parent.as_object_mut().ok_or_else(bad)?;
    let old = obj.get(leaf).filter(|v| v.is_number()).ok_or_else(bad)?.clone();
    let new = if old.is_u64() {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(GameError::InvalidScenario(format!("{key} takes nonnegative integers, got {value}")));
        }
        Value::from(value as u64)
    } else {
        Value::from(value)
    };
    if leaf == "beta_true" {
        for t in ["type_low", "type_high"] {
            if obj.get(t) == Some(&old) {
                obj.insert(t.into(), new.clone());
            }
        }
    }
    obj.insert(leaf.into(), new);
    Ok(())
}

fn cmd_sweep(path: &Path, param: &str, values: &[f64], out: &Path) -> Result<()> {
    let base = load_scenario(path)?;
    let doc: Value = serde_json::from_str(&base.to_json()).map_err(|e| GameError::Parse(e.to_string()))?;
    let configs = values
        .iter()
        .map(|&v| {
            let mut d = doc.clone();
            set_param(&mut d, param, v)?;
            ScenarioConfig::from_value(d)
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out).map_err(|e| GameError::Io(format!("{}: {e}", out.display())))?;
    let rows = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let trace = run(cfg)?;
            write_trace(&trace, cfg.n, out.join(format!("trace_{i}.csv")))?;
            let step = consensus_reached(&trace, cfg.epsilon_consensus);
            let final_z = trace.last().map(|r| r.z).unwrap_or_else(|| jamming_game::disagreement(&cfg.x0));
            Ok((step, final_z))
        })
        .collect::<Result<Vec<_>>>()?;
    let io = |e: csv::Error| GameError::Io(e.to_string());
    let mut w = csv::Writer::from_path(out.join("index.csv")).map_err(io)?;
    w.write_record(["value", "trace", "consensus_step", "final_z"]).map_err(io)?;
    for (i, (v, (step, z))) in values.iter().zip(&rows).enumerate() {
        w.write_record([
            v.to_string(),
            format!("trace_{i}.csv"),
            step.map(|k| k.to_string()).unwrap_or_default(),
            z.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| GameError::Io(e.to_string()))?;
    println!("{} runs written to {}", values.len(), out.display());
    Ok(())
}
