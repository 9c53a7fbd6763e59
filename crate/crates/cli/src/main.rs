//! `windrisk`: fault-tree reliability analysis from the command line.
//!
//! Eight subcommands tie the engine together: `validate`, `eval`, `cases`,
//! `sweep`, `verify-paper`, `gate`, `simulate`, and `session`. All output is
//! machine-readable (JSON, JSON Lines, or CSV), deterministic for identical
//! inputs and seed, and file writes are atomic. Exit codes: 0 success,
//! 1 domain error (with an error JSON on stderr), 2 usage error.
//!
//! Work is deliberately sequential — case suites and sweep grids evaluate in
//! sub-millisecond per item, so parallelism would buy nothing and determinism
//! would have to be re-proven. Byte-identical reruns are the contract.

mod emit;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use windrisk_core::evidence::{run_case_suite, sweep, ObservabilitySet};
use windrisk_core::ftree::{fingerprint, parse_model, validate, Diagnostic, FaultTree};
use windrisk_core::gate::{
    evaluate_gate, FeatureSample, GateThresholds, Measure,
};
use windrisk_core::sim::{mission_to_session, run_mission, MissionSpec, SplitMix64};
use windrisk_core::verify::verify_against_published;
use windrisk_core::{apply_case, EvidenceCase, Observation, ReliabilityReport, Session};

use emit::{json_line, json_lines, read_file, report_to_json, suite_to_csv, write_output};

#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
    details: Option<Value>,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            details: None,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    fn to_json(&self) -> Value {
        let mut error = serde_json::Map::new();
        error.insert("kind".to_string(), json!(self.kind));
        error.insert("message".to_string(), json!(self.message));
        if let Some(details) = &self.details {
            error.insert("details".to_string(), details.clone());
        }
        json!({ "error": Value::Object(error) })
    }
}

fn diagnostics_error(kind: &'static str, diagnostics: Vec<Diagnostic>) -> CliError {
    let errors = diagnostics.iter().filter(|d| d.is_error()).count();
    CliError::new(kind, format!("model rejected with {errors} error(s)"))
        .with_details(serde_json::to_value(&diagnostics).expect("diagnostics serialize"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "windrisk",
    version,
    about = "Fault-tree reliability engine: exact Bayesian inference under monitoring evidence"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a model, reporting structure and fingerprint.
    Validate {
        /// Model file (.ft DSL)
        model: PathBuf,
    },
    /// Evaluate the baseline top-event probability, or one evidence case.
    Eval {
        /// Model file (.ft DSL)
        model: PathBuf,
        /// Evidence case file: one JSON document {label, observations}
        #[arg(long)]
        case: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Write to this file (atomically) instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a suite of evidence cases (a JSON array of case documents).
    Cases {
        /// Model file (.ft DSL)
        model: PathBuf,
        /// Case suite: JSON array of {label, observations}
        cases: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep one root's prior across a grid and report P(top) per point.
    Sweep {
        /// Model file (.ft DSL)
        model: PathBuf,
        /// Root event id to sweep
        #[arg(long)]
        target: String,
        /// Grid: comma list "0,0.25,0.5" or range "start:stop:step"
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare a model against the published blade-system study.
    VerifyPaper {
        /// Model file (.ft DSL); must declare BE1, BE2, and BE14
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Gate an observed sample against a trusted one by ECDF distance.
    Gate {
        /// Trusted sample: single-column CSV of feature values
        trusted: PathBuf,
        /// Observed sample: single-column CSV of feature values
        observed: PathBuf,
        /// Distance measure: ks, kuiper, cvm, ad, or w1
        #[arg(long, default_value = "w1")]
        measure: String,
        /// Recapture threshold (defaults to 0.6; WINDRISK_TAU_LOW overrides)
        #[arg(long)]
        tau_low: Option<f64>,
        /// Proceed threshold (defaults to 0.9; WINDRISK_TAU_HIGH overrides)
        #[arg(long)]
        tau_high: Option<f64>,
        /// Normalization scale for cvm/ad/w1 (defaults to the trusted IQR)
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a seeded drone inspection mission and report its evidence.
    Simulate {
        /// Model file (.ft DSL)
        model: PathBuf,
        /// Mission spec: JSON {plan?, scenario?}
        scenario: PathBuf,
        /// Mission seed; identical seeds rerun bit-identically
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance measure for the capture gate
        #[arg(long, default_value = "w1")]
        measure: String,
        #[arg(long)]
        tau_low: Option<f64>,
        #[arg(long)]
        tau_high: Option<f64>,
        /// Trusted sample CSV (defaults to a seeded reference sample)
        #[arg(long)]
        trusted: Option<PathBuf>,
        /// Observable event ids, comma-separated (defaults to all events)
        #[arg(long)]
        observability: Option<String>,
        /// Also write every capture record as JSON Lines to this file
        #[arg(long)]
        captures: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replay an observation stream (JSON Lines) through an evidence session.
    Session {
        /// Model file (.ft DSL)
        model: PathBuf,
        /// Observations: one JSON document per line
        observations: PathBuf,
        /// Observable event ids, comma-separated (defaults to all events)
        #[arg(long)]
        observability: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                // Help and version asked for by name are successes; every
                // other parse failure (including a missing subcommand) is a
                // usage error.
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", serde_json::to_string(&err.to_json()).expect("error JSON"));
            ExitCode::FAILURE
        }
    }
}

/// Every referenced input must exist before any work begins.
fn preflight(paths: &[&Path]) -> Result<(), CliError> {
    for path in paths {
        if !path.is_file() {
            return Err(CliError::new(
                "io",
                format!("input file `{}` does not exist", path.display()),
            ));
        }
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<FaultTree, CliError> {
    let text = read_file(path)?;
    parse_model(&text).map_err(|diags| diagnostics_error("model", diags))
}

/// Threshold resolution: explicit flag, then environment override, then the
/// built-in default. Only these two environment variables are honoured.
fn resolve_thresholds(
    tau_low: Option<f64>,
    tau_high: Option<f64>,
) -> Result<GateThresholds, CliError> {
    let from_env = |name: &'static str| -> Result<Option<f64>, CliError> {
        match std::env::var(name) {
            Ok(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| CliError::new("config", format!("{name}=`{raw}` is not a number"))),
            Err(_) => Ok(None),
        }
    };
    let defaults = GateThresholds::default();
    let low = match tau_low {
        Some(v) => v,
        None => from_env("WINDRISK_TAU_LOW")?.unwrap_or(defaults.tau_low),
    };
    let high = match tau_high {
        Some(v) => v,
        None => from_env("WINDRISK_TAU_HIGH")?.unwrap_or(defaults.tau_high),
    };
    GateThresholds::new(low, high).map_err(|e| CliError::new("gate", e.to_string()))
}

fn parse_measure(token: &str) -> Result<Measure, CliError> {
    token
        .parse::<Measure>()
        .map_err(|e| CliError::new("gate", e.to_string()))
}

/// Grid spec: either a comma-separated list or an inclusive start:stop:step.
fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |detail: String| CliError::new("usage", detail);
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!(
                "grid range `{spec}` must be start:stop:step"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{p}` in grid `{spec}` is not a number")))
            })
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || !step.is_finite() || stop < start {
            return Err(bad(format!(
                "grid range `{spec}` needs stop ≥ start and step > 0"
            )));
        }
        let count = ((stop - start) / step).round() as usize;
        let mut grid: Vec<f64> = (0..=count).map(|i| start + i as f64 * step).collect();
        // Guard against one-ulp drift at the far end.
        if let Some(last) = grid.last_mut() {
            if (*last - stop).abs() < step * 1e-9 {
                *last = stop;
            }
        }
        grid.retain(|&g| g <= stop + step * 1e-9);
        Ok(grid)
    } else {
        spec.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("`{p}` in grid `{spec}` is not a number")))
            })
            .collect()
    }
}

/// Load a single-column CSV of feature values. A non-numeric first row is
/// tolerated as a header; anything else must parse.
fn load_sample_csv(path: &Path, label: &str) -> Result<FeatureSample, CliError> {
    let text = read_file(path)?;
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if idx == 0 => continue, // header row
            Err(_) => {
                return Err(CliError::new(
                    "csv",
                    format!(
                        "`{}` line {}: `{field}` is not a number",
                        path.display(),
                        idx + 1
                    ),
                ));
            }
        }
    }
    FeatureSample::new(label, values).map_err(|e| CliError::new("gate", e.to_string()))
}

fn parse_observability(
    ft: &FaultTree,
    spec: Option<&str>,
) -> Result<ObservabilitySet, CliError> {
    let set = match spec {
        None => ObservabilitySet::all_events(ft),
        Some(list) => list
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .collect(),
    };
    set.validate_against(ft)
        .map_err(|e| CliError::new("evidence", e.to_string()))?;
    Ok(set)
}

/// The default trusted reference for `simulate` when no CSV is supplied:
/// 256 standard-normal draws from a fixed seed, independent of the mission
/// seed so the reference never shifts under the mission.
fn default_trusted() -> FeatureSample {
    let mut rng = SplitMix64::new(7);
    FeatureSample::new(
        "trusted-reference",
        (0..256).map(|_| rng.next_gaussian()).collect(),
    )
    .expect("reference sample is valid")
}

fn emit_reports(
    reports: &[&ReliabilityReport],
    format: Format,
    output: Option<&Path>,
    as_suite: bool,
) -> Result<(), CliError> {
    let content = match format {
        Format::Json if as_suite => {
            let values: Vec<Value> = reports.iter().map(|r| report_to_json(r)).collect();
            json_line(&Value::Array(values))
        }
        Format::Json => json_line(&report_to_json(reports[0])),
        Format::Csv => suite_to_csv(reports)?,
    };
    write_output(&content, output)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { model } => {
            preflight(&[&model])?;
            let ft = load_model(&model)?;
            let warnings: Vec<Diagnostic> = validate(&ft)
                .into_iter()
                .filter(|d| !d.is_error())
                .collect();
            let digest = fingerprint(&ft)
                .map_err(|diags| diagnostics_error("model", diags))?
                .digest;
            let doc = json!({
                "status": "ok",
                "fingerprint": digest,
                "events": ft.events.len(),
                "gates": ft.gates.len(),
                "top": ft.top,
                "warnings": serde_json::to_value(&warnings).expect("warnings serialize"),
            });
            write_output(&json_line(&doc), None)
        }
        Command::Eval {
            model,
            case,
            format,
            output,
        } => {
            let mut inputs: Vec<&Path> = vec![&model];
            if let Some(case_path) = &case {
                inputs.push(case_path);
            }
            preflight(&inputs)?;
            let ft = load_model(&model)?;
            let report = match &case {
                None => {
                    // Baseline only: an empty case evaluates to the prior
                    // top-event probability.
                    let empty = EvidenceCase {
                        label: "baseline".to_string(),
                        observations: Vec::new(),
                    };
                    apply_case(&ft, &empty)
                        .map_err(|e| CliError::new("evidence", e.to_string()))?
                }
                Some(case_path) => {
                    let text = read_file(case_path)?;
                    let case: EvidenceCase = serde_json::from_str(&text).map_err(|e| {
                        CliError::new("json", format!("`{}`: {e}", case_path.display()))
                    })?;
                    apply_case(&ft, &case)
                        .map_err(|e| CliError::new("evidence", e.to_string()))?
                }
            };
            emit_reports(&[&report], format, output.as_deref(), false)
        }
        Command::Cases {
            model,
            cases,
            format,
            output,
        } => {
            preflight(&[&model, &cases])?;
            let ft = load_model(&model)?;
            let text = read_file(&cases)?;
            let suite: Vec<EvidenceCase> = serde_json::from_str(&text)
                .map_err(|e| CliError::new("json", format!("`{}`: {e}", cases.display())))?;
            let outcomes = run_case_suite(&ft, &suite);
            // The whole suite must succeed; partial tables are not emitted.
            let mut reports: Vec<&ReliabilityReport> = Vec::with_capacity(outcomes.len());
            for outcome in &outcomes {
                match &outcome.result {
                    Ok(report) => reports.push(report),
                    Err(e) => {
                        return Err(CliError::new(
                            "evidence",
                            format!("case `{}`: {e}", outcome.label),
                        ));
                    }
                }
            }
            emit_reports(&reports, format, output.as_deref(), true)
        }
        Command::Sweep {
            model,
            target,
            grid,
            format,
            output,
        } => {
            preflight(&[&model])?;
            let ft = load_model(&model)?;
            let grid = parse_grid(&grid)?;
            let points = sweep(&ft, &target, &grid)
                .map_err(|e| CliError::new("evidence", e.to_string()))?;
            let content = match format {
                Format::Json => json_line(&emit::sweep_to_json(&target, &points)),
                Format::Csv => emit::sweep_to_csv(&points)?,
            };
            write_output(&content, output.as_deref())
        }
        Command::VerifyPaper {
            model,
            format,
            output,
        } => {
            preflight(&[&model])?;
            let ft = load_model(&model)?;
            let report = verify_against_published(&ft)
                .map_err(|e| CliError::new("evidence", e.to_string()))?;
            let content = match format {
                Format::Json => json_line(
                    &serde_json::to_value(&report).expect("verify report serializes"),
                ),
                Format::Csv => emit::verify_to_csv(&report)?,
            };
            write_output(&content, output.as_deref())
        }
        Command::Gate {
            trusted,
            observed,
            measure,
            tau_low,
            tau_high,
            scale,
            output,
        } => {
            preflight(&[&trusted, &observed])?;
            let measure = parse_measure(&measure)?;
            let thresholds = resolve_thresholds(tau_low, tau_high)?;
            let trusted_sample = load_sample_csv(&trusted, "trusted")?;
            let observed_sample = load_sample_csv(&observed, "observed")?;
            let (distance, decision) = match scale {
                None => evaluate_gate(measure, &trusted_sample, &observed_sample, thresholds)
                    .map_err(|e| CliError::new("gate", e.to_string()))?,
                Some(s) => {
                    let report = windrisk_core::gate::ecdf_distance_scaled(
                        measure,
                        &trusted_sample,
                        &observed_sample,
                        Some(s),
                    )
                    .map_err(|e| CliError::new("gate", e.to_string()))?;
                    let mut decision =
                        windrisk_core::gate::decide(report.confidence, thresholds)
                            .map_err(|e| CliError::new("gate", e.to_string()))?;
                    decision.measure = Some(measure);
                    (report, decision)
                }
            };
            let doc = json!({
                "trusted": {"path": trusted.display().to_string(), "n": trusted_sample.len()},
                "observed": {"path": observed.display().to_string(), "n": observed_sample.len()},
                "distance": serde_json::to_value(&distance).expect("distance serializes"),
                "decision": serde_json::to_value(decision).expect("decision serializes"),
                "thresholds": serde_json::to_value(thresholds).expect("thresholds serialize"),
            });
            write_output(&json_line(&doc), output.as_deref())
        }
        Command::Simulate {
            model,
            scenario,
            seed,
            measure,
            tau_low,
            tau_high,
            trusted,
            observability,
            captures,
            format,
            output,
        } => {
            let mut inputs: Vec<&Path> = vec![&model, &scenario];
            if let Some(trusted_path) = &trusted {
                inputs.push(trusted_path);
            }
            preflight(&inputs)?;
            let ft = load_model(&model)?;
            let text = read_file(&scenario)?;
            let spec: MissionSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::new("json", format!("`{}`: {e}", scenario.display())))?;
            let measure = parse_measure(&measure)?;
            let thresholds = resolve_thresholds(tau_low, tau_high)?;
            let observability = parse_observability(&ft, observability.as_deref())?;
            let trusted_sample = match &trusted {
                Some(path) => load_sample_csv(path, "trusted")?,
                None => default_trusted(),
            };
            let outcome = run_mission(
                &spec.plan,
                &spec.scenario,
                &observability,
                &trusted_sample,
                thresholds,
                measure,
                seed,
            )
            .map_err(|e| CliError::new("sim", e.to_string()))?;

            if let Some(captures_path) = &captures {
                let lines: Vec<Value> = outcome
                    .captures
                    .iter()
                    .map(|c| serde_json::to_value(c).expect("capture serializes"))
                    .collect();
                write_output(&json_lines(&lines), Some(captures_path))?;
            }

            let timeline = mission_to_session(&ft, observability, &outcome.observations)
                .map_err(|e| CliError::new("evidence", e.to_string()))?;

            match format {
                Format::Json => {
                    let mut action_counts: BTreeMap<String, usize> = BTreeMap::new();
                    for capture in &outcome.captures {
                        *action_counts
                            .entry(capture.decision.action.to_string())
                            .or_insert(0) += 1;
                    }
                    let doc = json!({
                        "seed": seed,
                        "turbine": spec.plan.turbine,
                        "measure": measure.token(),
                        "captures": {
                            "total": outcome.captures.len(),
                            "actions": action_counts,
                            "recaptures": outcome
                                .captures
                                .iter()
                                .map(|c| c.recaptures)
                                .sum::<u32>(),
                        },
                        "observations": serde_json::to_value(&outcome.observations)
                            .expect("observations serialize"),
                        "timeline": timeline
                            .iter()
                            .map(report_to_json)
                            .collect::<Vec<Value>>(),
                    });
                    write_output(&json_line(&doc), output.as_deref())
                }
                Format::Csv => {
                    let reports: Vec<&ReliabilityReport> = timeline.iter().collect();
                    let content = suite_to_csv(&reports)?;
                    write_output(&content, output.as_deref())
                }
            }
        }
        Command::Session {
            model,
            observations,
            observability,
            format,
            output,
        } => {
            preflight(&[&model, &observations])?;
            let ft = load_model(&model)?;
            let observability = parse_observability(&ft, observability.as_deref())?;
            let text = read_file(&observations)?;
            let mut session = Session::open(&ft, observability)
                .map_err(|e| CliError::new("evidence", e.to_string()))?;
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let obs: Observation = serde_json::from_str(line).map_err(|e| {
                    CliError::new(
                        "json",
                        format!("`{}` line {}: {e}", observations.display(), idx + 1),
                    )
                })?;
                session.append(obs).map_err(|e| {
                    CliError::new(
                        "evidence",
                        format!("`{}` line {}: {e}", observations.display(), idx + 1),
                    )
                })?;
            }
            match format {
                Format::Json => {
                    let lines: Vec<Value> = session
                        .log()
                        .iter()
                        .map(|entry| {
                            json!({
                                "observation": serde_json::to_value(&entry.observation)
                                    .expect("observation serializes"),
                                "report": report_to_json(&entry.report),
                            })
                        })
                        .collect();
                    write_output(&json_lines(&lines), output.as_deref())
                }
                Format::Csv => {
                    let reports: Vec<&ReliabilityReport> =
                        session.log().iter().map(|entry| &entry.report).collect();
                    let content = suite_to_csv(&reports)?;
                    write_output(&content, output.as_deref())
                }
            }
        }
    }
}
