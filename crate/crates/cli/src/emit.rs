//! Report rendering and output plumbing: JSON/CSV emission with the table
//! formatting conventions, plus atomic file writes.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use windrisk_core::evidence::{ObservationKind, SweepPoint};
use windrisk_core::fmtnum::{format_pct, format_sci4};
use windrisk_core::ftree::natural_cmp;
use windrisk_core::verify::VerifyReport;
use windrisk_core::ReliabilityReport;

use crate::CliError;

/// The compact table token for an observation: hard values as T/F, scaled
/// priors as a signed percentage, absolute priors spelled out.
pub fn observation_token(kind: &ObservationKind) -> String {
    match kind {
        ObservationKind::Hard { value: true } => "T".to_string(),
        ObservationKind::Hard { value: false } => "F".to_string(),
        ObservationKind::Scaled { pct } => format!("{pct:+}%"),
        ObservationKind::Absolute { p } => format!("p={p}"),
    }
}

/// A reliability report as a JSON document carrying both the formatted
/// table strings and the raw values they round from.
pub fn report_to_json(report: &ReliabilityReport) -> Value {
    let observations: Vec<Value> = report
        .observations
        .iter()
        .map(|echo| {
            let mut value = serde_json::to_value(echo).expect("echo serializes");
            value
                .as_object_mut()
                .expect("echo is an object")
                .insert("label".to_string(), json!(observation_token(&echo.kind)));
            value
        })
        .collect();
    json!({
        "case": report.case,
        "fingerprint": report.fingerprint,
        "baseline": format_sci4(report.baseline),
        "baseline_value": report.baseline,
        "posterior": format_sci4(report.posterior),
        "posterior_value": report.posterior,
        "pct_change": format_pct(report.pct_change),
        "pct_change_value": report.pct_change,
        "direction": report.direction.to_string(),
        "glyph": report.direction.glyph(),
        "observations": observations,
    })
}

/// Render a suite of reports as the paper-style CSV table: one row per
/// case, one column per observed event (union across the suite, natural id
/// order), then posterior, percent change, and direction.
pub fn suite_to_csv(reports: &[&ReliabilityReport]) -> Result<String, CliError> {
    let mut events: Vec<String> = Vec::new();
    for report in reports {
        for echo in &report.observations {
            if !events.iter().any(|e| e == &echo.event) {
                events.push(echo.event.clone());
            }
        }
    }
    events.sort_by(|a, b| natural_cmp(a, b));

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["case".to_string()];
    header.extend(events.iter().cloned());
    header.extend(
        ["bsfp", "pct_change", "direction"]
            .iter()
            .map(|s| s.to_string()),
    );
    writer
        .write_record(&header)
        .map_err(|e| CliError::new("csv", e.to_string()))?;

    for report in reports {
        let mut row = vec![report.case.clone()];
        for event in &events {
            let token = report
                .observations
                .iter()
                .find(|echo| &echo.event == event)
                .map(|echo| observation_token(&echo.kind))
                .unwrap_or_else(|| "-".to_string());
            row.push(token);
        }
        row.push(format_sci4(report.posterior));
        row.push(format_pct(report.pct_change));
        row.push(report.direction.to_string());
        writer
            .write_record(&row)
            .map_err(|e| CliError::new("csv", e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::new("csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new("csv", e.to_string()))
}

pub fn sweep_to_json(target: &str, points: &[SweepPoint]) -> Value {
    json!({
        "target": target,
        "points": points
            .iter()
            .map(|p| {
                json!({
                    "prior": p.prior,
                    "probability": p.probability,
                    "formatted": format_sci4(p.probability),
                })
            })
            .collect::<Vec<Value>>(),
    })
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["prior", "probability", "formatted"])
        .map_err(|e| CliError::new("csv", e.to_string()))?;
    for point in points {
        writer
            .write_record([
                point.prior.to_string(),
                point.probability.to_string(),
                format_sci4(point.probability),
            ])
            .map_err(|e| CliError::new("csv", e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::new("csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new("csv", e.to_string()))
}

/// Flatten the verification report into one CSV row per published case.
pub fn verify_to_csv(report: &VerifyReport) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "table",
            "case",
            "computed",
            "computed_formatted",
            "published",
            "rel_residual",
            "computed_pct",
            "published_pct",
            "pct_diff_pp",
        ])
        .map_err(|e| CliError::new("csv", e.to_string()))?;
    for (table, residuals) in [
        ("binary", &report.hard),
        ("soft", &report.soft),
        ("mixed", &report.mixed),
    ] {
        for r in residuals {
            writer
                .write_record([
                    table.to_string(),
                    r.label.clone(),
                    r.computed.to_string(),
                    r.computed_formatted.clone(),
                    r.published.to_string(),
                    r.rel_residual.to_string(),
                    format_pct(r.computed_pct),
                    format_pct(r.published_pct),
                    r.pct_diff_pp.to_string(),
                ])
                .map_err(|e| CliError::new("csv", e.to_string()))?;
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::new("csv", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new("csv", e.to_string()))
}

/// Compact JSON document plus trailing newline.
pub fn json_line(value: &Value) -> String {
    let mut text = serde_json::to_string(value).expect("JSON value serializes");
    text.push('\n');
    text
}

/// JSON Lines: one compact document per line.
pub fn json_lines(values: &[Value]) -> String {
    let mut out = String::new();
    for value in values {
        out.push_str(&json_line(value));
    }
    out
}

/// Write to stdout, or atomically to a file: the content lands in a
/// temporary file in the destination directory and is renamed into place,
/// so a failed run never leaves a partial artifact behind.
pub fn write_output(content: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(parent) if !parent.as_os_str().is_empty() => parent.to_path_buf(),
                _ => Path::new(".").to_path_buf(),
            };
            if !dir.is_dir() {
                return Err(CliError::new(
                    "io",
                    format!("output directory `{}` does not exist", dir.display()),
                ));
            }
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .map_err(|e| CliError::new("io", format!("cannot create temporary file: {e}")))?;
            tmp.write_all(content.as_bytes())
                .map_err(|e| CliError::new("io", format!("cannot write output: {e}")))?;
            tmp.persist(path).map_err(|e| {
                CliError::new(
                    "io",
                    format!("cannot move output into `{}`: {}", path.display(), e),
                )
            })?;
            Ok(())
        }
    }
}

/// Read a whole input file, with a path-qualified error.
pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("cannot read `{}`: {}", path.display(), e)))
}
