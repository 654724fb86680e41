//! The `fit` subcommand: logarithmic slope of a curve CSV.

use std::path::Path;

use symspin::scaling::{fit_log_slope, CurvePoint, EntropyCurve};
use symspin::RenyiOrder;

use crate::entropy::fit_json;
use crate::error::CliError;

/// Reads the `m,S,stderr` CSV written by `entropy`. Comment lines are
/// skipped, except `# order = ...`, which is kept as metadata.
pub fn parse_curve(text: &str) -> Result<EntropyCurve, CliError> {
    let mut order = RenyiOrder::VON_NEUMANN;
    let mut points = Vec::new();
    let mut headers = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("order = ") {
                order = value
                    .parse()
                    .map_err(|e| CliError::Input(format!("line {}: {e}", lineno + 1)))?;
            }
            continue;
        }
        if line.replace(' ', "") == "m,S,stderr" {
            headers += 1;
            if headers > 1 {
                return Err(CliError::Input(format!(
                    "line {}: second curve in one file",
                    lineno + 1
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| CliError::Input(format!("line {}: {what}: {line:?}", lineno + 1));
        if fields.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        let m: u64 = fields[0].parse().map_err(|_| bad("m is not an integer"))?;
        let s: f64 = fields[1].parse().map_err(|_| bad("S is not a number"))?;
        let stderr: f64 = fields[2].parse().map_err(|_| bad("stderr is not a number"))?;
        points.push(CurvePoint { m, s, stderr });
    }
    if points.is_empty() {
        return Err(CliError::Input("no data rows".into()));
    }
    Ok(EntropyCurve {
        points,
        order,
        engine: "csv".into(),
        measure_hash: String::new(),
    })
}

pub fn run(csv: &Path, window: Option<(u64, u64)>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(csv).map_err(CliError::io(csv.display().to_string()))?;
    let curve = parse_curve(&text)?;
    let fit = fit_log_slope(&curve, window).map_err(|e| match e {
        symspin::Error::InvalidArgument(msg) => CliError::Input(msg),
        other => CliError::core("scaling_analysis", "fit_log_slope")(other),
    })?;
    println!(
        "{}",
        serde_json::to_string_pretty(&fit_json(&fit)).expect("fit serializes")
    );
    Ok(())
}
