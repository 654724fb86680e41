//! The `entropy` subcommand: evaluate `S_n(m)` curves from a config file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use symspin::scaling::{entropy_curve, fit_log_slope, EntropyCurve, ScalingFit};
use symspin::RenyiOrder;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct EntropyArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// CSV for one curve: `#` header with the resolved config, then `m,S,stderr`.
/// Numbers carry 17 significant digits; lines end in LF.
pub fn format_csv(curve: &EntropyCurve, resolved: &str) -> String {
    let mut out = String::new();
    writeln!(out, "# symspin {}", symspin::VERSION).unwrap();
    writeln!(out, "# order = {}", curve.order).unwrap();
    writeln!(out, "# engine = {}", curve.engine).unwrap();
    writeln!(out, "# measure_hash = {}", curve.measure_hash).unwrap();
    writeln!(out, "# resolved config:").unwrap();
    for line in resolved.lines() {
        writeln!(out, "#   {line}").unwrap();
    }
    out.push_str("m,S,stderr\n");
    for p in &curve.points {
        writeln!(out, "{},{:.16e},{:.16e}", p.m, p.s, p.stderr).unwrap();
    }
    out
}

pub fn fit_json(fit: &ScalingFit) -> Value {
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "residual_rms": fit.residual_rms,
        "window": [fit.window.0, fit.window.1],
        "dimension_estimate": fit.dimension_estimate,
        "points_used": fit.points_used,
    })
}

fn csv_path_for(base: &Path, order: RenyiOrder, several: bool) -> PathBuf {
    if !several {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}.n{order}.{ext}"))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(path.display().to_string()))
}

pub fn run(args: &EntropyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&args.config).map_err(CliError::io(args.config.display().to_string()))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        config.engine.seed = seed;
    }
    if let Some(out) = &args.out {
        config.output.csv = out.display().to_string();
    }
    let measure = config.measure()?;
    let orders = config.orders()?;
    let grid = config.m_grid()?;
    let engine = config.engine();
    let resolved = config.resolved_toml();
    log::info!(
        "{} measure, engine {}, {} orders x {} block sizes",
        measure.family(),
        engine.tag(),
        orders.len(),
        grid.len()
    );

    let csv_base = (!config.output.csv.is_empty()).then(|| PathBuf::from(&config.output.csv));
    let mut stdout_csv = String::new();
    let mut curves = Vec::new();
    for &order in &orders {
        let t0 = Instant::now();
        let curve = entropy_curve(&measure, order, &grid, &engine)
            .map_err(CliError::core("scaling_analysis", "entropy_curve"))?;
        let runtime = t0.elapsed().as_secs_f64();
        log::info!("n = {order}: {} points in {runtime:.3}s", curve.points.len());
        let fit = match &config.fit {
            Some(spec) => Some(
                fit_log_slope(&curve, spec.window.map(|[a, b]| (a, b)))
                    .map_err(CliError::core("scaling_analysis", "fit_log_slope"))?,
            ),
            None => None,
        };
        let csv = format_csv(&curve, &resolved);
        let csv_path = match &csv_base {
            Some(base) => {
                let path = csv_path_for(base, order, orders.len() > 1);
                write(&path, &csv)?;
                Some(path.display().to_string())
            }
            None => {
                stdout_csv.push_str(&csv);
                None
            }
        };
        curves.push(json!({
            "order": order.to_string(),
            "engine": curve.engine,
            "measure_hash": curve.measure_hash,
            "points": curve.points.len(),
            "runtime_seconds": runtime,
            "csv": csv_path,
            "fit": fit.as_ref().map(fit_json),
        }));
    }
    print!("{stdout_csv}");

    let json_path = if !config.output.json.is_empty() {
        Some(PathBuf::from(&config.output.json))
    } else {
        csv_base.as_ref().map(|b| b.with_extension("json"))
    };
    if let Some(path) = json_path {
        let config_value = serde_json::to_value(&config).expect("config serializes");
        let meta = json!({
            "tool": "symspin",
            "version": env!("CARGO_PKG_VERSION"),
            "library_version": symspin::VERSION,
            "config": config_value,
            "seed": config.engine.seed,
            "threads": rayon::current_num_threads(),
            "curves": curves,
            "total_runtime_seconds": started.elapsed().as_secs_f64(),
        });
        write(
            &path,
            &(serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"),
        )?;
    } else {
        log::info!("no output path configured; JSON metadata not written");
    }
    Ok(())
}
