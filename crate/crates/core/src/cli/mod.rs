//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 hypotheses not satisfied
//! (the bound makes no claim), 3 bound violated under valid hypotheses.

pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::chebyshev::chebyshev_center;
use crate::curves::DEFAULT_SAMPLES;
use crate::error::{Error, Result};
use crate::geometry::{AmbientVector, SurfacePoint};
use crate::inequality::{
    classical_landau_check, counterexample_curve, counterexample_window, landau_constant, proof_diagnostics_for,
    sharpness_probe, theorem1_report, theorem2_report, ProbeFamily, DEFAULT_SEED,
};
pub use report::{time_series, write_time_series, AuxSummary, Report, TimeSeriesRow, TIME_SERIES_COLUMNS};
pub use spec::{load_spec, parse_spec, AuxChoice, AuxKind, Center, CurveSpec};

use crate::auxfun::AuxFunction;
use crate::curves::{Curve, TimeWindow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_HYPOTHESES: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const THREADS_ENV: &str = "MANIFOLD_LANDAU_THREADS";

const AFTER_HELP: &str = "\
Exit codes: 0 ok, 1 input/I-O error, 2 hypotheses fail, 3 bound violated.

--csv on check, diagnose, classical and counterexample writes one row per
window sample with columns
  t               time
  speed           ‖ẋ(t)‖
  cov_accel_norm  ‖∇_ẋ ẋ(t)‖
  v               ⟨∇U(x(t)), ẋ(t)⟩
  u               U(x(t))
Other commands write `key,value` rows.

MANIFOLD_LANDAU_THREADS sets the number of worker threads.";

#[derive(Debug, Parser)]
#[command(name = "manifold-landau", version, about = "Check Landau-type sup-norm bounds for curves on S² and ℝᵈ")]
#[command(after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Default, Args)]
pub struct Format {
    /// Print the JSON report
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Print CSV (time series where the command has a curve)
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the constant C, the positive root of ζ³ − 3ζ − 1
    Constant {
        /// Decimal places in the text output
        #[arg(long, default_value_t = 12)]
        digits: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Evaluate the bound for the curve in a spec file
    Check {
        spec: PathBuf,
        #[command(flatten)]
        format: Format,
    },
    /// Check the intermediate inequalities along the spec's curve
    Diagnose {
        spec: PathBuf,
        #[command(flatten)]
        format: Format,
    },
    /// Chebyshev centre of points read from a CSV with x,y,z columns
    Chebyshev {
        points: PathBuf,
        #[command(flatten)]
        format: Format,
    },
    /// Great circle with phase t²/2 on [0, T]
    Counterexample {
        #[arg(long = "T", value_name = "T")]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[command(flatten)]
        format: Format,
    },
    /// Search a curve family for large λ·‖ẋ‖²/(r0·r2)
    Probe {
        #[arg(long, value_enum)]
        family: ProbeFamily,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        format: Format,
    },
    /// ‖f′‖² ≤ 2‖f‖‖f″‖ for a scalar spec
    Classical {
        spec: PathBuf,
        #[command(flatten)]
        format: Format,
    },
}

/// Sets the global worker count from [`THREADS_ENV`], if present.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // A pool built earlier in the process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` and runs the command, writing to `out` and `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_ERROR;
    }
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

struct Resolved {
    report: Report,
    u: AuxFunction,
    exit: i32,
}

fn bound_exit(bound: &crate::inequality::BoundReport) -> i32 {
    match (bound.hypotheses_ok, bound.satisfied) {
        (false, _) => EXIT_HYPOTHESES,
        (true, true) => EXIT_OK,
        (true, false) => EXIT_VIOLATION,
    }
}

fn check_spec(spec: &CurveSpec, command: &str) -> Result<Resolved> {
    let mut report = Report::new(command).with_window(&spec.window);
    report.seed = Some(spec.seed);
    report.family = Some(spec.family.clone());
    let (bound, u, chebyshev) = match (spec.aux.explicit()?, spec.aux.kind) {
        (Some(u), _) => (theorem1_report(&spec.curve, &u, &spec.window)?, u, false),
        (None, AuxKind::Chordal) => {
            let t2 = theorem2_report(&spec.curve, &spec.window)?;
            let u = AuxFunction::chordal(t2.center.center());
            report.center = Some(t2.center);
            report.relaxed_rhs = t2.relaxed_rhs;
            report.relaxed_slack_ratio = t2.relaxed_slack_ratio;
            (t2.bound, u, true)
        }
        (None, _) => {
            let points = spec
                .curve
                .sample_points(&spec.window)?
                .into_iter()
                .map(SurfacePoint::new)
                .collect::<Result<Vec<_>>>()?;
            let center = chebyshev_center(&points)?;
            let u = spec.aux.with_center(center.center());
            report.center = Some(center);
            (theorem1_report(&spec.curve, &u, &spec.window)?, u, true)
        }
    };
    report.aux = Some(AuxSummary::new(&u, chebyshev));
    let exit = bound_exit(&bound);
    report.bound = Some(bound);
    Ok(Resolved { report, u, exit })
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.to_string(), parts.join(";")));
        }
        Value::Null => {}
        v => out.push((prefix.to_string(), scalar_text(v))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn key_values(report: &Report) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    flatten("", &serde_json::to_value(report).expect("reports serialize"), &mut pairs);
    pairs
}

fn emit(
    out: &mut dyn Write,
    format: Format,
    report: &Report,
    series: Option<(&Curve, &AuxFunction, &TimeWindow)>,
) -> anyhow::Result<()> {
    if format.json {
        serde_json::to_writer_pretty(&mut *out, report)?;
        writeln!(out)?;
    } else if format.csv {
        match series {
            Some((curve, u, window)) => write_time_series(&mut *out, &time_series(curve, u, window)?)?,
            None => report::write_key_values(&mut *out, &key_values(report))?,
        }
    } else {
        for (k, v) in key_values(report) {
            writeln!(out, "{k} = {v}")?;
        }
    }
    Ok(())
}

fn read_points(path: &Path) -> Result<Vec<SurfacePoint>> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Ingestion { row: 0, reason: e.to_string() })?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Ingestion {
            row: 0,
            reason: format!("missing column `{name}`"),
        })
    };
    let cols = [column("x")?, column("y")?, column("z")?];
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Ingestion { row, reason: e.to_string() })?;
        let mut xyz = [0.0; 3];
        for (slot, &c) in xyz.iter_mut().zip(&cols) {
            let field = record.get(c).unwrap_or("");
            *slot = field
                .parse()
                .map_err(|_| Error::Ingestion { row, reason: format!("`{field}` is not a decimal number") })?;
        }
        let (p, _) = SurfacePoint::new_flagged(AmbientVector::from_column_slice(&xyz))
            .map_err(|e| Error::Ingestion { row, reason: e.to_string() })?;
        points.push(p);
    }
    Ok(points)
}

fn execute(command: &Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Constant { digits, format } => {
            let k = landau_constant();
            let mut report = Report::new("constant");
            report.constant = Some(k);
            if format.json || format.csv {
                emit(out, *format, &report, None)?;
            } else {
                writeln!(out, "C = {:.*}", digits, k.c)?;
                writeln!(out, "residual = {:e}", k.residual)?;
            }
            Ok(EXIT_OK)
        }
        Command::Check { spec, format } => {
            let spec = load_spec(spec)?;
            let r = check_spec(&spec, "check")?;
            emit(out, *format, &r.report, Some((&spec.curve, &r.u, &spec.window)))?;
            Ok(r.exit)
        }
        Command::Diagnose { spec, format } => {
            let spec = load_spec(spec)?;
            let mut r = check_spec(&spec, "diagnose")?;
            let bound = r.report.bound.as_ref().expect("check fills the bound");
            let mut exit = r.exit;
            if bound.hypotheses_ok {
                let d = proof_diagnostics_for(bound, &spec.curve, &r.u)?;
                if !d.all_ok() {
                    exit = EXIT_VIOLATION;
                }
                r.report.diagnostics = Some(d);
            } else {
                r.report.notes.push("diagnostics skipped: hypotheses fail".into());
            }
            emit(out, *format, &r.report, Some((&spec.curve, &r.u, &spec.window)))?;
            Ok(exit)
        }
        Command::Chebyshev { points, format } => {
            let points = read_points(points)?;
            let mut report = Report::new("chebyshev");
            report.samples = Some(points.len());
            let center = chebyshev_center(&points)?;
            if let Some(w) = &center.warning {
                report.notes.push(w.clone());
            }
            report.center = Some(center);
            emit(out, *format, &report, None)?;
            Ok(EXIT_OK)
        }
        Command::Counterexample { t_end, samples, format } => {
            let curve = counterexample_curve();
            let window = counterexample_window(*t_end, *samples)?;
            let t2 = theorem2_report(&curve, &window)?;
            let u = AuxFunction::chordal(t2.center.center());
            let mut report = Report::new("counterexample").with_window(&window);
            report.family = Some("great_circle".into());
            report.aux = Some(AuxSummary::new(&u, true));
            report.relaxed_rhs = t2.relaxed_rhs;
            report.relaxed_slack_ratio = t2.relaxed_slack_ratio;
            report.center = Some(t2.center);
            report.notes.push(format!(
                "phase t²/2: sup speed {} grows with T while sup covariant acceleration stays {}",
                t2.bound.speed.value, t2.bound.r2.value
            ));
            let exit = bound_exit(&t2.bound);
            report.bound = Some(t2.bound);
            emit(out, *format, &report, Some((&curve, &u, &window)))?;
            Ok(exit)
        }
        Command::Probe { family, budget, seed, format } => {
            let probe = sharpness_probe(*family, *budget, *seed)?;
            let mut report = Report::new("probe");
            report.seed = Some(*seed);
            let exit = if probe.within_bound { EXIT_OK } else { EXIT_VIOLATION };
            report.probe = Some(probe);
            emit(out, *format, &report, None)?;
            Ok(exit)
        }
        Command::Classical { spec, format } => {
            let spec = load_spec(spec)?;
            let classical = classical_landau_check(&spec.curve, &spec.window)?;
            let u = spec.aux.explicit()?.ok_or_else(|| Error::InvalidInput("classical needs a scalar spec".into()))?;
            let mut report = Report::new("classical").with_window(&spec.window);
            report.seed = Some(spec.seed);
            report.family = Some(spec.family.clone());
            report.aux = Some(AuxSummary::new(&u, false));
            let exit = if classical.satisfied { EXIT_OK } else { EXIT_VIOLATION };
            report.classical = Some(classical);
            emit(out, *format, &report, Some((&spec.curve, &u, &spec.window)))?;
            Ok(exit)
        }
    }
}
