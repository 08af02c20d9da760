//! `handoff` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid scenario, 3 runtime failure.
//! Data goes to stdout, diagnostics to stderr.

pub mod grid;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use handoff_core::context::feature_report;
use handoff_core::metrics::{compute_metrics, MetricsReport, COUNT_COLUMNS, METRIC_COLUMNS};
use handoff_core::simulator::{run_prepared, Scenario, ScenarioError};
use handoff_core::taxonomy::taxonomy_csv;
use handoff_core::Trace;
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{Grid, GridError, Param};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "handoff", version, about = "Cognitive handoff decision engine and overlay mobility simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricsFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file.
    Validate { file: PathBuf },
    /// Print the fifteen feasible handoff types as CSV.
    EnumerateTaxonomy,
    /// Simulate a scenario and write its trace and metrics.
    Run {
        file: PathBuf,
        /// Replace the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Skip writing trace.jsonl.
        #[arg(long)]
        no_trace: bool,
        #[arg(long, value_enum, default_value_t = MetricsFormat::Csv)]
        metrics: MetricsFormat,
    },
    /// Run a scenario over a parameter grid and print one CSV row per point.
    Sweep {
        file: PathBuf,
        /// e.g. `delta=0,0.5;sp=0,200;strategy=proactive,reactive`
        #[arg(long)]
        grid: String,
        /// Also write each point's trace as point-<n>.jsonl here.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Usage(format!("--grid: {e}"))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// 1-based line of the first occurrence of the innermost named key of a
/// dotted field path such as `synthesis.base.n2.NBW` or `terminals[0].path`.
pub fn field_line(text: &str, field: &str) -> usize {
    let segments: Vec<&str> = field
        .split('.')
        .map(|s| s.split('[').next().unwrap_or(s))
        .filter(|s| !s.is_empty())
        .collect();
    for seg in segments.iter().rev() {
        let needle = format!("\"{seg}\"");
        if let Some(i) = text.lines().position(|l| l.contains(&needle)) {
            return i + 1;
        }
    }
    1
}

/// Line-anchored message for a scenario error.
pub fn diagnostic(path: &Path, text: &str, e: &ScenarioError) -> String {
    let p = path.display();
    match e {
        ScenarioError::Parse { line, column, message } => format!("{p}:{line}:{column}: parse error: {message}"),
        ScenarioError::Invalid { field, rule } => {
            format!("{p}:{}: invariant violation: {field}: {rule}", field_line(text, field))
        }
        ScenarioError::Runtime(m) => format!("{p}: runtime error: {m}"),
    }
}

fn load(path: &Path) -> Result<(String, Scenario), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let sc = Scenario::from_json(&text).map_err(|e| CliError::Invalid(diagnostic(path, &text, &e)))?;
    Ok((text, sc))
}

fn load_prepared(path: &Path) -> Result<handoff_core::simulator::Prepared, CliError> {
    let (text, sc) = load(path)?;
    sc.prepare().map_err(|e| CliError::Invalid(diagnostic(path, &text, &e)))
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Trace plus metrics of one prepared scenario.
pub fn simulate(prepared: &handoff_core::simulator::Prepared) -> Result<(Trace, MetricsReport), CliError> {
    let trace = run_prepared(prepared).map_err(runtime)?;
    let report = compute_metrics(&trace, prepared.scenario.duration_ms).map_err(runtime)?;
    Ok((trace, report))
}

fn cmd_run(
    file: &Path,
    seed: Option<u64>,
    out: &Path,
    no_trace: bool,
    format: MetricsFormat,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut prepared = load_prepared(file)?;
    if let Some(s) = seed {
        prepared.scenario.seed = s;
    }
    let (trace, report) = simulate(&prepared)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    if !no_trace {
        let p = out.join("trace.jsonl");
        let f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
        let mut w = std::io::BufWriter::new(f);
        trace.write_jsonl(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(&p, e))?;
    }
    let (name, body) = match format {
        MetricsFormat::Csv => ("metrics.csv", report.to_csv()),
        MetricsFormat::Json => ("metrics.json", report.to_json()),
    };
    let p = out.join(name);
    fs::write(&p, body).map_err(|e| io_err(&p, e))?;
    let features = feature_report(&report.aggregate, &prepared.goals).map_err(runtime)?;
    let summary = serde_json::json!({ "aggregate": report.aggregate, "features": features });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&summary).expect("summary serializes")).map_err(runtime)
}

/// CSV header of a sweep over `keys`.
pub fn sweep_header(keys: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = keys.iter().map(|k| k.to_string()).collect();
    h.extend(["status", "error"].map(String::from));
    h.extend(METRIC_COLUMNS.iter().chain(COUNT_COLUMNS.iter()).map(|c| c.to_string()));
    h
}

fn cmd_sweep(file: &Path, grid: &str, trace_dir: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let grid = Grid::parse(grid)?;
    let (text, base) = load(file)?;
    base.prepare().map_err(|e| CliError::Invalid(diagnostic(file, &text, &e)))?;
    if let Some(d) = trace_dir {
        fs::create_dir_all(d).map_err(|e| io_err(d, e))?;
    }
    let points = grid.points();
    let rows: Vec<Result<Vec<String>, String>> = points
        .par_iter()
        .enumerate()
        .map(|(i, point)| {
            let mut sc = base.clone();
            point.iter().for_each(|p| p.apply(&mut sc.controller));
            let prepared = sc.prepare().map_err(|e| e.to_string())?;
            let (trace, report) = simulate(&prepared).map_err(|e| e.to_string())?;
            if let Some(d) = trace_dir {
                let p = d.join(format!("point-{i}.jsonl"));
                fs::write(&p, trace.to_jsonl()).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(report.aggregate.csv_cells())
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    let width = METRIC_COLUMNS.len() + COUNT_COLUMNS.len();
    w.write_record(sweep_header(&grid.keys())).map_err(runtime)?;
    let mut failed = 0;
    for (point, row) in points.iter().zip(rows) {
        let mut rec: Vec<String> = point.iter().map(Param::value).collect();
        match row {
            Ok(cells) => {
                rec.extend(["ok".to_owned(), String::new()]);
                rec.extend(cells);
            }
            Err(msg) => {
                failed += 1;
                rec.extend(["failed".to_owned(), msg]);
                rec.extend(std::iter::repeat_n(String::new(), width));
            }
        }
        w.write_record(&rec).map_err(runtime)?;
    }
    stdout
        .write_all(&w.into_inner().map_err(runtime)?)
        .map_err(runtime)?;
    if failed > 0 {
        writeln!(stderr, "warning: {failed} of {} grid points failed", points.len()).map_err(runtime)?;
    }
    Ok(())
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { file } => {
            load_prepared(&file)?;
            writeln!(stdout, "valid").map_err(runtime)
        }
        Command::EnumerateTaxonomy => stdout.write_all(taxonomy_csv().as_bytes()).map_err(runtime),
        Command::Run {
            file,
            seed,
            out,
            no_trace,
            metrics,
        } => cmd_run(&file, seed, &out, no_trace, metrics, stdout),
        Command::Sweep { file, grid, trace_dir } => cmd_sweep(&file, &grid, trace_dir.as_deref(), stdout, stderr),
    }
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_line_finds_innermost_key() {
        let text = "{\n  \"controller\": {\n    \"th_sup\": 1,\n    \"th_inf\": 2\n  }\n}";
        assert_eq!(field_line(text, "controller.th_inf"), 4);
        assert_eq!(field_line(text, "controller.nothing"), 2);
        assert_eq!(field_line(text, "terminals[0].path"), 1);
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_cli(["handoff", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run_cli(["handoff", "--help"], &mut out, &mut err), EXIT_OK);
    }
}
