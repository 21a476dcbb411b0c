//! Command-line front end: `analyze`, `simulate`, `reconstruct`, `sweep`
//! and `compare-regions`.

mod config;
mod report;

use std::ffi::OsString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

pub use config::{canonical_config, load_config, parse_config, CONFIG_VERSION};
pub use report::{fmt_f64, sha256_hex, Csv, FileDigest, OutputDir, RunManifest};

use crate::analysis::{reconstruct_initial_gradient, RankReport, StrategicVerdict};
use crate::error::Error;
use crate::sensing::OutputRecord;
use crate::sim::{analyze_scenario, cell_centres, run_scenario, run_sweep, Scenario, SimulationOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_INCONSISTENT: i32 = 5;
pub const EXIT_IMPLICATION: i32 = 6;

/// Points at which the reconstructed trace is written.
pub const TRACE_POINTS: usize = 256;

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }

    fn context(self, what: &str) -> Self {
        Self {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::Validation(_) | Error::StepTooLarge { .. } => EXIT_USAGE,
            Error::DesignInfeasible { .. } => EXIT_INFEASIBLE,
            Error::InconsistentData { .. } => EXIT_INCONSISTENT,
            Error::NumericalFailure(_) => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "regobs", version, about = "Regional boundary gradient observers for diffusion on the unit square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank, detectability and strategic-sensor reports.
    Analyze(Common),
    /// Observer simulation; writes the error trajectory.
    Simulate(Common),
    /// Boundary gradient of the initial state from an output record.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// CSV with a `t` column followed by one column per sensor.
        #[arg(long)]
        record: PathBuf,
    },
    /// Boundary-gradient verdict as the first sensor moves over a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 9)]
        nx: usize,
        #[arg(long, default_value_t = 9)]
        ny: usize,
    },
    /// Strip-versus-boundary strategic comparison.
    CompareRegions(Common),
}

#[derive(Debug, clap::Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match catch_unwind(AssertUnwindSafe(|| execute(&cli))) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("error: {}", e.message);
            e.code
        }
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_INTERNAL
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze(c) => cmd_analyze(&c.config, &c.out),
        Command::Simulate(c) => cmd_simulate(&c.config, &c.out),
        Command::Reconstruct { common, record } => cmd_reconstruct(&common.config, record, &common.out),
        Command::Sweep { common, nx, ny } => cmd_sweep(&common.config, *nx, *ny, &common.out),
        Command::CompareRegions(c) => cmd_compare_regions(&c.config, &c.out),
    }
}

fn bool_str(b: bool) -> String {
    b.to_string()
}

fn rank_csv(report: &RankReport) -> String {
    let mut csv = Csv::new(&["eigenvalue", "multiplicity", "rank", "sigma_min"]);
    for g in &report.groups {
        csv.row(&[
            fmt_f64(g.group.eigenvalue),
            g.group.multiplicity().to_string(),
            g.rank.to_string(),
            fmt_f64(g.sigma_min),
        ]);
    }
    csv.into_string()
}

fn verdict_csv(verdicts: &[&StrategicVerdict]) -> String {
    let mut csv = Csv::new(&["target", "verdict", "margin"]);
    for v in verdicts {
        csv.row(&[v.target.to_string(), bool_str(v.strategic), fmt_f64(v.margin)]);
    }
    csv.into_string()
}

fn failing_csv(verdicts: &[&StrategicVerdict]) -> String {
    let mut csv = Csv::new(&["target", "n", "m"]);
    for v in verdicts {
        for mode in &v.failing_modes {
            csv.row(&[v.target.to_string(), mode.n.to_string(), mode.m.to_string()]);
        }
    }
    csv.into_string()
}

pub fn cmd_analyze(config: &Path, out: &Path) -> Result<(), CliError> {
    let scenario = load_config(config)?;
    let analysis = analyze_scenario(&scenario)?;
    let mut verdicts = vec![&analysis.omega, &analysis.gamma];
    if let Some(cmp) = &analysis.omega_r {
        verdicts.push(&cmp.omega);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write("rank_report.csv", &rank_csv(&analysis.rank_report))?;
    dir.write("verdicts.csv", &verdict_csv(&verdicts))?;
    dir.write("failing_modes.csv", &failing_csv(&verdicts))?;
    dir.note("detectable", bool_str(analysis.detectability.detectable));
    dir.note("shift", fmt_f64(scenario.shift));
    for v in verdicts.iter().filter(|v| v.fragile()) {
        dir.note(&format!("fragile_{}", v.target), fmt_f64(v.margin));
    }
    dir.finish("analyze", scenario.digest())?;
    Ok(())
}

pub fn cmd_simulate(config: &Path, out: &Path) -> Result<(), CliError> {
    let scenario = load_config(config)?;
    let mut scenario = scenario;
    scenario.simulate = true;
    let result = run_scenario(&scenario)?;
    let trajectory = match &result.simulation {
        SimulationOutcome::Completed(t) => t,
        SimulationOutcome::GainFailed(e) => {
            let failing: Vec<String> = result
                .detectability
                .failing_groups()
                .map(|g| format!("eigenvalue {:.6} (multiplicity {}, rank {})", g.group.eigenvalue, g.group.multiplicity(), g.rank))
                .collect();
            let summary = if failing.is_empty() {
                "detectability rank test passed".to_string()
            } else {
                format!("unobservable non-decaying groups: {}", failing.join("; "))
            };
            return Err(CliError {
                code: EXIT_INFEASIBLE,
                message: format!("{e}; {summary}"),
            });
        }
        SimulationOutcome::Disabled => unreachable!("simulation forced on"),
    };
    let mut csv = Csv::new(&["t", "err_omega", "err_gamma_grad"]);
    for i in 0..trajectory.len() {
        csv.row(&[
            fmt_f64(trajectory.times[i]),
            fmt_f64(trajectory.omega_norm[i]),
            fmt_f64(trajectory.gamma_grad_norm[i]),
        ]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write("trajectory.csv", &csv.into_string())?;
    if let Some(gain) = &result.gain {
        dir.note("closed_loop_abscissa", fmt_f64(gain.abscissa));
    }
    dir.note("gamma_strategic", bool_str(result.gamma.strategic));
    dir.finish("simulate", result.scenario_hash)?;
    Ok(())
}

/// Reads a record CSV: header `t,<sensor…>`, one row per sample.
pub fn read_record(path: &Path, sensors: usize) -> Result<OutputRecord, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read record {}: {e}", path.display())))?;
    let bad = |msg: String| CliError {
        code: EXIT_INCONSISTENT,
        message: format!("record {}: {msg}", path.display()),
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let width = header.split(',').count();
    if width != sensors + 1 {
        return Err(bad(format!("{} columns, expected t plus {sensors} sensors", width)));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(bad(format!("row {} has {} columns, expected {width}", i + 1, fields.len())));
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.trim().parse::<f64>()).collect();
        let parsed = parsed.map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        times.push(parsed[0]);
        values.extend_from_slice(&parsed[1..]);
    }
    if times.is_empty() {
        return Err(bad("no samples".into()));
    }
    let samples = DMatrix::from_row_slice(times.len(), sensors, &values);
    OutputRecord::new(times, samples).map_err(|e| bad(e.to_string()))
}

pub fn cmd_reconstruct(config: &Path, record: &Path, out: &Path) -> Result<(), CliError> {
    let scenario = load_config(config)?;
    let basis = scenario.basis()?;
    let record = read_record(record, scenario.sensors.len())?;
    let rec = reconstruct_initial_gradient(&basis, &scenario.sensors, &scenario.region, &record)?;
    let [a, b] = scenario.region.interval;
    let mut csv = Csv::new(&["s", "tangential", "normal"]);
    for i in 0..TRACE_POINTS {
        let s = a + (b - a) * i as f64 / (TRACE_POINTS - 1) as f64;
        let (tangential, normal) = rec.trace.eval(s);
        csv.row(&[fmt_f64(s), fmt_f64(tangential), fmt_f64(normal)]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write("trace.csv", &csv.into_string())?;
    dir.note("residual", fmt_f64(rec.residual));
    dir.note("gamma_strategic", bool_str(rec.strategic));
    if let Some(w) = &rec.warning {
        eprintln!("warning: {w}");
        dir.note("warning", w.clone());
    }
    dir.finish("reconstruct", scenario.digest())?;
    Ok(())
}

pub fn cmd_sweep(config: &Path, nx: usize, ny: usize, out: &Path) -> Result<(), CliError> {
    let scenario = load_config(config)?;
    let grid = cell_centres(nx, ny)?;
    let rows = run_sweep(&scenario, &grid)?;
    let mut csv = Csv::new(&["b1", "b2", "margin", "strategic"]);
    for r in &rows {
        csv.row(&[fmt_f64(r.location[0]), fmt_f64(r.location[1]), fmt_f64(r.margin), bool_str(r.strategic)]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write("sweep.csv", &csv.into_string())?;
    dir.note("grid", format!("{nx}x{ny} cell centres ((i+1/2)/nx, (j+1/2)/ny), inside [1/(2nx), 1-1/(2nx)]"));
    dir.note("swept_sensor", scenario.sensors[0].id().to_string());
    dir.finish("sweep", scenario.digest())?;
    Ok(())
}

pub fn cmd_compare_regions(config: &Path, out: &Path) -> Result<(), CliError> {
    let scenario: Scenario = load_config(config)?;
    if scenario.omega_r.is_none() {
        return Err(CliError::usage("/omega_r: compare-regions needs the strip depth omega_r"));
    }
    let analysis = analyze_scenario(&scenario)?;
    let cmp = analysis.omega_r.expect("strip depth present");
    let mut dir = OutputDir::create(out)?;
    dir.write("regions.csv", &verdict_csv(&[&cmp.omega, &cmp.gamma]))?;
    dir.note("implication_holds", bool_str(cmp.implication_holds()));
    dir.finish("compare-regions", scenario.digest())?;
    if !cmp.implication_holds() {
        return Err(CliError {
            code: EXIT_IMPLICATION,
            message: "strip-strategic configuration is not boundary-strategic".into(),
        });
    }
    Ok(())
}
