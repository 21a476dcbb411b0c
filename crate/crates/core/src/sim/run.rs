//! Scenario execution and location sweeps.

use std::time::{Duration, Instant};

use nalgebra::Complex;
use rayon::prelude::*;

use super::scenario::{GainSpec, Scenario, X0_STREAM, Z0_STREAM};
use crate::analysis::{
    compare_internal_boundary, detectability_test, group_eigenvalues, rank_condition, strategic_test_gradient,
    DetectabilityReport, RankReport, RegionComparison, StrategicVerdict, Target,
};
use crate::error::{invalid, Error, Result};
use crate::observer::{
    design_gain_collocated, design_gain_pole_placement_seeded, simulate_observer, ErrorTrajectory, GainDesign,
};
use crate::sensing::SensorSpec;
use crate::spectral::{build_omega_r, ModalBasis};

/// Environment variable capping the sweep thread pool.
pub const THREADS_ENV: &str = "REGOBS_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct GainSummary {
    pub design: GainDesign,
    pub abscissa: f64,
    pub spectrum: Vec<Complex<f64>>,
}

/// Why the observer stage did not produce a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulationOutcome {
    Completed(ErrorTrajectory),
    Disabled,
    /// Gain design failed; the error is kept for reporting.
    GainFailed(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub scenario_hash: u64,
    pub rank_report: RankReport,
    pub detectability: DetectabilityReport,
    pub omega: StrategicVerdict,
    pub gamma: StrategicVerdict,
    pub omega_r: Option<RegionComparison>,
    pub gain: Option<GainSummary>,
    pub simulation: SimulationOutcome,
    pub wall_time: Duration,
}

impl SimulationResult {
    pub fn trajectory(&self) -> Option<&ErrorTrajectory> {
        match &self.simulation {
            SimulationOutcome::Completed(t) => Some(t),
            _ => None,
        }
    }

    /// Verdicts in reporting order.
    pub fn verdicts(&self) -> Vec<&StrategicVerdict> {
        let mut out = vec![&self.omega, &self.gamma];
        if let Some(cmp) = &self.omega_r {
            out.push(&cmp.omega);
        }
        out
    }
}

/// Analysis stage only; shared by the CLI and the sweep.
pub struct Analysis {
    pub rank_report: RankReport,
    pub detectability: DetectabilityReport,
    pub omega: StrategicVerdict,
    pub gamma: StrategicVerdict,
    pub omega_r: Option<RegionComparison>,
}

pub fn analyze_scenario(s: &Scenario) -> Result<Analysis> {
    s.validate()?;
    let basis = s.basis()?;
    analyze_with(&basis, s)
}

fn analyze_with(basis: &ModalBasis, s: &Scenario) -> Result<Analysis> {
    let grid = s.time_grid.points();
    let groups = group_eigenvalues(basis);
    let omega_r = match s.omega_r {
        Some(r) => Some(compare_internal_boundary(basis, &s.sensors, &s.region, r, &grid)?),
        None => None,
    };
    Ok(Analysis {
        rank_report: rank_condition(basis, &s.sensors, &groups)?,
        detectability: detectability_test(basis, &s.sensors, s.shift)?,
        omega: strategic_test_gradient(basis, &s.sensors, &Target::OmegaGradient, &grid)?,
        gamma: strategic_test_gradient(basis, &s.sensors, &Target::BoundaryGradient(s.region), &grid)?,
        omega_r,
    })
}

/// Analysis, gain design and observer simulation for one scenario.
///
/// A failed gain design is reported in the result rather than as an error;
/// a step that violates the integrator guard is an error.
pub fn run_scenario(s: &Scenario) -> Result<SimulationResult> {
    let start = Instant::now();
    s.validate()?;
    let basis = s.basis()?;
    let analysis = analyze_with(&basis, s)?;

    let designed = match s.gain {
        GainSpec::PolePlacement { alpha_target } => {
            design_gain_pole_placement_seeded(&basis, &s.sensors, s.shift, alpha_target, s.seed)
        }
        GainSpec::Collocated { rho } => design_gain_collocated(&basis, &s.sensors, s.shift, rho),
    };
    let (gain, simulation) = match designed {
        Err(e @ (Error::DesignInfeasible { .. } | Error::NumericalFailure(_))) => (None, SimulationOutcome::GainFailed(e)),
        Err(e) => return Err(e),
        Ok(gain) => {
            let summary = GainSummary {
                design: gain.design,
                abscissa: gain.abscissa,
                spectrum: gain.spectrum.clone(),
            };
            let outcome = if s.simulate {
                let x0 = s.x0.resolve(&basis, s.seed, X0_STREAM)?;
                let z0 = s.z0.resolve(&basis, s.seed, Z0_STREAM)?;
                let run = simulate_observer(
                    &basis,
                    &s.sensors,
                    s.actuator.as_ref(),
                    &gain,
                    &s.region,
                    &x0,
                    &z0,
                    &s.control.schedule()?,
                    s.horizon,
                    s.dt,
                )?;
                SimulationOutcome::Completed(run.error)
            } else {
                SimulationOutcome::Disabled
            };
            (Some(summary), outcome)
        }
    };

    Ok(SimulationResult {
        scenario_hash: s.digest(),
        rank_report: analysis.rank_report,
        detectability: analysis.detectability,
        omega: analysis.omega,
        gamma: analysis.gamma,
        omega_r: analysis.omega_r,
        gain,
        simulation,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub location: [f64; 2],
    pub margin: f64,
    pub strategic: bool,
}

/// Cell centres `((i + ½)/nx, (j + ½)/ny)`, first coordinate outermost.
pub fn cell_centres(nx: usize, ny: usize) -> Result<Vec<[f64; 2]>> {
    if nx == 0 || ny == 0 {
        return Err(invalid(format!("sweep grid must be at least 1×1, got {nx}×{ny}")));
    }
    Ok((0..nx)
        .flat_map(|i| (0..ny).map(move |j| [(i as f64 + 0.5) / nx as f64, (j as f64 + 0.5) / ny as f64]))
        .collect())
}

/// Moves the first sensor over `grid` (as a point sensor) and reports the
/// boundary-gradient verdict for each location, in grid order.
pub fn run_sweep(template: &Scenario, grid: &[[f64; 2]]) -> Result<Vec<SweepRow>> {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    run_sweep_with_threads(template, grid, threads)
}

pub fn run_sweep_with_threads(template: &Scenario, grid: &[[f64; 2]], threads: Option<usize>) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(invalid("sweep grid is empty"));
    }
    if let Some(p) = grid.iter().find(|p| !crate::sensing::strictly_interior(**p)) {
        return Err(invalid(format!("sweep location ({}, {}) is not inside the square", p[0], p[1])));
    }
    template.validate()?;
    let basis = template.basis()?;
    let time_grid = template.time_grid.points();
    let target = Target::BoundaryGradient(template.region);
    if let Some(r) = template.omega_r {
        build_omega_r(&template.region, r)?;
    }
    let cell = |p: &[f64; 2]| -> Result<SweepRow> {
        let sensors = swept_sensors(template, *p);
        let v = strategic_test_gradient(&basis, &sensors, &target, &time_grid)?;
        Ok(SweepRow {
            location: *p,
            margin: v.margin,
            strategic: v.strategic,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?;
    pool.install(|| grid.par_iter().map(cell).collect())
}

/// Sensors of `template` with the first one replaced by a point sensor at `location`.
pub fn swept_sensors(template: &Scenario, location: [f64; 2]) -> Vec<SensorSpec> {
    let mut sensors = template.sensors.clone();
    let id = sensors[0].id().to_string();
    sensors[0] = SensorSpec::pointwise(id, location);
    sensors
}
