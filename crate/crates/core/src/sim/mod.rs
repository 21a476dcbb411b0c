//! Reproducible scenario runs built from the analysis and observer layers.

mod run;
mod scenario;

pub use run::{
    analyze_scenario, cell_centres, run_scenario, run_sweep, run_sweep_with_threads, swept_sensors, Analysis,
    GainSummary, SimulationOutcome, SimulationResult, SweepRow, THREADS_ENV,
};
pub use scenario::{
    ControlDescriptor, FieldDescriptor, GainSpec, ModeTerm, Scenario, TimeGrid, MAX_ORDER,
};

#[cfg(test)]
mod tests;
