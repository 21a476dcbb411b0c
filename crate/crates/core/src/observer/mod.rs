//! Output-injection observers on the truncated modal model.

mod gain;
mod simulate;

pub use gain::{
    closed_loop_matrix, design_gain_collocated, design_gain_pole_placement, design_gain_pole_placement_seeded,
    gain_from_matrix, zero_gain, GainDesign, ObserverGain, DEFAULT_DESIGN_SEED,
};
pub use simulate::{
    error_dynamics_direct, estimate_output, simulate_observer, ControlSchedule, ErrorRun, ErrorTrajectory,
    ObserverRun,
};
