//! Minimum-norm reconstruction of the initial boundary gradient from a
//! free-response output record.

use crate::error::{Error, Result};
use crate::linalg::min_norm_solve;
use crate::sensing::{observation_matrix, OutputRecord, SensorSpec};
use crate::spectral::{gradient_trace, BoundaryRegion, GradientTrace, ModalBasis, ModalField};

use super::strategic::{strategic_test_gradient, Target};

/// Records whose least-squares residual exceeds this fraction of `‖y‖` are rejected.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub initial_state: ModalField,
    pub trace: GradientTrace,
    pub residual: f64,
    pub strategic: bool,
    /// Set when the configuration is not strategic for the region: the trace is
    /// then only the minimum-norm representative.
    pub warning: Option<String>,
}

pub fn reconstruct_initial_gradient(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    region: &BoundaryRegion,
    record: &OutputRecord,
) -> Result<Reconstruction> {
    if record.sensor_count() != sensors.len() {
        return Err(crate::error::invalid(format!(
            "record has {} columns for {} sensors",
            record.sensor_count(),
            sensors.len()
        )));
    }
    let o = observation_matrix(basis, sensors, record.times())?;
    let y = record.stacked();
    let coeffs = min_norm_solve(&o, &y);
    let residual = (&o * &coeffs - &y).norm();
    let tolerance = RESIDUAL_TOL * y.norm();
    if residual > tolerance {
        return Err(Error::InconsistentData { residual, tolerance });
    }
    let initial_state = ModalField::from_coeffs(basis, coeffs)?;
    let trace = gradient_trace(basis, &initial_state, region)?;
    let (strategic, warning) =
        match strategic_test_gradient(basis, sensors, &Target::BoundaryGradient(*region), record.times()) {
            Ok(v) if v.strategic => (true, None),
            Ok(v) => (
                false,
                Some(format!(
                    "configuration is not gradient-strategic on the region ({} unobservable modes)",
                    v.failing_modes.len()
                )),
            ),
            Err(e) => (false, Some(format!("strategic test unavailable: {e}"))),
        };
    Ok(Reconstruction {
        initial_state,
        trace,
        residual,
        strategic,
        warning,
    })
}
