//! Analytic eigenbasis of the Neumann Laplacian on the unit square, modal
//! fields, exact semigroup evolution, gradients and boundary traces.

mod basis;
mod field;
mod geometry;
pub mod quadrature;
mod trace;
pub mod trig;

pub use basis::{ModalBasis, ModeIndex};
pub use field::{
    mild_solution_step, mild_solution_step_shifted, propagate, semigroup_apply, ModalField,
};
pub(crate) use field::phi1;
pub use geometry::{build_omega_r, BoundaryRegion, Edge, InternalRegion, Rect};
pub use trace::{
    gradient_field_eval, gradient_gram, gradient_trace, trace_l2_factor, trace_matrices,
    trace_norm_l2, GradientTrace,
};

/// Gradient Gram matrix of the basis on the strip ω_r.
pub fn restrict_internal(
    basis: &ModalBasis,
    omega: &InternalRegion,
) -> crate::Result<nalgebra::DMatrix<f64>> {
    gradient_gram(basis, &omega.rect)
}
