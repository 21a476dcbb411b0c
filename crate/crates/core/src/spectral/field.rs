//! Modal state vectors and their exact evolution under the diagonal semigroup.

use nalgebra::DVector;

use super::basis::ModalBasis;
use crate::error::{invalid, Result};

/// Coefficients of a state over the H¹-orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    n_max: usize,
    coeffs: DVector<f64>,
}

impl ModalField {
    pub fn zeros(basis: &ModalBasis) -> Self {
        Self {
            n_max: basis.n_max(),
            coeffs: DVector::zeros(basis.len()),
        }
    }

    pub fn from_coeffs(basis: &ModalBasis, coeffs: DVector<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(invalid(format!(
                "coefficient vector has length {}, basis has {} modes",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Self {
            n_max: basis.n_max(),
            coeffs,
        })
    }

    /// Unit coefficient on mode `(n, m)`.
    pub fn unit(basis: &ModalBasis, n: usize, m: usize) -> Result<Self> {
        let k = basis
            .position(n, m)
            .ok_or_else(|| invalid(format!("mode ({n},{m}) not in basis")))?;
        let mut field = Self::zeros(basis);
        field.coeffs[k] = 1.0;
        Ok(field)
    }

    /// The unnormalized product `amplitude·cos(nπξ₁)cos(mπξ₂)`.
    pub fn cosine_product(basis: &ModalBasis, n: usize, m: usize, amplitude: f64) -> Result<Self> {
        let mut field = Self::unit(basis, n, m)?;
        let k = basis.position(n, m).expect("checked by unit");
        field.coeffs[k] = amplitude / basis.norm_factor(k);
        Ok(field)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DVector<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> DVector<f64> {
        self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub(crate) fn check_basis(&self, basis: &ModalBasis) -> Result<()> {
        if self.n_max != basis.n_max() || self.coeffs.len() != basis.len() {
            return Err(invalid(format!(
                "field built on a basis of order {} used with a basis of order {}",
                self.n_max,
                basis.n_max()
            )));
        }
        Ok(())
    }

    /// Pointwise value `Σ c_k φ_k(ξ)`.
    pub fn eval(&self, basis: &ModalBasis, xi: [f64; 2]) -> Result<f64> {
        self.check_basis(basis)?;
        super::basis::check_point(xi)?;
        Ok(basis
            .eval_all(xi)
            .iter()
            .zip(self.coeffs.iter())
            .map(|(p, c)| p * c)
            .sum())
    }
}

/// Exact action of the semigroup generated by `Δ + shift·I` over time `t`.
pub fn propagate(basis: &ModalBasis, field: &ModalField, t: f64, shift: f64) -> Result<ModalField> {
    field.check_basis(basis)?;
    if !(t >= 0.0) {
        return Err(invalid(format!("semigroup time must be nonnegative, got {t}")));
    }
    let coeffs = DVector::from_iterator(
        basis.len(),
        basis
            .eigenvalues()
            .iter()
            .zip(field.coeffs.iter())
            .map(|(lambda, c)| ((lambda + shift) * t).exp() * c),
    );
    Ok(ModalField {
        n_max: field.n_max,
        coeffs,
    })
}

/// `S_A(t)x` for the pure diffusion generator.
pub fn semigroup_apply(basis: &ModalBasis, field: &ModalField, t: f64) -> Result<ModalField> {
    propagate(basis, field, t, 0.0)
}

/// `(e^{μ dt} − 1)/μ`, with its `μ → 0` limit.
pub(crate) fn phi1(mu: f64, dt: f64) -> f64 {
    let z = mu * dt;
    if z.abs() < 1e-8 {
        dt * (1.0 + 0.5 * z)
    } else {
        (z.exp_m1()) / mu
    }
}

/// One exact variation-of-constants step with the input held at `u`.
pub fn mild_solution_step_shifted(
    basis: &ModalBasis,
    field: &ModalField,
    input: &ModalField,
    u: f64,
    dt: f64,
    shift: f64,
) -> Result<ModalField> {
    field.check_basis(basis)?;
    input.check_basis(basis)?;
    if !(dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    let coeffs = DVector::from_iterator(
        basis.len(),
        basis
            .eigenvalues()
            .iter()
            .zip(field.coeffs.iter().zip(input.coeffs.iter()))
            .map(|(lambda, (c, b))| {
                let mu = lambda + shift;
                (mu * dt).exp() * c + u * b * phi1(mu, dt)
            }),
    );
    Ok(ModalField {
        n_max: field.n_max,
        coeffs,
    })
}

pub fn mild_solution_step(
    basis: &ModalBasis,
    field: &ModalField,
    input: &ModalField,
    u: f64,
    dt: f64,
) -> Result<ModalField> {
    mild_solution_step_shifted(basis, field, input, u, dt, 0.0)
}
