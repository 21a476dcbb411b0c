//! Gradient-strategic tests: is the gradient target recoverable from the
//! sampled outputs, i.e. is `Null(O) ⊆ Null(T)`?
//!
//! The sampled observation matrix factors exactly as
//! `O = E · blockdiag(G_i)`, where `E` stacks `e^{λ_i t_j}` per distinct
//! eigenvalue. `E` has full column rank whenever the grid holds at least as many
//! distinct times as there are eigenvalue groups, so `Null(O)` is the direct
//! sum of the group null spaces `Null(G_i)`. The production test uses that
//! factorization; [`strategic_test_sampled`] runs the same inclusion test on an
//! SVD of `O` itself and is only trustworthy while `E` stays well conditioned
//! (small truncations).

use nalgebra::{DMatrix, DVector};

use super::groups::group_eigenvalues;
use super::rank::FRAGILE_MARGIN;
use crate::error::{invalid, Result};
use crate::linalg::{right_split, spectral_norm};
use crate::sensing::{check_grid, observation_matrix, output_matrix, SensorSpec};
use crate::spectral::{
    build_omega_r, gradient_gram, trace_l2_factor, BoundaryRegion, InternalRegion, ModalBasis, ModeIndex, Rect,
};

/// Relative tolerance for `‖T V‖ ≤ tol·‖T‖`.
pub const INCLUSION_TOL: f64 = 1e-8;

/// Gradient quantity that must be recoverable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// `∇x` on the whole square.
    OmegaGradient,
    /// `χ_Γ* γ ∇x` on a boundary region.
    BoundaryGradient(BoundaryRegion),
    /// `χ_ω ∇x` on an internal strip.
    InternalGradient(InternalRegion),
}

impl Target {
    pub fn label(&self) -> &'static str {
        match self {
            Target::OmegaGradient => "omega_gradient",
            Target::BoundaryGradient(_) => "gamma_gradient",
            Target::InternalGradient(_) => "omega_r_gradient",
        }
    }
}

/// Matrix `T` whose Euclidean norm on coefficient vectors is the L² norm of the target.
pub fn target_factor(basis: &ModalBasis, target: &Target) -> Result<DMatrix<f64>> {
    match target {
        Target::OmegaGradient => Ok(gram_factor(&gradient_gram(basis, &Rect::unit())?)),
        Target::InternalGradient(omega) => Ok(gram_factor(&gradient_gram(basis, &omega.rect)?)),
        Target::BoundaryGradient(region) => {
            region.validate()?;
            Ok(trace_l2_factor(basis, region))
        }
    }
}

/// `T = diag(√μ) Qᵀ` from `M = Q diag(μ) Qᵀ`, with round-off eigenvalues dropped.
fn gram_factor(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let mut t = eig.eigenvectors.transpose();
    for (i, mu) in eig.eigenvalues.iter().enumerate() {
        let scale = if *mu > 1e-14 * max { mu.sqrt() } else { 0.0 };
        t.row_mut(i).scale_mut(scale);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategicVerdict {
    pub target: &'static str,
    pub strategic: bool,
    /// `inf_a ‖O a‖ / ‖T a‖`; zero when not strategic.
    pub margin: f64,
    /// Modes whose unobservable component carries target energy.
    pub failing_modes: Vec<ModeIndex>,
}

impl StrategicVerdict {
    pub fn fragile(&self) -> bool {
        self.strategic && self.margin < FRAGILE_MARGIN
    }

    /// Observability constant `k` in `‖T a‖ ≤ k ‖O a‖`.
    pub fn observability_constant(&self) -> f64 {
        if self.strategic {
            self.margin.recip()
        } else {
            f64::INFINITY
        }
    }
}

/// Null space of the outputs and the pseudo-inverse factor on its complement.
#[derive(Debug, Clone)]
pub(crate) struct OutputStructure {
    /// Orthonormal basis of the unobservable subspace (`modes × d`).
    pub null: DMatrix<f64>,
    /// `V_r Σ_r^{-1}` so that `a = pinv · (U_rᵀ y)` on the observable part.
    pub pinv: DMatrix<f64>,
}

/// Per-eigen-group structure of `O = E · blockdiag(G_i)`.
pub(crate) fn grouped_structure(basis: &ModalBasis, c: &DMatrix<f64>) -> OutputStructure {
    let dim = basis.len();
    let mut null_cols: Vec<DVector<f64>> = Vec::new();
    let mut pinv_cols: Vec<DVector<f64>> = Vec::new();
    for group in group_eigenvalues(basis) {
        let g = c.select_columns(&group.positions);
        let (range, sigma, null) = right_split(&g);
        let embed = |v: nalgebra::DVectorView<f64>, scale: f64| {
            let mut full = DVector::zeros(dim);
            for (i, &k) in group.positions.iter().enumerate() {
                full[k] = v[i] * scale;
            }
            full
        };
        for (j, s) in sigma.iter().enumerate() {
            pinv_cols.push(embed(range.column(j), s.recip()));
        }
        for j in 0..null.ncols() {
            null_cols.push(embed(null.column(j), 1.0));
        }
    }
    OutputStructure {
        null: stack(dim, &null_cols),
        pinv: stack(dim, &pinv_cols),
    }
}

fn stack(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

fn sampled_structure(o: &DMatrix<f64>) -> OutputStructure {
    let (range, sigma, null) = right_split(o);
    let mut pinv = range;
    for (j, s) in sigma.iter().enumerate() {
        pinv.column_mut(j).scale_mut(s.recip());
    }
    OutputStructure { null, pinv }
}

pub(crate) fn inclusion_verdict(
    basis: &ModalBasis,
    structure: &OutputStructure,
    t: &DMatrix<f64>,
    label: &'static str,
) -> StrategicVerdict {
    let t_norm = spectral_norm(t);
    if t_norm == 0.0 {
        return StrategicVerdict {
            target: label,
            strategic: true,
            margin: f64::INFINITY,
            failing_modes: Vec::new(),
        };
    }
    let leak = t * &structure.null;
    let strategic = leak.ncols() == 0 || spectral_norm(&leak) <= INCLUSION_TOL * t_norm;
    let failing_modes = if strategic {
        Vec::new()
    } else {
        let spread = &leak * structure.null.transpose();
        (0..basis.len())
            .filter(|&k| spread.column(k).norm() > INCLUSION_TOL * t_norm)
            .map(|k| basis.mode(k))
            .collect()
    };
    let margin = if strategic {
        let gain = spectral_norm(&(t * &structure.pinv));
        if gain == 0.0 {
            f64::INFINITY
        } else {
            gain.recip()
        }
    } else {
        0.0
    };
    StrategicVerdict {
        target: label,
        strategic,
        margin,
        failing_modes,
    }
}

fn check_analysis_grid(basis: &ModalBasis, time_grid: &[f64]) -> Result<()> {
    check_grid(time_grid)?;
    if time_grid.len() < basis.len() {
        return Err(invalid(format!(
            "time grid has {} samples; at least {} (the mode count) are needed to establish rank",
            time_grid.len(),
            basis.len()
        )));
    }
    Ok(())
}

/// Is the gradient target weakly observable from the sensors over `time_grid`?
pub fn strategic_test_gradient(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    target: &Target,
    time_grid: &[f64],
) -> Result<StrategicVerdict> {
    check_analysis_grid(basis, time_grid)?;
    let c = output_matrix(basis, sensors)?;
    let t = target_factor(basis, target)?;
    Ok(inclusion_verdict(basis, &grouped_structure(basis, &c), &t, target.label()))
}

/// Same test on a direct SVD of the sampled observation matrix.
pub fn strategic_test_sampled(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    target: &Target,
    time_grid: &[f64],
) -> Result<StrategicVerdict> {
    check_analysis_grid(basis, time_grid)?;
    let o = observation_matrix(basis, sensors, time_grid)?;
    let t = target_factor(basis, target)?;
    Ok(inclusion_verdict(basis, &sampled_structure(&o), &t, target.label()))
}

/// Verdicts on the strip ω_r and on the boundary region it thickens.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionComparison {
    pub omega: StrategicVerdict,
    pub gamma: StrategicVerdict,
}

impl RegionComparison {
    /// ω_r-strategic must imply Γ*-strategic.
    pub fn implication_holds(&self) -> bool {
        !self.omega.strategic || self.gamma.strategic
    }
}

pub fn compare_internal_boundary(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    region: &BoundaryRegion,
    r: f64,
    time_grid: &[f64],
) -> Result<RegionComparison> {
    let omega_r = build_omega_r(region, r)?;
    check_analysis_grid(basis, time_grid)?;
    let c = output_matrix(basis, sensors)?;
    let structure = grouped_structure(basis, &c);
    let omega_target = Target::InternalGradient(omega_r);
    let gamma_target = Target::BoundaryGradient(*region);
    Ok(RegionComparison {
        omega: inclusion_verdict(basis, &structure, &target_factor(basis, &omega_target)?, omega_target.label()),
        gamma: inclusion_verdict(basis, &structure, &target_factor(basis, &gamma_target)?, gamma_target.label()),
    })
}
