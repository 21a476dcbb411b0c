//! Per-eigenvalue rank test on the sensor/eigenfunction matrices `G_i`.

use nalgebra::DMatrix;

use super::groups::EigenGroup;
use crate::error::Result;
use crate::linalg::{singular_values, RANK_TOL};
use crate::sensing::{output_matrix, SensorSpec};
use crate::spectral::ModalBasis;

/// Margins below this are reported as fragile.
pub const FRAGILE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRank {
    pub group: EigenGroup,
    /// `(G_i)_{s,j} = C_s φ_j` over the group's modes (`q × multiplicity`).
    pub g: DMatrix<f64>,
    pub rank: usize,
    /// The `multiplicity`-th singular value; zero when `q` is smaller than the multiplicity.
    pub sigma_min: f64,
}

impl GroupRank {
    pub fn full_rank(&self) -> bool {
        self.rank == self.group.multiplicity()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub groups: Vec<GroupRank>,
    pub sensor_count: usize,
    /// `q ≥` the largest multiplicity among the tested groups.
    pub enough_sensors: bool,
    pub strategic: bool,
}

impl RankReport {
    pub fn failing_groups(&self) -> impl Iterator<Item = &GroupRank> {
        self.groups.iter().filter(|g| !g.full_rank())
    }
}

pub(crate) fn group_rank(c: &DMatrix<f64>, group: &EigenGroup) -> GroupRank {
    let g = c.select_columns(&group.positions);
    let s = singular_values(&g);
    let max = s.first().copied().unwrap_or(0.0);
    let rank = if max > 0.0 {
        s.iter().filter(|v| **v > RANK_TOL * max).count()
    } else {
        0
    };
    let sigma_min = s.get(group.multiplicity() - 1).copied().unwrap_or(0.0);
    GroupRank {
        group: group.clone(),
        g,
        rank,
        sigma_min,
    }
}

/// Rank condition over `groups`: every `G_i` must have rank equal to its multiplicity.
pub fn rank_condition(basis: &ModalBasis, sensors: &[SensorSpec], groups: &[EigenGroup]) -> Result<RankReport> {
    let c = output_matrix(basis, sensors)?;
    Ok(rank_condition_with_outputs(&c, groups))
}

pub(crate) fn rank_condition_with_outputs(c: &DMatrix<f64>, groups: &[EigenGroup]) -> RankReport {
    let ranks: Vec<GroupRank> = groups.iter().map(|g| group_rank(c, g)).collect();
    let max_mult = groups.iter().map(EigenGroup::multiplicity).max().unwrap_or(0);
    let enough_sensors = c.nrows() >= max_mult;
    let strategic = enough_sensors && ranks.iter().all(GroupRank::full_rank);
    RankReport {
        groups: ranks,
        sensor_count: c.nrows(),
        enough_sensors,
        strategic,
    }
}

/// Rank test restricted to the modes that do not decay under `Δ + c·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectabilityReport {
    pub shift: f64,
    /// Groups with `λ + c ≥ 0`.
    pub nonnegative: Vec<GroupRank>,
    pub enough_sensors: bool,
    pub detectable: bool,
}

impl DetectabilityReport {
    pub fn failing_groups(&self) -> impl Iterator<Item = &GroupRank> {
        self.nonnegative.iter().filter(|g| !g.full_rank())
    }

    pub fn margin(&self) -> f64 {
        self.nonnegative
            .iter()
            .map(|g| g.sigma_min)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Tolerance for deciding `λ + c ≥ 0` on the exactly known spectrum.
pub(crate) const SPECTRUM_TOL: f64 = 1e-9;

pub fn detectability_test(basis: &ModalBasis, sensors: &[SensorSpec], shift: f64) -> Result<DetectabilityReport> {
    if !(shift >= 0.0) {
        return Err(crate::error::invalid(format!("shift c must be nonnegative, got {shift}")));
    }
    let c = output_matrix(basis, sensors)?;
    Ok(detectability_with_outputs(basis, &c, shift))
}

pub(crate) fn detectability_with_outputs(basis: &ModalBasis, c: &DMatrix<f64>, shift: f64) -> DetectabilityReport {
    let groups: Vec<EigenGroup> = super::group_eigenvalues(basis)
        .into_iter()
        .filter(|g| g.eigenvalue + shift >= -SPECTRUM_TOL)
        .collect();
    let report = rank_condition_with_outputs(c, &groups);
    DetectabilityReport {
        shift,
        nonnegative: report.groups,
        enough_sensors: report.enough_sensors,
        detectable: report.strategic,
    }
}
