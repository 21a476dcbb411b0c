//! Observability and detectability analysis on the truncated modal model.

mod groups;
mod rank;
mod reconstruct;
mod strategic;

pub use groups::{group_eigenvalues, EigenGroup};
pub use rank::{
    detectability_test, rank_condition, DetectabilityReport, GroupRank, RankReport, FRAGILE_MARGIN,
};
pub(crate) use rank::{group_rank, SPECTRUM_TOL};
pub use reconstruct::{reconstruct_initial_gradient, Reconstruction, RESIDUAL_TOL};
pub use strategic::{
    compare_internal_boundary, strategic_test_gradient, strategic_test_sampled, target_factor,
    RegionComparison, StrategicVerdict, Target, INCLUSION_TOL,
};
