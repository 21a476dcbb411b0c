use std::collections::BTreeMap;

use crate::spectral::ModalBasis;

/// Modes sharing one eigenvalue `−sπ²`, `s = n² + m²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub eigenvalue: f64,
    pub radius_sq: usize,
    pub positions: Vec<usize>,
}

impl EigenGroup {
    pub fn multiplicity(&self) -> usize {
        self.positions.len()
    }
}

/// Exact grouping by `n² + m²`, in descending eigenvalue order.
pub fn group_eigenvalues(basis: &ModalBasis) -> Vec<EigenGroup> {
    let mut by_radius: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, mode) in basis.modes().iter().enumerate() {
        by_radius.entry(mode.radius_sq()).or_default().push(k);
    }
    by_radius
        .into_iter()
        .map(|(radius_sq, positions)| EigenGroup {
            eigenvalue: basis.eigenvalue(positions[0]),
            radius_sq,
            positions,
        })
        .collect()
}
