//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for every numerical rank decision.
pub const RANK_TOL: f64 = 1e-10;

/// Singular values in descending order (empty matrices give an empty list).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Rank with singular values below `RANK_TOL·σ_max` treated as zero.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|v| **v > RANK_TOL * max).count(),
        _ => 0,
    }
}

/// Right singular structure of `m`: `(V_range, σ_range, V_null)` with orthonormal
/// columns splitting the column space of `mᵀ` from the null space of `m`.
pub fn right_split(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let cols = m.ncols();
    if m.nrows() == 0 || m.amax() == 0.0 {
        return (DMatrix::zeros(cols, 0), Vec::new(), DMatrix::identity(cols, cols));
    }
    // pad wide matrices so the thin SVD yields a complete right basis
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let s = &svd.singular_values;
    let max = s.iter().copied().fold(0.0, f64::max);
    let mut range = Vec::new();
    let mut sigma = Vec::new();
    let mut null = Vec::new();
    for (i, &sv) in s.iter().enumerate() {
        let v: DVector<f64> = v_t.row(i).transpose();
        if sv > RANK_TOL * max {
            range.push(v);
            sigma.push(sv);
        } else {
            null.push(v);
        }
    }
    (columns(cols, &range), sigma, columns(cols, &null))
}

fn columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    if cols.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(cols)
    }
}

/// Minimum-norm least-squares solution with the relative rank threshold.
pub fn min_norm_solve(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if m.is_empty() || m.amax() == 0.0 {
        return DVector::zeros(m.ncols());
    }
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.max();
    svd.solve(rhs, RANK_TOL * max).expect("U and V were computed")
}
