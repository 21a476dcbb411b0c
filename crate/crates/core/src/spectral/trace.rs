//! Gradient fields, their traces on boundary regions, and gradient Gram
//! matrices on internal strips.
//!
//! On an edge with arc parameter `s`, the tangential derivative of a cosine
//! series is a sine series in `s` with coefficients indexed `k = 1..=N`; the
//! outward normal derivative is a cosine series with coefficients `k = 0..=N`.
//! The Neumann eigenfunctions make every normal coefficient vanish.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::basis::{check_point, ModalBasis};
use super::field::ModalField;
use super::geometry::{BoundaryRegion, Edge, Rect};
use super::quadrature::CompositeRule;
use super::trig::{cos_pi, sin_pi};
use crate::error::{invalid, Result};

/// `∇x(ξ)` for the field `x`.
pub fn gradient_field_eval(basis: &ModalBasis, field: &ModalField, xi: [f64; 2]) -> Result<[f64; 2]> {
    field.check_basis(basis)?;
    check_point(xi)?;
    let mut g = [0.0; 2];
    for (k, c) in field.coeffs().iter().enumerate() {
        if *c != 0.0 {
            let d = basis.grad_unchecked(k, xi);
            g[0] += c * d[0];
            g[1] += c * d[1];
        }
    }
    Ok(g)
}

/// Gradient of a field restricted to an edge region, as series in the arc parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTrace {
    pub region: BoundaryRegion,
    /// Coefficients of `sin(kπs)`, `k = 1..=N`.
    pub tangential: Vec<f64>,
    /// Coefficients of `cos(kπs)`, `k = 0..=N`, for the outward normal derivative.
    pub normal: Vec<f64>,
}

impl GradientTrace {
    /// `(tangential, normal)` at arc parameter `s`.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let t = self
            .tangential
            .iter()
            .enumerate()
            .map(|(i, c)| c * sin_pi((i + 1) as f64 * s))
            .sum();
        let n = self
            .normal
            .iter()
            .enumerate()
            .map(|(k, c)| c * cos_pi(k as f64 * s))
            .sum();
        (t, n)
    }

    pub fn is_zero(&self) -> bool {
        self.tangential.iter().chain(&self.normal).all(|c| *c == 0.0)
    }
}

/// Modal-to-trace matrices for an edge: `(tangential (N × modes), normal ((N+1) × modes))`.
pub fn trace_matrices(basis: &ModalBasis, edge: Edge) -> (DMatrix<f64>, DMatrix<f64>) {
    let n_max = basis.n_max();
    let e = edge.fixed_coordinate();
    let sign = edge.outward_sign();
    let mut tangential = DMatrix::zeros(n_max, basis.len());
    let mut normal = DMatrix::zeros(n_max + 1, basis.len());
    for (k, mode) in basis.modes().iter().enumerate() {
        let a = basis.norm_factor(k);
        // along: frequency in the arc direction; across: frequency normal to the edge
        let (along, across) = if edge.is_horizontal() {
            (mode.n, mode.m)
        } else {
            (mode.m, mode.n)
        };
        if along >= 1 {
            tangential[(along - 1, k)] = a * cos_pi(across as f64 * e) * (-(along as f64) * PI);
        }
        normal[(along, k)] = sign * a * (-(across as f64) * PI) * sin_pi(across as f64 * e);
    }
    (tangential, normal)
}

/// `χ_Γ* γ ∇x`.
pub fn gradient_trace(basis: &ModalBasis, field: &ModalField, region: &BoundaryRegion) -> Result<GradientTrace> {
    field.check_basis(basis)?;
    region.validate()?;
    let (tm, nm) = trace_matrices(basis, region.edge);
    Ok(GradientTrace {
        region: *region,
        tangential: (tm * field.coeffs()).iter().copied().collect(),
        normal: (nm * field.coeffs()).iter().copied().collect(),
    })
}

/// L² norm of the trace over `region` (same edge as the trace).
pub fn trace_norm_l2(trace: &GradientTrace, region: &BoundaryRegion) -> Result<f64> {
    region.validate()?;
    if region.edge != trace.region.edge {
        return Err(invalid(format!(
            "trace lives on the {} edge, norm requested on the {} edge",
            trace.region.edge.name(),
            region.edge.name()
        )));
    }
    if region.is_full_edge() {
        let tang: f64 = trace.tangential.iter().map(|c| 0.5 * c * c).sum();
        let norm: f64 = trace
            .normal
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { c * c } else { 0.5 * c * c })
            .sum();
        return Ok((tang + norm).sqrt());
    }
    let rule = boundary_rule(trace.tangential.len().max(1), region);
    let sq = rule.integrate(|s| {
        let (t, n) = trace.eval(s);
        t * t + n * n
    });
    Ok(sq.max(0.0).sqrt())
}

pub(crate) fn boundary_rule(n_max: usize, region: &BoundaryRegion) -> CompositeRule {
    CompositeRule::with_min_points(region.interval[0], region.interval[1], 8 * n_max)
}

/// Matrix `T` with `‖T c‖₂ = ‖χ_Γ* γ∇x‖_{L²(Γ*)}` for coefficient vectors `c`.
pub fn trace_l2_factor(basis: &ModalBasis, region: &BoundaryRegion) -> DMatrix<f64> {
    let (tm, nm) = trace_matrices(basis, region.edge);
    if region.is_full_edge() {
        let mut rows = DMatrix::zeros(tm.nrows() + nm.nrows(), basis.len());
        let half = 0.5_f64.sqrt();
        let tang_rows = tm.nrows();
        rows.rows_mut(0, tang_rows).copy_from(&(tm * half));
        let mut normal = nm;
        for k in 1..normal.nrows() {
            normal.row_mut(k).scale_mut(half);
        }
        rows.rows_mut(tang_rows, normal.nrows()).copy_from(&normal);
        return rows;
    }
    let rule = boundary_rule(basis.n_max(), region);
    let mut rows = DMatrix::zeros(2 * rule.len(), basis.len());
    for (q, (&s, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let sw = w.sqrt();
        for (i, row) in tm.row_iter().enumerate() {
            let sin = sin_pi((i + 1) as f64 * s) * sw;
            for k in 0..basis.len() {
                rows[(2 * q, k)] += sin * row[k];
            }
        }
        for (i, row) in nm.row_iter().enumerate() {
            let cos = cos_pi(i as f64 * s) * sw;
            for k in 0..basis.len() {
                rows[(2 * q + 1, k)] += cos * row[k];
            }
        }
    }
    rows
}

/// Gram matrix `∫_rect ∇φ_j · ∇φ_k dξ` by tensor Gauss–Legendre quadrature
/// with at least `16·N` points per axis.
pub fn gradient_gram(basis: &ModalBasis, rect: &Rect) -> Result<DMatrix<f64>> {
    rect.validate()?;
    let points = 16 * basis.n_max();
    let rx = CompositeRule::with_min_points(rect.x[0], rect.x[1], points);
    let ry = CompositeRule::with_min_points(rect.y[0], rect.y[1], points);
    let (sx, cx) = axis_tables(basis.n_max(), &rx);
    let (sy, cy) = axis_tables(basis.n_max(), &ry);
    let dim = basis.len();
    let mut gram = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mj = basis.mode(j);
        let aj = basis.norm_factor(j);
        for k in j..dim {
            let mk = basis.mode(k);
            let ak = basis.norm_factor(k);
            let d1 = (mj.n * mk.n) as f64 * sx[(mj.n, mk.n)] * cy[(mj.m, mk.m)];
            let d2 = (mj.m * mk.m) as f64 * cx[(mj.n, mk.n)] * sy[(mj.m, mk.m)];
            let v = aj * ak * PI * PI * (d1 + d2);
            gram[(j, k)] = v;
            gram[(k, j)] = v;
        }
    }
    Ok(gram)
}

/// `(∫ sin(iπs) sin(jπs), ∫ cos(iπs) cos(jπs))` tables over a rule.
fn axis_tables(n_max: usize, rule: &CompositeRule) -> (DMatrix<f64>, DMatrix<f64>) {
    let size = n_max + 1;
    let mut s = DMatrix::zeros(size, size);
    let mut c = DMatrix::zeros(size, size);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let sv: Vec<f64> = (0..size).map(|i| sin_pi(i as f64 * x)).collect();
        let cv: Vec<f64> = (0..size).map(|i| cos_pi(i as f64 * x)).collect();
        for i in 0..size {
            for j in 0..size {
                s[(i, j)] += w * sv[i] * sv[j];
                c[(i, j)] += w * cv[i] * cv[j];
            }
        }
    }
    (s, c)
}
