//! Cosine eigenbasis of the Neumann Laplacian on the unit square, normalized
//! in H¹(Ω).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::trig::{cos_pi, sin_pi};
use crate::error::{invalid, Result};

/// Frequencies `(n, m)` of the mode `cos(nπξ₁)cos(mπξ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: usize,
    pub m: usize,
}

impl ModeIndex {
    pub const fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    /// `n² + m²`, the integer that fixes the eigenvalue.
    pub const fn radius_sq(self) -> usize {
        self.n * self.n + self.m * self.m
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// `‖cos(kπs)‖²` on [0, 1].
fn cos_norm_sq(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        0.5
    }
}

/// Truncated eigenbasis with modes `0 ≤ n, m ≤ n_max` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalBasis {
    n_max: usize,
    modes: Vec<ModeIndex>,
    eigenvalues: Vec<f64>,
    norm_factors: Vec<f64>,
}

impl ModalBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("basis truncation order must be at least 1"));
        }
        let modes: Vec<ModeIndex> = (0..=n_max)
            .flat_map(|n| (0..=n_max).map(move |m| ModeIndex::new(n, m)))
            .collect();
        let eigenvalues: Vec<f64> = modes
            .iter()
            .map(|k| -(k.radius_sq() as f64) * PI * PI)
            .collect();
        let norm_factors = modes
            .iter()
            .zip(&eigenvalues)
            .map(|(k, &lambda)| {
                let l2 = cos_norm_sq(k.n) * cos_norm_sq(k.m);
                ((1.0 - lambda) * l2).sqrt().recip()
            })
            .collect();
        Ok(Self {
            n_max,
            modes,
            eigenvalues,
            norm_factors,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> ModeIndex {
        self.modes[k]
    }

    /// Position of mode `(n, m)` in the basis ordering.
    pub fn position(&self, n: usize, m: usize) -> Option<usize> {
        (n <= self.n_max && m <= self.n_max).then(|| n * (self.n_max + 1) + m)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    /// H¹ normalization factors `α_nm`.
    pub fn norm_factors(&self) -> &[f64] {
        &self.norm_factors
    }

    pub fn norm_factor(&self, k: usize) -> f64 {
        self.norm_factors[k]
    }

    /// `‖cos(nπξ₁)cos(mπξ₂)‖²_{L²(Ω)}` for mode `k`.
    pub fn raw_l2_norm_sq(&self, k: usize) -> f64 {
        let mode = self.modes[k];
        cos_norm_sq(mode.n) * cos_norm_sq(mode.m)
    }

    /// `φ_k(ξ)`.
    pub fn eval(&self, k: usize, xi: [f64; 2]) -> Result<f64> {
        check_point(xi)?;
        self.check_mode(k)?;
        Ok(self.eval_unchecked(k, xi))
    }

    pub(crate) fn eval_unchecked(&self, k: usize, xi: [f64; 2]) -> f64 {
        let mode = self.modes[k];
        self.norm_factors[k] * cos_pi(mode.n as f64 * xi[0]) * cos_pi(mode.m as f64 * xi[1])
    }

    /// `∇φ_k(ξ)`.
    pub(crate) fn grad_unchecked(&self, k: usize, xi: [f64; 2]) -> [f64; 2] {
        let mode = self.modes[k];
        let (n, m) = (mode.n as f64, mode.m as f64);
        let a = self.norm_factors[k];
        [
            -a * n * PI * sin_pi(n * xi[0]) * cos_pi(m * xi[1]),
            -a * m * PI * cos_pi(n * xi[0]) * sin_pi(m * xi[1]),
        ]
    }

    /// All `φ_k(ξ)` at once.
    pub(crate) fn eval_all(&self, xi: [f64; 2]) -> Vec<f64> {
        let cx: Vec<f64> = (0..=self.n_max).map(|n| cos_pi(n as f64 * xi[0])).collect();
        let cy: Vec<f64> = (0..=self.n_max).map(|m| cos_pi(m as f64 * xi[1])).collect();
        self.modes
            .iter()
            .zip(&self.norm_factors)
            .map(|(mode, a)| a * cx[mode.n] * cy[mode.m])
            .collect()
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.modes.len() {
            return Err(invalid(format!(
                "mode position {k} out of range for a basis of {} modes",
                self.modes.len()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_point(xi: [f64; 2]) -> Result<()> {
    if xi.iter().all(|c| (0.0..=1.0).contains(c)) {
        Ok(())
    } else {
        Err(invalid(format!(
            "point ({}, {}) lies outside the closed unit square",
            xi[0], xi[1]
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_order() {
        assert!(matches!(ModalBasis::new(0), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn mode_layout() {
        let basis = ModalBasis::new(3).unwrap();
        assert_eq!(basis.len(), 16);
        let mut seen = std::collections::HashSet::new();
        for (k, mode) in basis.modes().iter().enumerate() {
            assert!(seen.insert(*mode));
            assert_eq!(basis.position(mode.n, mode.m), Some(k));
        }
        assert_eq!(basis.position(4, 0), None);
    }

    #[test]
    fn constant_mode() {
        let basis = ModalBasis::new(2).unwrap();
        assert_eq!(basis.eigenvalue(0), 0.0);
        assert_eq!(basis.norm_factor(0), 1.0);
        assert_eq!(basis.eval(0, [0.3, 0.7]).unwrap(), 1.0);
    }

    #[test]
    fn mode_one_one() {
        let basis = ModalBasis::new(2).unwrap();
        let k = basis.position(1, 1).unwrap();
        assert!((basis.eigenvalue(k) + 19.739_208_802_178_716).abs() < 1e-12);
        let expected = 2.0 / (1.0 + 2.0 * PI * PI).sqrt();
        assert!((basis.norm_factor(k) - expected).abs() < 1e-15);
    }

    #[test]
    fn eval_examples() {
        let basis = ModalBasis::new(3).unwrap();
        let k10 = basis.position(1, 0).unwrap();
        assert_eq!(basis.eval(k10, [0.5, 0.123]).unwrap(), 0.0);
        let k12 = basis.position(1, 2).unwrap();
        assert_eq!(basis.eval(k12, [0.25, 0.25]).unwrap(), 0.0);
        assert!(basis.eval(0, [1.2, 0.5]).is_err());
        assert!(basis.eval(0, [0.5, -0.1]).is_err());
        assert!(basis.eval(99, [0.5, 0.5]).is_err());
    }

    #[test]
    fn eigenvalues_follow_the_sum_of_squares() {
        let basis = ModalBasis::new(5).unwrap();
        for (k, mode) in basis.modes().iter().enumerate() {
            let expected = -((mode.n * mode.n + mode.m * mode.m) as f64) * PI * PI;
            assert_eq!(basis.eigenvalue(k), expected);
        }
    }
}
