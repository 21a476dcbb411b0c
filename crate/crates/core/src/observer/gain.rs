//! Output-injection gain design on the truncated modal model.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{detectability_test, group_eigenvalues};
use crate::error::{invalid, Error, Result};
use crate::linalg::singular_values;
use crate::sensing::{output_matrix, SensorSpec};
use crate::spectral::ModalBasis;

/// Seed for the eigenvector parameters when the caller does not supply one.
pub const DEFAULT_DESIGN_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainDesign {
    PolePlacement { alpha_target: f64 },
    Collocated { rho: f64 },
}

/// Output-injection gain `H` (modes × sensors) with its certified closed-loop spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGain {
    pub h: DMatrix<f64>,
    pub design: GainDesign,
    pub shift: f64,
    /// Largest real part of the closed-loop spectrum.
    pub abscissa: f64,
    pub spectrum: Vec<Complex<f64>>,
}

impl ObserverGain {
    pub fn sensor_count(&self) -> usize {
        self.h.ncols()
    }

    /// Rows with nonzero gain; the remaining modes evolve uncorrected.
    pub fn corrected_modes(&self) -> Vec<usize> {
        (0..self.h.nrows())
            .filter(|&k| self.h.row(k).iter().any(|v| *v != 0.0))
            .collect()
    }
}

/// `diag(λ + c) − H·C`.
pub fn closed_loop_matrix(
    basis: &ModalBasis,
    gain: &ObserverGain,
    sensors: &[SensorSpec],
    shift: f64,
) -> Result<DMatrix<f64>> {
    let c = output_matrix(basis, sensors)?;
    if gain.h.nrows() != basis.len() || gain.h.ncols() != c.nrows() {
        return Err(invalid(format!(
            "gain is {}×{} but the model has {} modes and {} sensors",
            gain.h.nrows(),
            gain.h.ncols(),
            basis.len(),
            c.nrows()
        )));
    }
    Ok(assemble(basis, &gain.h, &c, shift))
}

fn assemble(basis: &ModalBasis, h: &DMatrix<f64>, c: &DMatrix<f64>, shift: f64) -> DMatrix<f64> {
    let mut f = -(h * c);
    for (k, lambda) in basis.eigenvalues().iter().enumerate() {
        f[(k, k)] += lambda + shift;
    }
    f
}

pub(crate) fn spectrum(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.is_empty() {
        return Vec::new();
    }
    m.complex_eigenvalues().iter().copied().collect()
}

pub(crate) fn abscissa(eigs: &[Complex<f64>]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Pole placement with the default eigenvector seed.
pub fn design_gain_pole_placement(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    shift: f64,
    alpha_target: f64,
) -> Result<ObserverGain> {
    design_gain_pole_placement_seeded(basis, sensors, shift, alpha_target, DEFAULT_DESIGN_SEED)
}

/// Moves every mode with `λ + c ≥ −α` to distinct targets in `[−1.1α, −α]`.
///
/// Works on the dual pair `(A₁, C₁ᵀ)`: each closed-loop eigenvector is
/// `v_j = (A₁ − μ_j)⁻¹ C₁ᵀ w_j` for a free parameter `w_j`, and the gain
/// follows from `K V = W`, `H₁ = Kᵀ`.
pub fn design_gain_pole_placement_seeded(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    shift: f64,
    alpha_target: f64,
    seed: u64,
) -> Result<ObserverGain> {
    if !(alpha_target > 0.0 && alpha_target.is_finite()) {
        return Err(invalid(format!("target decay must be positive, got {alpha_target}")));
    }
    let report = detectability_test(basis, sensors, shift)?;
    if let Some(g) = report.failing_groups().next() {
        return Err(Error::DesignInfeasible {
            reason: format!(
                "not detectable: group at eigenvalue {:.6} ({} modes, rank {}) is unobservable from {} sensors",
                g.group.eigenvalue,
                g.group.multiplicity(),
                g.rank,
                sensors.len()
            ),
            eigenvalue: Some(g.group.eigenvalue),
        });
    }
    let c = output_matrix(basis, sensors)?;
    let threshold = -alpha_target - crate::analysis::SPECTRUM_TOL;
    for group in group_eigenvalues(basis) {
        if group.eigenvalue + shift < threshold {
            continue;
        }
        let g = crate::analysis::group_rank(&c, &group);
        if !g.full_rank() {
            return Err(Error::DesignInfeasible {
                reason: format!(
                    "group at eigenvalue {:.6} must be moved below −{alpha_target} but has rank {} of {}",
                    group.eigenvalue,
                    g.rank,
                    group.multiplicity()
                ),
                eigenvalue: Some(group.eigenvalue),
            });
        }
    }
    let slow: Vec<usize> = (0..basis.len())
        .filter(|&k| basis.eigenvalue(k) + shift >= threshold)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_failure = String::new();
    for attempt in 0..2 {
        let jitter = if attempt == 0 { 0.0 } else { 0.01 };
        match place(basis, &c, &slow, shift, alpha_target, jitter, &mut rng) {
            Ok(gain) => return Ok(gain),
            Err(msg) => last_failure = msg,
        }
    }
    Err(Error::NumericalFailure(format!("pole placement failed after retry: {last_failure}")))
}

fn place(
    basis: &ModalBasis,
    c: &DMatrix<f64>,
    slow: &[usize],
    shift: f64,
    alpha: f64,
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<ObserverGain, String> {
    let q = c.nrows();
    let s = slow.len();
    let rates: Vec<f64> = slow.iter().map(|&k| basis.eigenvalue(k) + shift).collect();
    let targets: Vec<f64> = (0..s)
        .map(|j| {
            let spread = -alpha * (1.0 + 0.1 * j as f64 / s as f64);
            spread * (1.0 + jitter * rng.random_range(-1.0..=1.0))
        })
        .collect();
    let w = DMatrix::from_fn(q, s, |_, _| if q == 1 { 1.0 } else { rng.random_range(-1.0..=1.0) });

    let mut v = DMatrix::zeros(s, s);
    for j in 0..s {
        for (r, &k) in slow.iter().enumerate() {
            let gap = rates[r] - targets[j];
            if gap.abs() < 1e-12 * alpha {
                return Err(format!("target {} coincides with an open-loop eigenvalue", targets[j]));
            }
            let bw: f64 = (0..q).map(|i| c[(i, k)] * w[(i, j)]).sum();
            v[(r, j)] = bw / gap;
        }
    }
    let sv = singular_values(&v);
    if sv.is_empty() || !(sv[s - 1] > 1e-13 * sv[0]) {
        return Err("eigenvector matrix is singular".into());
    }
    let h_slow = v
        .transpose()
        .lu()
        .solve(&w.transpose())
        .ok_or_else(|| "eigenvector matrix is singular".to_string())?;

    let mut h = DMatrix::zeros(basis.len(), q);
    for (r, &k) in slow.iter().enumerate() {
        h.row_mut(k).copy_from(&h_slow.row(r));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err("gain has non-finite entries".into());
    }

    let c_slow = c.select_columns(slow);
    let mut block = -(&h_slow * &c_slow);
    for (r, rate) in rates.iter().enumerate() {
        block[(r, r)] += rate;
    }
    let mut placed: Vec<f64> = spectrum(&block).iter().map(|z| z.re).collect();
    let mut wanted = targets.clone();
    placed.sort_by(f64::total_cmp);
    wanted.sort_by(f64::total_cmp);
    let deviation = placed
        .iter()
        .zip(&wanted)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(deviation <= 1e-6 * alpha) {
        return Err(format!("placed spectrum deviates from targets by {deviation:.3e}"));
    }

    let spec = spectrum(&assemble(basis, &h, c, shift));
    let abscissa = abscissa(&spec);
    if !(abscissa <= -0.9 * alpha) {
        return Err(format!("closed-loop abscissa {abscissa} above −0.9·{alpha}"));
    }
    Ok(ObserverGain {
        h,
        design: GainDesign::PolePlacement { alpha_target: alpha },
        shift,
        abscissa,
        spectrum: spec,
    })
}

/// `H = ρ·Cᵀ`; the closed loop `diag(λ + c) − ρCᵀC` is symmetric.
pub fn design_gain_collocated(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    shift: f64,
    rho: f64,
) -> Result<ObserverGain> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!("collocated gain factor must be positive, got {rho}")));
    }
    let c = output_matrix(basis, sensors)?;
    let h = c.transpose() * rho;
    let f = assemble(basis, &h, &c, shift);
    let eig = f.symmetric_eigen();
    let spec: Vec<Complex<f64>> = eig.eigenvalues.iter().map(|&re| Complex::new(re, 0.0)).collect();
    let abscissa = abscissa(&spec);
    if !(abscissa < 0.0) {
        return Err(Error::DesignInfeasible {
            reason: format!("collocated gain ρ = {rho} leaves spectral abscissa {abscissa:.3e} ≥ 0"),
            eigenvalue: Some(abscissa),
        });
    }
    Ok(ObserverGain {
        h,
        design: GainDesign::Collocated { rho },
        shift,
        abscissa,
        spectrum: spec,
    })
}

/// Zero gain, useful as a baseline for the uncorrected error flow.
pub fn zero_gain(basis: &ModalBasis, sensors: usize, shift: f64) -> ObserverGain {
    let spec: Vec<Complex<f64>> = basis
        .eigenvalues()
        .iter()
        .map(|l| Complex::new(l + shift, 0.0))
        .collect();
    ObserverGain {
        h: DMatrix::zeros(basis.len(), sensors),
        design: GainDesign::Collocated { rho: 0.0 },
        shift,
        abscissa: abscissa(&spec),
        spectrum: spec,
    }
}

/// Gain from explicit coefficients; the spectrum is measured, not certified.
pub fn gain_from_matrix(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    shift: f64,
    h: DMatrix<f64>,
    design: GainDesign,
) -> Result<ObserverGain> {
    let c = output_matrix(basis, sensors)?;
    if h.nrows() != basis.len() || h.ncols() != c.nrows() {
        return Err(invalid("gain shape does not match modes × sensors"));
    }
    let spec = spectrum(&assemble(basis, &h, &c, shift));
    Ok(ObserverGain {
        abscissa: abscissa(&spec),
        h,
        design,
        shift,
        spectrum: spec,
    })
}

pub(crate) fn innovation_rows(gain: &ObserverGain, rows: &[usize]) -> DMatrix<f64> {
    gain.h.select_rows(rows)
}

pub(crate) fn column(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&k| v[k]))
}
