//! Sensors, actuators, the output operator `C`, the input operator `B`, and
//! the sampled observation map `K: x₀ ↦ C S(t) x₀` with its discrete adjoint.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::quadrature::CompositeRule;
use crate::spectral::trig::cos_pi;
use crate::spectral::{ModalBasis, ModalField, Rect};

/// Closed-form weight functions `f(ξ)` for zone and filament sensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    Constant {
        value: f64,
    },
    /// `scale · cos(aπ(ξ₁ − o₁)) · cos(bπ(ξ₂ − o₂))`.
    CosProduct {
        a: f64,
        b: f64,
        #[serde(default)]
        origin: [f64; 2],
        #[serde(default = "one")]
        scale: f64,
    },
    /// `p(ξ₁)·q(ξ₂)` with ascending coefficient lists of degree at most 4.
    Polynomial { x: Vec<f64>, y: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Constant { value: 1.0 }
    }
}

impl Weight {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::CosProduct { a, b, origin, scale } => {
                scale * cos_pi(a * (p[0] - origin[0])) * cos_pi(b * (p[1] - origin[1]))
            }
            Weight::Polynomial { x, y } => horner(x, p[0]) * horner(y, p[1]),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Weight::Polynomial { x, y } if x.len() > 5 || y.len() > 5 => Err(invalid(
                "polynomial weights are limited to degree 4 per axis",
            )),
            Weight::Polynomial { x, y } if x.is_empty() || y.is_empty() => {
                Err(invalid("polynomial weights need at least one coefficient per axis"))
            }
            _ => Ok(()),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// A sensor: zone `(D, f)`, pointwise `(b, δ_b)`, or filament `(σ, f)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensorSpec {
    Zone {
        id: String,
        support: Rect,
        #[serde(default)]
        weight: Weight,
    },
    Pointwise {
        id: String,
        location: [f64; 2],
    },
    /// Straight segment from `start` to `end`.
    Filament {
        id: String,
        start: [f64; 2],
        end: [f64; 2],
        #[serde(default)]
        weight: Weight,
    },
}

impl SensorSpec {
    pub fn pointwise(id: impl Into<String>, location: [f64; 2]) -> Self {
        SensorSpec::Pointwise {
            id: id.into(),
            location,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            SensorSpec::Zone { id, .. }
            | SensorSpec::Pointwise { id, .. }
            | SensorSpec::Filament { id, .. } => id,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SensorSpec::Zone { support, weight, .. } => {
                support
                    .validate()
                    .map_err(|_| invalid(format!("sensor '{}': zone support is empty or leaves the square", self.id())))?;
                weight.validate()
            }
            SensorSpec::Pointwise { location, .. } => {
                if strictly_interior(*location) {
                    Ok(())
                } else {
                    Err(invalid(format!(
                        "sensor '{}': pointwise location ({}, {}) must be strictly inside the square",
                        self.id(),
                        location[0],
                        location[1]
                    )))
                }
            }
            SensorSpec::Filament { start, end, weight, .. } => {
                if start == end {
                    return Err(invalid(format!("sensor '{}': filament endpoints coincide", self.id())));
                }
                let closed = |p: [f64; 2]| p.iter().all(|c| (0.0..=1.0).contains(c));
                if !(closed(*start) && closed(*end)) {
                    return Err(invalid(format!("sensor '{}': filament leaves the square", self.id())));
                }
                weight.validate()
            }
        }
    }
}

pub(crate) fn strictly_interior(p: [f64; 2]) -> bool {
    p.iter().all(|c| *c > 0.0 && *c < 1.0)
}

/// Pointwise actuator `(b̄, δ_b̄)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSpec {
    pub location: [f64; 2],
}

impl ActuatorSpec {
    pub fn validate(&self) -> Result<()> {
        if strictly_interior(self.location) {
            Ok(())
        } else {
            Err(invalid(format!(
                "actuator location ({}, {}) must be strictly inside the square",
                self.location[0], self.location[1]
            )))
        }
    }
}

/// Sampled sensor outputs: one row per time, one column per sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    times: Vec<f64>,
    samples: DMatrix<f64>,
}

impl OutputRecord {
    pub fn new(times: Vec<f64>, samples: DMatrix<f64>) -> Result<Self> {
        check_grid(&times)?;
        if samples.nrows() != times.len() {
            return Err(invalid(format!(
                "record has {} sample rows for {} times",
                samples.nrows(),
                times.len()
            )));
        }
        Ok(Self { times, samples })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn sensor_count(&self) -> usize {
        self.samples.ncols()
    }

    /// Samples stacked time-major, matching the rows of [`observation_matrix`].
    pub fn stacked(&self) -> DVector<f64> {
        let q = self.samples.ncols();
        DVector::from_fn(self.samples.len(), |r, _| self.samples[(r / q, r % q)])
    }
}

pub(crate) fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("time grid is empty"));
    }
    if !times.iter().all(|t| t.is_finite() && *t >= 0.0) {
        return Err(invalid("time grid entries must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("time grid must be strictly increasing"));
    }
    Ok(())
}

/// Uniform grid of `samples` points on `[0, horizon]`.
pub fn uniform_grid(samples: usize, horizon: f64) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..samples)
            .map(|j| horizon * j as f64 / (samples - 1) as f64)
            .collect(),
    }
}

/// Trapezoidal weights of a grid; a single sample gets unit weight.
pub fn time_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|j| {
            let left = if j > 0 { times[j] - times[j - 1] } else { 0.0 };
            let right = if j + 1 < n { times[j + 1] - times[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `C φ_k` for every mode.
pub fn output_row(basis: &ModalBasis, sensor: &SensorSpec) -> Result<DVector<f64>> {
    output_row_with_points(basis, sensor, None)
}

/// [`output_row`] with an explicit number of quadrature points per axis
/// (defaults: `16·N` for zones, `8·N` for filaments).
pub fn output_row_with_points(
    basis: &ModalBasis,
    sensor: &SensorSpec,
    points: Option<usize>,
) -> Result<DVector<f64>> {
    sensor.validate()?;
    let n_max = basis.n_max();
    match sensor {
        SensorSpec::Pointwise { location, .. } => Ok(DVector::from_vec(basis.eval_all(*location))),
        SensorSpec::Zone { support, weight, .. } => {
            let points = points.unwrap_or(16 * n_max);
            let rx = CompositeRule::with_min_points(support.x[0], support.x[1], points);
            let ry = CompositeRule::with_min_points(support.y[0], support.y[1], points);
            let size = n_max + 1;
            let cy: Vec<Vec<f64>> = ry
                .nodes
                .iter()
                .map(|&y| (0..size).map(|m| cos_pi(m as f64 * y)).collect())
                .collect();
            let mut table = DMatrix::<f64>::zeros(size, size);
            for (&x, &wx) in rx.nodes.iter().zip(&rx.weights) {
                let cx: Vec<f64> = (0..size).map(|n| cos_pi(n as f64 * x)).collect();
                for ((&y, &wy), cyv) in ry.nodes.iter().zip(&ry.weights).zip(&cy) {
                    let fw = wx * wy * weight.eval([x, y]);
                    if fw == 0.0 {
                        continue;
                    }
                    for n in 0..size {
                        let a = fw * cx[n];
                        for m in 0..size {
                            table[(n, m)] += a * cyv[m];
                        }
                    }
                }
            }
            Ok(modal_from_table(basis, &table))
        }
        SensorSpec::Filament { start, end, weight, .. } => {
            let points = points.unwrap_or(8 * n_max);
            let rule = CompositeRule::with_min_points(0.0, 1.0, points);
            let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
            let size = n_max + 1;
            let mut table = DMatrix::<f64>::zeros(size, size);
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let p = [
                    start[0] + s * (end[0] - start[0]),
                    start[1] + s * (end[1] - start[1]),
                ];
                let fw = w * length * weight.eval(p);
                let cx: Vec<f64> = (0..size).map(|n| cos_pi(n as f64 * p[0])).collect();
                let cy: Vec<f64> = (0..size).map(|m| cos_pi(m as f64 * p[1])).collect();
                for n in 0..size {
                    for m in 0..size {
                        table[(n, m)] += fw * cx[n] * cy[m];
                    }
                }
            }
            Ok(modal_from_table(basis, &table))
        }
    }
}

fn modal_from_table(basis: &ModalBasis, table: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        basis.len(),
        basis
            .modes()
            .iter()
            .zip(basis.norm_factors())
            .map(|(mode, a)| a * table[(mode.n, mode.m)]),
    )
}

/// Stacked output rows: `C` as a `q × modes` matrix.
pub fn output_matrix(basis: &ModalBasis, sensors: &[SensorSpec]) -> Result<DMatrix<f64>> {
    let mut c = DMatrix::zeros(sensors.len(), basis.len());
    for (i, sensor) in sensors.iter().enumerate() {
        c.set_row(i, &output_row(basis, sensor)?.transpose());
    }
    Ok(c)
}

/// `y = C x`.
pub fn observe(basis: &ModalBasis, field: &ModalField, sensors: &[SensorSpec]) -> Result<DVector<f64>> {
    field.check_basis(basis)?;
    Ok(output_matrix(basis, sensors)? * field.coeffs())
}

/// Modal coefficients of `B u` for `u = 1`.
pub fn input_vector(basis: &ModalBasis, actuator: &ActuatorSpec) -> Result<ModalField> {
    actuator.validate()?;
    ModalField::from_coeffs(basis, DVector::from_vec(basis.eval_all(actuator.location)))
}

/// Sampled observation map; row `j·q + i` is sensor `i` at time `t_j`.
pub fn observation_matrix(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    time_grid: &[f64],
) -> Result<DMatrix<f64>> {
    check_grid(time_grid)?;
    let c = output_matrix(basis, sensors)?;
    Ok(sampled_observation(basis, &c, time_grid, 0.0))
}

pub(crate) fn sampled_observation(
    basis: &ModalBasis,
    c: &DMatrix<f64>,
    time_grid: &[f64],
    shift: f64,
) -> DMatrix<f64> {
    let q = c.nrows();
    let mut o = DMatrix::zeros(q * time_grid.len(), basis.len());
    for (j, &t) in time_grid.iter().enumerate() {
        for (k, lambda) in basis.eigenvalues().iter().enumerate() {
            let decay = ((lambda + shift) * t).exp();
            for i in 0..q {
                o[(j * q + i, k)] = c[(i, k)] * decay;
            }
        }
    }
    o
}

/// `Oᵀ W vec(y)` with trapezoidal time weights `W`.
pub fn adjoint_apply(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    time_grid: &[f64],
    record: &OutputRecord,
) -> Result<ModalField> {
    if record.times() != time_grid {
        return Err(invalid("record times do not match the time grid"));
    }
    if record.sensor_count() != sensors.len() {
        return Err(invalid(format!(
            "record has {} columns for {} sensors",
            record.sensor_count(),
            sensors.len()
        )));
    }
    let o = observation_matrix(basis, sensors, time_grid)?;
    let weights = time_weights(time_grid);
    let q = sensors.len();
    let mut y = record.stacked();
    for (r, v) in y.iter_mut().enumerate() {
        *v *= weights[r / q];
    }
    ModalField::from_coeffs(basis, o.transpose() * y)
}
