//! Scenario description: everything needed to reproduce one analysis and
//! observer run.

use std::collections::BTreeSet;
use std::hash::Hasher;

use fnv::FnvHasher;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::observer::ControlSchedule;
use crate::sensing::{uniform_grid, ActuatorSpec, SensorSpec};
use crate::spectral::{BoundaryRegion, ModalBasis, ModalField};

/// Largest truncation order accepted from configuration files.
pub const MAX_ORDER: usize = 24;

/// One cosine product `amplitude · cos(nπξ₁) cos(mπξ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub n: usize,
    pub m: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Closed-form initial fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldDescriptor {
    Zero,
    CosProduct {
        n: usize,
        m: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Modes {
        terms: Vec<ModeTerm>,
    },
    /// Raw modal coefficients in basis order.
    Coefficients {
        values: Vec<f64>,
    },
    /// Uniform coefficients in `[−scale, scale]` drawn from the scenario seed.
    Random {
        #[serde(default = "one")]
        scale: f64,
    },
}

impl Default for FieldDescriptor {
    fn default() -> Self {
        FieldDescriptor::Zero
    }
}

impl FieldDescriptor {
    /// `stream` separates the random draws of different fields.
    pub fn resolve(&self, basis: &ModalBasis, seed: u64, stream: u64) -> Result<ModalField> {
        match self {
            FieldDescriptor::Zero => Ok(ModalField::zeros(basis)),
            FieldDescriptor::CosProduct { n, m, amplitude } => ModalField::cosine_product(basis, *n, *m, *amplitude),
            FieldDescriptor::Modes { terms } => {
                let mut field = ModalField::zeros(basis);
                for t in terms {
                    let term = ModalField::cosine_product(basis, t.n, t.m, t.amplitude)?;
                    *field.coeffs_mut() += term.coeffs();
                }
                Ok(field)
            }
            FieldDescriptor::Coefficients { values } => {
                ModalField::from_coeffs(basis, DVector::from_column_slice(values))
            }
            FieldDescriptor::Random { scale } => {
                if !(*scale >= 0.0 && scale.is_finite()) {
                    return Err(invalid(format!("random field scale must be nonnegative, got {scale}")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                let coeffs = DVector::from_fn(basis.len(), |_, _| scale * rng.random_range(-1.0..=1.0));
                ModalField::from_coeffs(basis, coeffs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlDescriptor {
    Constant { value: f64 },
    /// `(start, value)` pairs.
    Piecewise { pieces: Vec<(f64, f64)> },
}

impl Default for ControlDescriptor {
    fn default() -> Self {
        ControlDescriptor::Constant { value: 0.0 }
    }
}

impl ControlDescriptor {
    pub fn schedule(&self) -> Result<ControlSchedule> {
        match self {
            ControlDescriptor::Constant { value } if value.is_finite() => Ok(ControlSchedule::constant(*value)),
            ControlDescriptor::Constant { value } => Err(invalid(format!("control value {value} is not finite"))),
            ControlDescriptor::Piecewise { pieces } => ControlSchedule::piecewise(pieces.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "design", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainSpec {
    PolePlacement { alpha_target: f64 },
    Collocated { rho: f64 },
}

/// Uniform analysis grid on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub samples: usize,
    pub horizon: f64,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        uniform_grid(self.samples, self.horizon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub n_max: usize,
    #[serde(default)]
    pub shift: f64,
    pub sensors: Vec<SensorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator: Option<ActuatorSpec>,
    pub region: BoundaryRegion,
    /// Depth of the internal strip ω_r, when the strip comparison is wanted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_r: Option<f64>,
    pub gain: GainSpec,
    #[serde(default)]
    pub x0: FieldDescriptor,
    #[serde(default)]
    pub z0: FieldDescriptor,
    #[serde(default)]
    pub control: ControlDescriptor,
    pub horizon: f64,
    pub dt: f64,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    /// Run the observer simulation after the analysis stage.
    #[serde(default = "yes")]
    pub simulate: bool,
}

pub(crate) const X0_STREAM: u64 = 1;
pub(crate) const Z0_STREAM: u64 = 2;

impl Scenario {
    /// Checks every invariant and reports all violations with JSON-pointer paths.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |path: &str, outcome: Result<()>| {
            if let Err(e) = outcome {
                problems.push(format!("{path}: {}", strip(&e)));
            }
        };

        let basis = if self.n_max == 0 || self.n_max > MAX_ORDER {
            check(
                "/n_max",
                Err(invalid(format!("truncation order must lie in 1..={MAX_ORDER}, got {}", self.n_max))),
            );
            None
        } else {
            ModalBasis::new(self.n_max).ok()
        };
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            check("/shift", Err(invalid(format!("shift must be finite and nonnegative, got {}", self.shift))));
        }
        if self.sensors.is_empty() {
            check("/sensors", Err(invalid("at least one sensor is required")));
        }
        let mut ids = BTreeSet::new();
        for (i, s) in self.sensors.iter().enumerate() {
            check(&format!("/sensors/{i}"), s.validate());
            if !ids.insert(s.id()) {
                check(&format!("/sensors/{i}/id"), Err(invalid(format!("duplicate sensor id {:?}", s.id()))));
            }
        }
        if let Some(a) = &self.actuator {
            check("/actuator/location", a.validate());
        }
        check("/region", self.region.validate());
        if let Some(r) = self.omega_r {
            check("/omega_r", crate::spectral::build_omega_r(&self.region, r).map(|_| ()));
        }
        match self.gain {
            GainSpec::PolePlacement { alpha_target } if !(alpha_target > 0.0 && alpha_target.is_finite()) => check(
                "/gain/alpha_target",
                Err(invalid(format!("target decay must be positive, got {alpha_target}"))),
            ),
            GainSpec::Collocated { rho } if !(rho > 0.0 && rho.is_finite()) => {
                check("/gain/rho", Err(invalid(format!("gain factor must be positive, got {rho}"))))
            }
            _ => {}
        }
        if let Some(basis) = &basis {
            check("/x0", self.x0.resolve(basis, self.seed, X0_STREAM).map(|_| ()));
            check("/z0", self.z0.resolve(basis, self.seed, Z0_STREAM).map(|_| ()));
            if self.time_grid.samples < basis.len() {
                check(
                    "/time_grid/samples",
                    Err(invalid(format!(
                        "{} samples cannot resolve {} modes",
                        self.time_grid.samples,
                        basis.len()
                    ))),
                );
            }
        }
        check("/control", self.control.schedule().map(|_| ()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            check("/dt", Err(invalid(format!("time step must be positive, got {}", self.dt))));
        } else if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            check("/horizon", Err(invalid(format!("horizon must be at least one step, got {}", self.horizon))));
        } else {
            let steps = (self.horizon / self.dt).round();
            if (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
                check(
                    "/horizon",
                    Err(invalid(format!("horizon {} is not a whole number of steps {}", self.horizon, self.dt))),
                );
            }
        }
        if !(self.time_grid.horizon > 0.0 && self.time_grid.horizon.is_finite()) {
            check("/time_grid/horizon", Err(invalid("analysis horizon must be positive")));
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn basis(&self) -> Result<ModalBasis> {
        ModalBasis::new(self.n_max)
    }

    /// Canonical JSON: keys sorted, defaults written out.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("scenario serialization cannot fail")
    }

    /// 64-bit FNV-1a digest of the canonical JSON.
    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(self.canonical_json().as_bytes());
        h.finish()
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidArgument(msg) => msg.clone(),
        other => other.to_string(),
    }
}
