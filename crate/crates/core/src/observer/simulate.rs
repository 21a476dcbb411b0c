//! Time stepping of the plant/observer pair and of the error system.
//!
//! Modes whose gain row is zero are not corrected by the innovation, so their
//! observer coordinates (like every plant coordinate) are advanced with the
//! exact exponential step. Only the corrected block goes through classical
//! RK4, with the plant output and the uncorrected coordinates evaluated exactly
//! at the stage times. The explicit step guard therefore involves only the
//! corrected block.

use nalgebra::{DMatrix, DVector};

use super::gain::{column, innovation_rows, spectrum, ObserverGain};
use crate::error::{invalid, Error, Result};
use crate::sensing::{input_vector, output_matrix, ActuatorSpec, SensorSpec};
use crate::spectral::{phi1, trace_l2_factor, BoundaryRegion, ModalBasis, ModalField};

/// Piecewise-constant input `u(t)`: each entry holds from its start time on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSchedule {
    pieces: Vec<(f64, f64)>,
}

impl ControlSchedule {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self {
            pieces: vec![(0.0, value)],
        }
    }

    /// `pieces` are `(start, value)` pairs with strictly increasing starts.
    pub fn piecewise(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(invalid("control schedule entries must be finite"));
        }
        if pieces.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(invalid("control schedule start times must be strictly increasing"));
        }
        Ok(Self { pieces })
    }

    /// Value at `t`; zero before the first piece.
    pub fn value_at(&self, t: f64) -> f64 {
        self.pieces
            .iter()
            .take_while(|(start, _)| *start <= t + 1e-12)
            .last()
            .map_or(0.0, |(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorTrajectory {
    pub times: Vec<f64>,
    /// Euclidean norm of the modal error coefficients.
    pub omega_norm: Vec<f64>,
    /// L² norm of the gradient trace of the error on the boundary region.
    pub gamma_grad_norm: Vec<f64>,
}

impl ErrorTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value of `gamma_grad_norm` at the sample nearest to `t`.
    pub fn gamma_at(&self, t: f64) -> Option<f64> {
        nearest(&self.times, t).map(|i| self.gamma_grad_norm[i])
    }
}

fn nearest(times: &[f64], t: f64) -> Option<usize> {
    (0..times.len()).min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverRun {
    pub times: Vec<f64>,
    pub states: Vec<ModalField>,
    pub estimates: Vec<ModalField>,
    pub error: ErrorTrajectory,
}

impl ObserverRun {
    /// `x − z` at sample `i`.
    pub fn error_at(&self, i: usize) -> DVector<f64> {
        self.states[i].coeffs() - self.estimates[i].coeffs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRun {
    pub errors: Vec<ModalField>,
    pub trajectory: ErrorTrajectory,
}

/// Gain-induced split of the modal coordinates.
struct Split {
    active: Vec<usize>,
    passive: Vec<usize>,
    rates: Vec<f64>,
    c: DMatrix<f64>,
    c_active: DMatrix<f64>,
    c_passive: DMatrix<f64>,
    h_active: DMatrix<f64>,
    input: DVector<f64>,
}

impl Split {
    fn new(basis: &ModalBasis, sensors: &[SensorSpec], gain: &ObserverGain, input: DVector<f64>) -> Result<Self> {
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
        let active = gain.corrected_modes();
        let passive: Vec<usize> = (0..basis.len()).filter(|k| !active.contains(k)).collect();
        Ok(Self {
            rates: basis.eigenvalues().iter().map(|l| l + gain.shift).collect(),
            c_active: c.select_columns(&active),
            c_passive: c.select_columns(&passive),
            h_active: innovation_rows(gain, &active),
            c,
            active,
            passive,
            input,
        })
    }

    /// Largest step the explicit scheme accepts on the corrected block.
    fn max_step(&self) -> f64 {
        let mut block = -(&self.h_active * &self.c_active);
        let mut scale: f64 = 0.0;
        for (r, &k) in self.active.iter().enumerate() {
            block[(r, r)] += self.rates[k];
            scale = scale.max(self.rates[k].abs());
        }
        let radius = spectrum(&block).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = scale.max(radius);
        if scale == 0.0 {
            f64::INFINITY
        } else {
            0.5 / scale
        }
    }

    fn check_step(&self, dt: f64) -> Result<()> {
        let limit = self.max_step();
        if dt > limit {
            return Err(Error::StepTooLarge { dt, suggested: limit });
        }
        Ok(())
    }

    /// Exact uncorrected flow of the coordinates `idx` over `tau`.
    fn exact(&self, idx: &[usize], v: &DVector<f64>, u: f64, tau: f64) -> DVector<f64> {
        DVector::from_iterator(
            idx.len(),
            idx.iter().enumerate().map(|(r, &k)| {
                let mu = self.rates[k];
                (mu * tau).exp() * v[r] + phi1(mu, tau) * self.input[k] * u
            }),
        )
    }

    /// RK4 step of `ż = μ∘z + b u + H(w(τ) − C_a z)` given `w` at `τ ∈ {0, dt/2, dt}`.
    fn rk4(&self, z: &DVector<f64>, u: f64, dt: f64, w: &[DVector<f64>; 3]) -> DVector<f64> {
        let forcing = column(&self.input, &self.active) * u;
        let f = |z: &DVector<f64>, w: &DVector<f64>| {
            let mut d = &self.h_active * (w - &self.c_active * z) + &forcing;
            for (r, &k) in self.active.iter().enumerate() {
                d[r] += self.rates[k] * z[r];
            }
            d
        };
        let k1 = f(z, &w[0]);
        let k2 = f(&(z + &k1 * (0.5 * dt)), &w[1]);
        let k3 = f(&(z + &k2 * (0.5 * dt)), &w[1]);
        let k4 = f(&(z + &k3 * dt), &w[2]);
        z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
    }

    fn scatter(&self, active: &DVector<f64>, passive: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.rates.len());
        for (r, &k) in self.active.iter().enumerate() {
            full[k] = active[r];
        }
        for (r, &k) in self.passive.iter().enumerate() {
            full[k] = passive[r];
        }
        full
    }
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(invalid(format!("horizon {horizon} must be at least one step {dt}")));
    }
    let steps = (horizon / dt).round();
    if (steps * dt - horizon).abs() > 1e-9 * horizon {
        return Err(invalid(format!("horizon {horizon} is not a whole number of steps {dt}")));
    }
    Ok(steps as usize)
}

struct Recorder {
    factor: DMatrix<f64>,
    trajectory: ErrorTrajectory,
}

impl Recorder {
    fn new(basis: &ModalBasis, region: &BoundaryRegion, capacity: usize) -> Result<Self> {
        region.validate()?;
        Ok(Self {
            factor: trace_l2_factor(basis, region),
            trajectory: ErrorTrajectory {
                times: Vec::with_capacity(capacity),
                omega_norm: Vec::with_capacity(capacity),
                gamma_grad_norm: Vec::with_capacity(capacity),
            },
        })
    }

    fn push(&mut self, t: f64, e: &DVector<f64>) {
        self.trajectory.times.push(t);
        self.trajectory.omega_norm.push(e.norm());
        self.trajectory.gamma_grad_norm.push((&self.factor * e).norm());
    }
}

/// Runs the plant and the observer `ż = (A + cI)z + Bu + H(y − Cz)` together.
#[allow(clippy::too_many_arguments)]
pub fn simulate_observer(
    basis: &ModalBasis,
    sensors: &[SensorSpec],
    actuator: Option<&ActuatorSpec>,
    gain: &ObserverGain,
    region: &BoundaryRegion,
    x0: &ModalField,
    z0: &ModalField,
    control: &ControlSchedule,
    horizon: f64,
    dt: f64,
) -> Result<ObserverRun> {
    x0.check_basis(basis)?;
    z0.check_basis(basis)?;
    let steps = step_count(horizon, dt)?;
    let input = match actuator {
        Some(a) => input_vector(basis, a)?.into_coeffs(),
        None => DVector::zeros(basis.len()),
    };
    let split = Split::new(basis, sensors, gain, input)?;
    split.check_step(dt)?;
    let mut recorder = Recorder::new(basis, region, steps + 1)?;

    let all: Vec<usize> = (0..basis.len()).collect();
    let mut x = x0.coeffs().clone();
    let mut z_act = column(z0.coeffs(), &split.active);
    let mut z_pas = column(z0.coeffs(), &split.passive);

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut estimates = Vec::with_capacity(steps + 1);
    let mut record = |t: f64, x: &DVector<f64>, z: DVector<f64>, rec: &mut Recorder| -> Result<()> {
        rec.push(t, &(x - &z));
        times.push(t);
        states.push(ModalField::from_coeffs(basis, x.clone())?);
        estimates.push(ModalField::from_coeffs(basis, z)?);
        Ok(())
    };
    record(0.0, &x, split.scatter(&z_act, &z_pas), &mut recorder)?;

    for step in 0..steps {
        let t = step as f64 * dt;
        let u = control.value_at(t);
        let stage = |tau: f64| {
            let x_tau = split.exact(&all, &x, u, tau);
            let zp_tau = split.exact(&split.passive, &z_pas, u, tau);
            &split.c * x_tau - &split.c_passive * zp_tau
        };
        let w = [stage(0.0), stage(0.5 * dt), stage(dt)];
        z_act = split.rk4(&z_act, u, dt, &w);
        z_pas = split.exact(&split.passive, &z_pas, u, dt);
        x = split.exact(&all, &x, u, dt);
        record((step + 1) as f64 * dt, &x, split.scatter(&z_act, &z_pas), &mut recorder)?;
    }
    debug_assert_eq!(split.c.nrows(), sensors.len());
    Ok(ObserverRun {
        times,
        states,
        estimates,
        error: recorder.trajectory,
    })
}

/// Integrates `ė = (A + cI − HC)e` on its own, with the same split scheme.
pub fn error_dynamics_direct(
    basis: &ModalBasis,
    gain: &ObserverGain,
    sensors: &[SensorSpec],
    region: &BoundaryRegion,
    e0: &ModalField,
    horizon: f64,
    dt: f64,
) -> Result<ErrorRun> {
    e0.check_basis(basis)?;
    let steps = step_count(horizon, dt)?;
    let split = Split::new(basis, sensors, gain, DVector::zeros(basis.len()))?;
    split.check_step(dt)?;
    let mut recorder = Recorder::new(basis, region, steps + 1)?;

    let mut e_act = column(e0.coeffs(), &split.active);
    let mut e_pas = column(e0.coeffs(), &split.passive);
    let mut errors = Vec::with_capacity(steps + 1);
    let full = split.scatter(&e_act, &e_pas);
    recorder.push(0.0, &full);
    errors.push(ModalField::from_coeffs(basis, full)?);
    for step in 0..steps {
        let stage = |tau: f64| -(&split.c_passive * split.exact(&split.passive, &e_pas, 0.0, tau));
        let w = [stage(0.0), stage(0.5 * dt), stage(dt)];
        e_act = split.rk4(&e_act, 0.0, dt, &w);
        e_pas = split.exact(&split.passive, &e_pas, 0.0, dt);
        let full = split.scatter(&e_act, &e_pas);
        recorder.push((step + 1) as f64 * dt, &full);
        errors.push(ModalField::from_coeffs(basis, full)?);
    }
    Ok(ErrorRun {
        errors,
        trajectory: recorder.trajectory,
    })
}

/// Full-order estimate `x̂ = M y + N z` with `M = 0`, `N = I`.
pub fn estimate_output(gain: &ObserverGain, y: &DVector<f64>, z: &ModalField) -> Result<ModalField> {
    if y.len() != gain.sensor_count() {
        return Err(invalid(format!(
            "output has {} entries for a gain built on {} sensors",
            y.len(),
            gain.sensor_count()
        )));
    }
    Ok(z.clone())
}
