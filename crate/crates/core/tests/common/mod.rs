//! Independent oracles and scenario generators shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regobs::analysis::group_eigenvalues;
use regobs::observer::{design_gain_pole_placement_seeded, ControlSchedule, ObserverGain};
use regobs::sensing::{output_matrix, ActuatorSpec, SensorSpec, Weight};
use regobs::spectral::{BoundaryRegion, Edge, ModalBasis, ModalField, Rect};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn interior_point(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.random_range(0.03..0.97), rng.random_range(0.03..0.97)]
}

pub fn random_field(basis: &ModalBasis, rng: &mut ChaCha8Rng) -> ModalField {
    ModalField::from_coeffs(basis, DVector::from_fn(basis.len(), |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

pub fn pointwise_sensors(rng: &mut ChaCha8Rng, q: usize) -> Vec<SensorSpec> {
    (0..q)
        .map(|i| SensorSpec::pointwise(format!("s{i}"), interior_point(rng)))
        .collect()
}

/// Any of the three sensor kinds with random geometry.
pub fn random_sensor(rng: &mut ChaCha8Rng, id: usize) -> SensorSpec {
    let id = format!("s{id}");
    match rng.random_range(0..3) {
        0 => SensorSpec::pointwise(id, interior_point(rng)),
        1 => {
            let a = interior_point(rng);
            let b = interior_point(rng);
            SensorSpec::Filament {
                id,
                start: a,
                end: b,
                weight: Weight::Constant { value: 1.0 },
            }
        }
        _ => {
            let (x0, y0) = (rng.random_range(0.0..0.7), rng.random_range(0.0..0.7));
            let (w, h) = (rng.random_range(0.05..0.3), rng.random_range(0.05..0.3));
            SensorSpec::Zone {
                id,
                support: Rect::new([x0, x0 + w], [y0, y0 + h]).unwrap(),
                weight: Weight::CosProduct {
                    a: 1.0,
                    b: 2.0,
                    origin: [0.0, 0.0],
                    scale: 1.0,
                },
            }
        }
    }
}

pub fn random_region(rng: &mut ChaCha8Rng) -> BoundaryRegion {
    let edge = [Edge::Bottom, Edge::Top, Edge::Left, Edge::Right][rng.random_range(0..4)];
    if rng.random_bool(0.5) {
        BoundaryRegion::full(edge)
    } else {
        let a = rng.random_range(0.0..0.5);
        let b = rng.random_range(a + 0.1..1.0);
        BoundaryRegion::new(edge, a, b).unwrap()
    }
}

/// Rank by Gaussian elimination with full pivoting; a pivot counts when it
/// exceeds `rel_tol` times the largest entry of the matrix.
pub fn elimination_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut a = m.clone();
    let scale = a.amax();
    if scale == 0.0 {
        return 0;
    }
    let (rows, cols) = a.shape();
    let mut rank = 0;
    for step in 0..rows.min(cols) {
        let mut best = (step, step, 0.0);
        for i in step..rows {
            for j in step..cols {
                if a[(i, j)].abs() > best.2 {
                    best = (i, j, a[(i, j)].abs());
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        a.swap_rows(step, best.0);
        a.swap_columns(step, best.1);
        for i in step + 1..rows {
            let f = a[(i, step)] / a[(step, step)];
            for j in step..cols {
                let v = a[(step, j)];
                a[(i, j)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

/// Group-wise output map `a ↦ (G_i a_i)_i` as a dense matrix.
pub fn grouped_output_map(basis: &ModalBasis, sensors: &[SensorSpec]) -> DMatrix<f64> {
    let c = output_matrix(basis, sensors).unwrap();
    let q = c.nrows();
    let groups = group_eigenvalues(basis);
    let mut g = DMatrix::zeros(q * groups.len(), basis.len());
    for (gi, group) in groups.iter().enumerate() {
        for &k in &group.positions {
            for i in 0..q {
                g[(gi * q + i, k)] = c[(i, k)];
            }
        }
    }
    g
}

/// `max ‖T a‖ / ‖G a‖` through the Cholesky factor of `GᵀG`; needs `G` injective.
pub fn observability_constant_oracle(t: &DMatrix<f64>, g: &DMatrix<f64>) -> Option<f64> {
    let chol = (g.transpose() * g).cholesky()?;
    let l_inv = chol.l().try_inverse()?;
    let m = &l_inv * t.transpose() * t * l_inv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let top = sym.symmetric_eigenvalues().max();
    Some(top.max(0.0).sqrt())
}

/// A randomly drawn observer problem whose gain design succeeded.
pub struct ObserverCase {
    pub basis: ModalBasis,
    pub sensors: Vec<SensorSpec>,
    pub actuator: ActuatorSpec,
    pub gain: ObserverGain,
    pub region: BoundaryRegion,
    pub x0: ModalField,
    pub z0: ModalField,
    pub control: ControlSchedule,
}

/// Draws until a detectable configuration with a certified gain comes up.
pub fn observer_case(seed: u64) -> (ObserverCase, usize) {
    let mut r = rng(seed);
    let mut rejected = 0;
    loop {
        let basis = ModalBasis::new(r.random_range(2..=3)).unwrap();
        let q = r.random_range(1..=3);
        let sensors = pointwise_sensors(&mut r, q);
        let shift = r.random_range(0.0..3.0);
        let alpha = r.random_range(0.5..3.0);
        let design_seed = r.random();
        match design_gain_pole_placement_seeded(&basis, &sensors, shift, alpha, design_seed) {
            Ok(gain) => {
                let t1 = r.random_range(0.1..0.9);
                let control =
                    ControlSchedule::piecewise(vec![(0.0, r.random_range(-2.0..2.0)), (t1, r.random_range(-2.0..2.0))])
                        .unwrap();
                let case = ObserverCase {
                    actuator: ActuatorSpec {
                        location: interior_point(&mut r),
                    },
                    region: random_region(&mut r),
                    x0: random_field(&basis, &mut r),
                    z0: random_field(&basis, &mut r),
                    basis,
                    sensors,
                    gain,
                    control,
                };
                return (case, rejected);
            }
            Err(_) => rejected += 1,
        }
    }
}

/// Largest deviation of the H¹ Gram matrix from the identity, with the
/// trapezoid rule on `nodes` points per axis applied to closed-form cosines.
pub fn h1_gram_deviation(basis: &ModalBasis, nodes: usize) -> f64 {
    let xs: Vec<f64> = (0..nodes).map(|i| i as f64 / (nodes - 1) as f64).collect();
    let w: Vec<f64> = (0..nodes)
        .map(|i| if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 } / (nodes - 1) as f64)
        .collect();
    let pi = std::f64::consts::PI;
    let size = basis.n_max() + 1;
    let integral = |f: &dyn Fn(f64) -> f64| xs.iter().zip(&w).map(|(x, w)| w * f(*x)).sum::<f64>();
    let mut cc = DMatrix::zeros(size, size);
    let mut ss = DMatrix::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            let (fa, fb) = (a as f64, b as f64);
            cc[(a, b)] = integral(&|x| (fa * pi * x).cos() * (fb * pi * x).cos());
            ss[(a, b)] = integral(&|x| fa * fb * pi * pi * (fa * pi * x).sin() * (fb * pi * x).sin());
        }
    }
    let mut worst: f64 = 0.0;
    for (k, p) in basis.modes().iter().enumerate() {
        for (l, r) in basis.modes().iter().enumerate() {
            let value = cc[(p.n, r.n)] * cc[(p.m, r.m)] + ss[(p.n, r.n)] * cc[(p.m, r.m)] + cc[(p.n, r.n)] * ss[(p.m, r.m)];
            let g = basis.norm_factor(k) * basis.norm_factor(l) * value;
            let expected = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((g - expected).abs());
        }
    }
    worst
}

/// `max |∇x − central difference| / gradient scale` over random points and fields.
pub fn gradient_fd_deviation(basis: &ModalBasis, rng: &mut ChaCha8Rng, samples: usize) -> f64 {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = random_field(basis, rng);
        let p = [rng.random_range(0.02..0.98), rng.random_range(0.02..0.98)];
        let g = regobs::spectral::gradient_field_eval(basis, &x, p).unwrap();
        let fd = [
            (x.eval(basis, [p[0] + h, p[1]]).unwrap() - x.eval(basis, [p[0] - h, p[1]]).unwrap()) / (2.0 * h),
            (x.eval(basis, [p[0], p[1] + h]).unwrap() - x.eval(basis, [p[0], p[1] - h]).unwrap()) / (2.0 * h),
        ];
        let scale: f64 = basis
            .modes()
            .iter()
            .enumerate()
            .map(|(k, mode)| x.coeffs()[k].abs() * basis.norm_factor(k) * std::f64::consts::PI * (mode.n + mode.m) as f64)
            .sum();
        for i in 0..2 {
            worst = worst.max((g[i] - fd[i]).abs() / scale);
        }
    }
    worst
}
