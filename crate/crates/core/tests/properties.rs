mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use regobs::analysis::{
    compare_internal_boundary, reconstruct_initial_gradient, strategic_test_gradient, target_factor, Target,
};
use regobs::observer::{
    design_gain_collocated, design_gain_pole_placement_seeded, error_dynamics_direct, simulate_observer,
    ControlSchedule,
};
use regobs::sensing::{
    adjoint_apply, observation_matrix, observe, output_matrix, output_row, output_row_with_points, time_weights,
    uniform_grid, OutputRecord, SensorSpec, Weight,
};
use regobs::spectral::{
    gradient_field_eval, gradient_trace, semigroup_apply, BoundaryRegion, Edge, ModalBasis, ModalField, Rect,
};

fn coeffs(n_max: usize) -> impl Strategy<Value = Vec<f64>> {
    let len = (n_max + 1) * (n_max + 1);
    prop::collection::vec(-1.0..1.0f64, len)
}

fn field(basis: &ModalBasis, c: Vec<f64>) -> ModalField {
    ModalField::from_coeffs(basis, DVector::from_vec(c)).unwrap()
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (0.02..0.98f64, 0.02..0.98f64).prop_map(|(a, b)| [a, b])
}

fn edge() -> impl Strategy<Value = Edge> {
    prop_oneof![Just(Edge::Bottom), Just(Edge::Top), Just(Edge::Left), Just(Edge::Right)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_law(c in coeffs(4), t in 0.0..1.0f64, s in 0.0..1.0f64) {
        let basis = ModalBasis::new(4).unwrap();
        let x = field(&basis, c);
        let once = semigroup_apply(&basis, &x, t + s).unwrap();
        let twice = semigroup_apply(&basis, &semigroup_apply(&basis, &x, t).unwrap(), s).unwrap();
        let gap = (once.coeffs() - twice.coeffs()).norm();
        prop_assert!(gap <= 1e-15 * x.norm().max(f64::MIN_POSITIVE), "gap {gap}");
    }

    #[test]
    fn free_flow_norm_is_nonincreasing(c in coeffs(3), t in 0.0..0.5f64, dt in 0.0..0.5f64) {
        let basis = ModalBasis::new(3).unwrap();
        let x = field(&basis, c);
        let a = semigroup_apply(&basis, &x, t).unwrap().norm();
        let b = semigroup_apply(&basis, &x, t + dt).unwrap().norm();
        prop_assert!(b <= a);
    }

    #[test]
    fn gradient_matches_central_differences(c in coeffs(4), p in point()) {
        let basis = ModalBasis::new(4).unwrap();
        let x = field(&basis, c);
        let h = 1e-4;
        let g = gradient_field_eval(&basis, &x, p).unwrap();
        let fd = [
            (x.eval(&basis, [p[0] + h, p[1]]).unwrap() - x.eval(&basis, [p[0] - h, p[1]]).unwrap()) / (2.0 * h),
            (x.eval(&basis, [p[0], p[1] + h]).unwrap() - x.eval(&basis, [p[0], p[1] - h]).unwrap()) / (2.0 * h),
        ];
        // natural gradient scale: Σ |a_k| α_k π (n + m)
        let scale: f64 = basis.modes().iter().enumerate()
            .map(|(k, mode)| x.coeffs()[k].abs() * basis.norm_factor(k) * std::f64::consts::PI * (mode.n + mode.m) as f64)
            .sum();
        for i in 0..2 {
            prop_assert!((g[i] - fd[i]).abs() <= 1e-5 * scale.max(1e-300), "{} vs {}", g[i], fd[i]);
        }
    }

    #[test]
    fn trace_agrees_with_pointwise_gradient(c in coeffs(4), edge in edge(), s in prop::collection::vec(0.0..=1.0f64, 50)) {
        let basis = ModalBasis::new(4).unwrap();
        let x = field(&basis, c);
        let region = BoundaryRegion::full(edge);
        let trace = gradient_trace(&basis, &x, &region).unwrap();
        for s in s {
            let g = gradient_field_eval(&basis, &x, edge.point(s)).unwrap();
            let (tangential, normal) = trace.eval(s);
            let (along, across) = if edge.is_horizontal() { (g[0], g[1]) } else { (g[1], g[0]) };
            prop_assert!((tangential - along).abs() <= 1e-10);
            prop_assert!((normal - edge.outward_sign() * across).abs() <= 1e-10);
            prop_assert!(normal.abs() <= 1e-14);
        }
    }

    #[test]
    fn observation_is_linear(a in coeffs(3), b in coeffs(3), s in -2.0..2.0f64, t in -2.0..2.0f64, p in point(), q in point()) {
        let basis = ModalBasis::new(3).unwrap();
        let sensors = vec![
            SensorSpec::pointwise("p", p),
            SensorSpec::Filament { id: "f".into(), start: p, end: q, weight: Weight::Constant { value: 1.0 } },
        ];
        let (x, z) = (field(&basis, a), field(&basis, b));
        let combo = ModalField::from_coeffs(&basis, x.coeffs() * s + z.coeffs() * t).unwrap();
        let lhs = observe(&basis, &combo, &sensors).unwrap();
        let rhs = observe(&basis, &x, &sensors).unwrap() * s + observe(&basis, &z, &sensors).unwrap() * t;
        prop_assert!((lhs - rhs).amax() <= 1e-13);
    }

    #[test]
    fn discrete_adjoint_identity(n_max in 1usize..4, q in 1usize..4, samples in 1usize..12, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(n_max).unwrap();
        let sensors = common::pointwise_sensors(&mut rng, q);
        let grid = uniform_grid(samples, 0.5);
        let a = common::random_field(&basis, &mut rng);
        let y = DMatrix::from_fn(samples, q, |i, j| ((i * 31 + j * 17 + seed as usize % 7) % 11) as f64 / 5.0 - 1.0);
        let record = OutputRecord::new(grid.clone(), y).unwrap();
        let o = observation_matrix(&basis, &sensors, &grid).unwrap();
        let w = time_weights(&grid);
        let mut wy = record.stacked();
        for (r, v) in wy.iter_mut().enumerate() {
            *v *= w[r / q];
        }
        let lhs = (o * a.coeffs()).dot(&wy);
        let rhs = a.coeffs().dot(adjoint_apply(&basis, &sensors, &grid, &record).unwrap().coeffs());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn zone_quadrature_is_converged(x0 in 0.0..0.6f64, y0 in 0.0..0.6f64, w in 0.05..0.4f64, h in 0.05..0.4f64, n_max in 1usize..=10) {
        let basis = ModalBasis::new(n_max).unwrap();
        let zone = SensorSpec::Zone {
            id: "z".into(),
            support: Rect::new([x0, x0 + w], [y0, y0 + h]).unwrap(),
            weight: Weight::CosProduct { a: 1.5, b: 0.5, origin: [0.1, 0.2], scale: 1.0 },
        };
        let base = output_row(&basis, &zone).unwrap();
        let fine = output_row_with_points(&basis, &zone, Some(32 * n_max)).unwrap();
        prop_assert!((base - fine).amax() < 1e-8);
    }

    #[test]
    fn symmetric_filament_misses_odd_columns(half in 0.05..0.45f64, y in 0.05..0.95f64, n_max in 1usize..=8) {
        let basis = ModalBasis::new(n_max).unwrap();
        let filament = SensorSpec::Filament {
            id: "f".into(),
            start: [0.5 - half, y],
            end: [0.5 + half, y],
            weight: Weight::CosProduct { a: 1.0, b: 1.0, origin: [0.5, y], scale: 1.0 },
        };
        let row = output_row(&basis, &filament).unwrap();
        for (k, mode) in basis.modes().iter().enumerate() {
            if mode.n % 2 == 1 {
                prop_assert!(row[k].abs() < 1e-10, "{mode}: {}", row[k]);
            }
        }
    }

    #[test]
    fn adding_a_sensor_keeps_a_true_verdict(seed in any::<u64>(), extra in point(), edge in edge()) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(3).unwrap();
        let grid = uniform_grid(2 * basis.len(), 1.0);
        let mut sensors = common::pointwise_sensors(&mut rng, 2);
        for target in [Target::OmegaGradient, Target::BoundaryGradient(BoundaryRegion::full(edge))] {
            let before = strategic_test_gradient(&basis, &sensors, &target, &grid).unwrap();
            let mut more = sensors.clone();
            more.push(SensorSpec::pointwise("extra", extra));
            let after = strategic_test_gradient(&basis, &more, &target, &grid).unwrap();
            prop_assert!(!before.strategic || after.strategic);
        }
        sensors.clear();
    }

    #[test]
    fn strip_verdict_implies_boundary_verdict(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(2).unwrap();
        let q = 1 + (seed % 3) as usize;
        let sensors: Vec<_> = (0..q).map(|i| common::random_sensor(&mut rng, i)).collect();
        let region = common::random_region(&mut rng);
        let r = 0.05 + (seed % 40) as f64 / 100.0;
        let cmp = compare_internal_boundary(&basis, &sensors, &region, r, &uniform_grid(18, 1.0)).unwrap();
        prop_assert!(cmp.implication_holds());
    }

    #[test]
    fn observability_constant_is_the_inverse_margin(seed in any::<u64>(), n_max in 1usize..=4, edge in edge()) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(n_max).unwrap();
        let sensors = common::pointwise_sensors(&mut rng, 3);
        let target = Target::BoundaryGradient(BoundaryRegion::full(edge));
        let grid = uniform_grid(basis.len(), 1.0);
        let verdict = strategic_test_gradient(&basis, &sensors, &target, &grid).unwrap();
        prop_assume!(verdict.strategic && verdict.margin > 1e-6);
        let t = target_factor(&basis, &target).unwrap();
        let g = common::grouped_output_map(&basis, &sensors);
        let k = common::observability_constant_oracle(&t, &g).unwrap();
        let reported = verdict.observability_constant();
        prop_assert!(reported.is_finite());
        prop_assert!(k <= 2.0 * reported && reported <= 2.0 * k, "oracle {k}, reported {reported}");
    }

    #[test]
    fn reconstruction_reproduces_the_record(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(3).unwrap();
        let sensors = common::pointwise_sensors(&mut rng, 3);
        let grid = uniform_grid(40, 1.0);
        let x0 = common::random_field(&basis, &mut rng);
        let forward = |x: &ModalField| {
            let rows: Vec<_> = grid.iter()
                .map(|&t| observe(&basis, &semigroup_apply(&basis, x, t).unwrap(), &sensors).unwrap().transpose())
                .collect();
            DMatrix::from_rows(&rows)
        };
        let y = forward(&x0);
        let record = OutputRecord::new(grid.clone(), y.clone()).unwrap();
        let rec = reconstruct_initial_gradient(&basis, &sensors, &BoundaryRegion::full(Edge::Top), &record).unwrap();
        let again = forward(&rec.initial_state);
        prop_assert!((again - &y).norm() <= 1e-8 * y.norm());
    }

    #[test]
    fn pole_placement_is_certified(seed in any::<u64>(), shift in 0.0..25.0f64, alpha in 0.2..5.0f64) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(3).unwrap();
        let sensors = common::pointwise_sensors(&mut rng, 2);
        if let Ok(gain) = design_gain_pole_placement_seeded(&basis, &sensors, shift, alpha, seed) {
            prop_assert!(gain.abscissa <= -0.9 * alpha);
        }
    }

    #[test]
    fn collocated_gain_is_certified(seed in any::<u64>(), rho in 0.1..10.0f64) {
        let mut rng = common::rng(seed);
        let basis = ModalBasis::new(3).unwrap();
        let sensors = common::pointwise_sensors(&mut rng, 1);
        let gain = design_gain_collocated(&basis, &sensors, 0.0, rho).unwrap();
        prop_assert!(gain.abscissa < 0.0);
        prop_assert!(gain.spectrum.iter().all(|z| z.im == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn error_ignores_the_input(seed in any::<u64>()) {
        let (case, _) = common::observer_case(seed);
        let run = |control: &ControlSchedule| simulate_observer(
            &case.basis, &case.sensors, Some(&case.actuator), &case.gain, &case.region,
            &case.x0, &case.z0, control, 0.5, 1e-3,
        ).unwrap();
        let a = run(&case.control);
        let b = run(&ControlSchedule::zero());
        for (u, v) in a.error.omega_norm.iter().zip(&b.error.omega_norm) {
            prop_assert!((u - v).abs() <= 1e-9 * u.max(1.0));
        }
    }

    #[test]
    fn zero_initial_error_is_invariant(seed in any::<u64>()) {
        let (case, _) = common::observer_case(seed);
        let run = simulate_observer(
            &case.basis, &case.sensors, Some(&case.actuator), &case.gain, &case.region,
            &case.x0, &case.x0, &case.control, 0.5, 1e-3,
        ).unwrap();
        prop_assert!(run.error.omega_norm.iter().all(|v| *v <= 1e-10));
        let direct = error_dynamics_direct(
            &case.basis, &case.gain, &case.sensors, &case.region, &ModalField::zeros(&case.basis), 0.5, 1e-3,
        ).unwrap();
        prop_assert!(direct.trajectory.omega_norm.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn h1_gram_is_the_identity() {
    let worst = common::h1_gram_deviation(&ModalBasis::new(10).unwrap(), 401);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn rank_report_matches_elimination_oracle() {
    let mut rng = common::rng(4);
    for n_max in 1..=4 {
        let basis = ModalBasis::new(n_max).unwrap();
        let groups = regobs::analysis::group_eigenvalues(&basis);
        for q in 1..=3 {
            let sensors = common::pointwise_sensors(&mut rng, q);
            let report = regobs::analysis::rank_condition(&basis, &sensors, &groups).unwrap();
            let c = output_matrix(&basis, &sensors).unwrap();
            for g in &report.groups {
                let oracle = common::elimination_rank(&c.select_columns(&g.group.positions), 1e-10);
                assert_eq!(g.rank, oracle);
            }
        }
    }
}
