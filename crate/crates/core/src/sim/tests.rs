use super::*;
use crate::analysis::Target;
use crate::sensing::SensorSpec;
use crate::spectral::ModeIndex;
use crate::Error;

fn load(text: &str) -> Scenario {
    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    value.as_object_mut().unwrap().remove("version");
    serde_json::from_value(value).unwrap()
}

fn counterexample() -> Scenario {
    load(include_str!("../../examples/counterexample_4_3.json"))
}

fn boundary() -> Scenario {
    load(include_str!("../../examples/boundary_4_3.json"))
}

fn sweep_template() -> Scenario {
    load(include_str!("../../examples/sweep_template.json"))
}

#[test]
fn counterexample_is_not_omega_strategic() {
    let mut s = counterexample();
    s.simulate = false;
    let r = run_scenario(&s).unwrap();
    assert!(!r.omega.strategic);
    assert!(r.omega.failing_modes.contains(&ModeIndex::new(1, 2)));
    assert_eq!(r.simulation, SimulationOutcome::Disabled);
}

#[test]
fn boundary_scenario_observer_converges() {
    let mut s = boundary();
    s.n_max = 5;
    s.time_grid.samples = 40;
    let r = run_scenario(&s).unwrap();
    let t = r.trajectory().unwrap();
    let last = *t.gamma_grad_norm.last().unwrap();
    assert!(last <= 1e-3 * t.gamma_grad_norm[0]);
    assert!(r.gain.unwrap().abscissa <= -1.8);
}

#[test]
fn replay_is_identical() {
    let mut s = load(include_str!("../../examples/detectability_shifted.json"));
    s.horizon = 0.2;
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a.scenario_hash, b.scenario_hash);
    assert_eq!(a.trajectory(), b.trajectory());
    assert_eq!(a.gain, b.gain);
    assert_eq!(a.verdicts(), b.verdicts());
}

#[test]
fn disabling_the_simulation_leaves_analysis_unchanged() {
    let mut s = load(include_str!("../../examples/detectability_shifted.json"));
    s.horizon = 0.1;
    let on = run_scenario(&s).unwrap();
    s.simulate = false;
    let off = run_scenario(&s).unwrap();
    assert_eq!(on.rank_report, off.rank_report);
    assert_eq!(on.detectability, off.detectability);
    assert_eq!(on.verdicts(), off.verdicts());
    assert_eq!(on.gain, off.gain);
    assert_ne!(on.scenario_hash, off.scenario_hash);
}

#[test]
fn infeasible_gain_still_reports_analysis() {
    let mut s = boundary();
    s.n_max = 3;
    s.time_grid.samples = 16;
    s.shift = 3.0 * std::f64::consts::PI.powi(2);
    let r = run_scenario(&s).unwrap();
    assert!(matches!(r.simulation, SimulationOutcome::GainFailed(Error::DesignInfeasible { .. })));
    assert!(r.gain.is_none());
    assert!(!r.detectability.detectable);
}

#[test]
fn validation_lists_every_problem() {
    let mut s = boundary();
    s.sensors.clear();
    s.dt = -1.0;
    s.omega_r = Some(2.0);
    s.x0 = FieldDescriptor::CosProduct { n: 30, m: 0, amplitude: 1.0 };
    match s.validate().unwrap_err() {
        Error::Validation(problems) => {
            for path in ["/sensors", "/dt", "/omega_r", "/x0"] {
                assert!(problems.iter().any(|p| p.starts_with(&format!("{path}:"))), "{path} in {problems:?}");
            }
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn duplicate_ids_and_bad_sensors_are_located() {
    let mut s = boundary();
    s.sensors.push(SensorSpec::pointwise("b", [1.5, 0.2]));
    let Error::Validation(problems) = s.validate().unwrap_err() else { panic!() };
    assert!(problems.iter().any(|p| p.starts_with("/sensors/1:")));
    assert!(problems.iter().any(|p| p.starts_with("/sensors/1/id:")));
}

#[test]
fn digest_tracks_content() {
    let a = boundary();
    let mut b = boundary();
    assert_eq!(a.digest(), b.digest());
    b.seed += 1;
    assert_ne!(a.digest(), b.digest());
    let back: Scenario = serde_json::from_str(&a.canonical_json()).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.canonical_json(), a.canonical_json());
}

#[test]
fn random_fields_depend_on_seed_and_stream() {
    let basis = crate::spectral::ModalBasis::new(2).unwrap();
    let d = FieldDescriptor::Random { scale: 1.0 };
    let a = d.resolve(&basis, 5, 1).unwrap();
    assert_eq!(a, d.resolve(&basis, 5, 1).unwrap());
    assert_ne!(a, d.resolve(&basis, 5, 2).unwrap());
    assert_ne!(a, d.resolve(&basis, 6, 1).unwrap());
    assert!(a.coeffs().amax() <= 1.0);
}

#[test]
fn sweep_hides_odd_modes_on_the_centre_line() {
    let template = sweep_template();
    let grid = cell_centres(9, 9).unwrap();
    let rows = run_sweep_with_threads(&template, &grid, Some(2)).unwrap();
    assert_eq!(rows.len(), 81);
    for row in &rows {
        if row.location[0] == 0.5 {
            assert!(!row.strategic, "{:?}", row.location);
            assert!(row.margin < 1e-6);
        }
    }
    assert!(rows.iter().any(|r| r.strategic));
    assert_eq!(rows[0].location, [1.0 / 18.0, 1.0 / 18.0]);
    assert_eq!(rows[1].location, [1.0 / 18.0, 3.0 / 18.0]);
}

#[test]
fn sweep_cell_agrees_with_scenario_run() {
    let template = sweep_template();
    let b = [0.23, 0.41];
    let row = run_sweep_with_threads(&template, &[b], Some(1)).unwrap()[0];
    let mut s = template.clone();
    s.sensors = swept_sensors(&template, b);
    let r = run_scenario(&s).unwrap();
    assert_eq!(row.strategic, r.gamma.strategic);
    assert_eq!(row.margin, r.gamma.margin);
    assert!(row.strategic && row.margin > 1e-6);
    assert_eq!(r.gamma.target, Target::BoundaryGradient(s.region).label());
}

#[test]
fn degenerate_sweeps_are_rejected() {
    assert!(cell_centres(0, 3).is_err());
    assert!(run_sweep_with_threads(&sweep_template(), &[], None).is_err());
    assert_eq!(cell_centres(1, 1).unwrap(), vec![[0.5, 0.5]]);
}
