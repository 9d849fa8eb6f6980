use qtbattery::dynamics::{effective_battery_generator, propagate, uniform_grid};
use qtbattery::observables::{energy, ergotropy, thermal_state};
use qtbattery::presets::{reference_charger, GAMMA_EG};
use qtbattery::protocol::{charge, optimal_coupling, quench_coupling_ho, rate_landscape, saturation_time, ChargePlan, Engine};
use qtbattery::{BatteryModel, ChargerParams, DensityMatrix, Error, StateRecord, Tolerances};

fn plan(engine: Engine, horizon_gamma_eg_t: f64, points: usize, quench_times: Vec<f64>) -> ChargePlan {
    ChargePlan {
        engine,
        t_grid: uniform_grid(horizon_gamma_eg_t / GAMMA_EG, points).unwrap(),
        quench_times: quench_times.into_iter().map(|t| t / GAMMA_EG).collect(),
        tolerances: Tolerances::default(),
    }
}

fn optimal(b: &BatteryModel, drive: f64, leakage: bool) -> ChargerParams {
    let c = reference_charger(1.0, drive, leakage).unwrap();
    c.with_coupling(optimal_coupling(b, &c, 0).unwrap()).unwrap()
}

#[test]
fn weak_drive_full_run_tracks_effective_run() {
    let b = BatteryModel::uniform_ladder(6, 1.0).unwrap();
    let c = optimal(&b, 0.02, false);
    let rho0 = DensityMatrix::pure_level(7, 0).unwrap();
    let full = charge(&b, &c, &rho0, &plan(Engine::Full, 2000.0, 41, vec![])).unwrap().trajectory;
    let eff = charge(&b, &c, &rho0, &plan(Engine::Effective, 2000.0, 41, vec![])).unwrap().trajectory;
    let worst = full.stored_energy().iter().zip(eff.stored_energy()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst / 6.0 < 0.01, "deviation {worst}");
    // The charger stays close to its ground level throughout.
    assert!(full.qutrit_ground().unwrap().iter().all(|&p| p >= 0.9));
    assert!(eff.qutrit_ground().is_none());
}

#[test]
fn full_run_from_ground_keeps_battery_diagonal() {
    let b = BatteryModel::large_spin(4, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = DensityMatrix::pure_level(5, 0).unwrap();
    let tr = charge(&b, &c, &rho0, &plan(Engine::Full, 300.0, 7, vec![])).unwrap().trajectory;
    match tr.states() {
        StateRecord::Dense(states) => assert!(states.iter().all(|s| s.matrix().offdiag_max() < 1e-12)),
        StateRecord::Diagonal(_) => panic!("full runs keep dense states"),
    }
}

#[test]
fn zero_horizon_yields_the_initial_sample() {
    let b = BatteryModel::truncated_ho(5, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = thermal_state(&b, 1.0).unwrap();
    for engine in [Engine::Full, Engine::Effective] {
        let tr = charge(&b, &c, &rho0, &plan(engine, 0.0, 10, vec![])).unwrap().trajectory;
        assert_eq!(tr.times(), &[0.0]);
        assert_eq!(tr.stored_energy(), &[0.0]);
        assert!((tr.ergotropy()[0] - ergotropy(&rho0, &b).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn quenched_run_matches_manual_restart() {
    let b = BatteryModel::truncated_ho(12, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = DensityMatrix::pure_level(13, 0).unwrap();
    let tau = 200.0 / GAMMA_EG;
    let run = charge(&b, &c, &rho0, &plan(Engine::Effective, 600.0, 7, vec![200.0])).unwrap();

    let tol = Tolerances::default();
    let first = propagate(&effective_battery_generator(&b, &c).unwrap(), &rho0, &[0.0, tau], tol).unwrap();
    let mid = first.last_state();
    let g = quench_coupling_ho(&c, energy(&mid, &b).unwrap()).unwrap();
    let quenched = c.with_coupling(g).unwrap();
    let second = propagate(&effective_battery_generator(&b, &quenched).unwrap(), &mid, &[0.0, 2.0 * tau], tol).unwrap();

    let expected = second.states.populations(1);
    let got = run.trajectory.populations().last().unwrap();
    let diff = expected.iter().zip(got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
    assert_eq!(run.schedule.segments().len(), 2);
    assert!((run.schedule.segments()[1].1 / g - 1.0).abs() < 1e-6);
    assert_eq!(run.schedule.coupling_at(tau * 1.5), run.schedule.segments()[1].1);
}

#[test]
fn quench_boundaries_are_not_reported() {
    let b = BatteryModel::truncated_ho(8, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = DensityMatrix::pure_level(9, 0).unwrap();
    let run = charge(&b, &c, &rho0, &plan(Engine::Effective, 1000.0, 11, vec![150.0, 5000.0])).unwrap();
    assert_eq!(run.trajectory.len(), 11);
    assert_eq!(run.schedule.quench_times().len(), 1);
}

#[test]
fn quenches_are_rejected_for_other_batteries() {
    let b = BatteryModel::uniform_ladder(4, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = DensityMatrix::pure_level(5, 0).unwrap();
    let err = charge(&b, &c, &rho0, &plan(Engine::Effective, 100.0, 5, vec![50.0])).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { name: "quench_times", .. }));

    let ho = BatteryModel::truncated_ho(4, 1.0).unwrap();
    let err = charge(&ho, &c, &rho0, &plan(Engine::Effective, 100.0, 5, vec![60.0, 50.0])).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter { name: "quench_times", .. }));
}

#[test]
fn saturation_reports_threshold_and_quench_position() {
    let b = BatteryModel::truncated_ho(10, 1.0).unwrap();
    let c = optimal(&b, 0.1, true);
    let rho0 = DensityMatrix::pure_level(11, 0).unwrap();
    let run = charge(&b, &c, &rho0, &plan(Engine::Effective, 4000.0, 401, vec![100.0])).unwrap();
    let rep = saturation_time(&run.trajectory, &b, 0.99, &run.schedule).unwrap();
    assert!((rep.threshold - 9.9).abs() < 1e-12);
    assert!(!rep.pre_quench);
    assert!(rep.time > 100.0 / GAMMA_EG);

    let short = charge(&b, &c, &rho0, &plan(Engine::Effective, 10.0, 3, vec![])).unwrap();
    assert!(matches!(saturation_time(&short.trajectory, &b, 0.99, &short.schedule), Err(Error::ThresholdNotReached { .. })));
}

#[test]
fn landscape_peaks_at_the_optimal_coupling() {
    let b = BatteryModel::large_spin(10, 1.0).unwrap();
    let c = reference_charger(1.0, 0.1, true).unwrap();
    let couplings: Vec<f64> = (0..400).map(|i| 1e-4 * 1.02f64.powi(i)).collect();
    let rows = rate_landscape(&b, &c, &couplings).unwrap();
    for n in 0..b.top_level() {
        let column: Vec<f64> = rows.iter().map(|r| r[n]).collect();
        let best = (0..couplings.len()).max_by(|&i, &j| column[i].total_cmp(&column[j])).unwrap();
        let g_opt = optimal_coupling(&b, &c, n).unwrap();
        assert!((couplings[best] / g_opt).ln().abs() <= 1.02f64.ln(), "level {n}");
    }
}
