use kinetic_flows::flow::{
    refinement_rate, shifted_run_distance, stability_experiment, stationarity_check,
    time_lipschitz_check, time_lipschitz_error,
};
use kinetic_flows::{InitialLaw, ModelSpec};

fn gaussian(dim: usize, n: usize, seed: u64) -> kinetic_flows::EmpiricalMeasure {
    InitialLaw::standard_gaussian(dim).sample(n, seed).unwrap()
}

#[test]
fn late_start_matches_early_start_in_law() {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let rho0 = gaussian(1, 10_000, 1);
    let report = stationarity_check(&model, &rho0, 3.7, 0.5, 10, 10_000, 4, 2).unwrap();
    assert!(report.pass, "{report:?}");

    let init = gaussian(1, 500, 3);
    assert_eq!(shifted_run_distance(&model, &init, 0.0, 7, 0.0, 7, 0.5, 5).unwrap(), 0.0);
}

#[test]
fn flow_is_lipschitz_in_time() {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let rho0 = gaussian(1, 10_000, 4);
    let h_list = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let report = time_lipschitz_check(&model, &rho0, 0.5, &h_list, 10_000, 5).unwrap();
    assert!((0.7..=1.3).contains(&report.rate.slope), "{report:?}");
    for &(h, e) in &report.rate.pairs {
        assert!(e <= 2.0 * report.constant * h, "h={h}: {e} > 2 * {} * h", report.constant);
    }
    let (zero, _) = time_lipschitz_error(&model, &gaussian(1, 100, 6), 0.5, 5, 0.0, 7).unwrap();
    assert_eq!(zero, 0.0);
}

#[test]
fn boltzmann_refinement_has_first_order_rate() {
    let model = ModelSpec::boltzmann3d(0.5, 0.5, 2.0, 0.2);
    let rho0 = gaussian(3, 1000, 8);
    let report = refinement_rate(&model, &rho0, 1.0, &[2, 4, 8, 16, 32], 1000, 4, 9).unwrap();
    assert!((-1.4..=-0.6).contains(&report.slope), "{report:?}");
}

#[test]
fn synthetic_shift_stays_inside_the_stability_envelope() {
    let model = ModelSpec::synthetic(0.5, 1.0);
    let rho = gaussian(1, 5000, 10);
    let xi = rho.translated(&[0.5]).unwrap();
    let report = stability_experiment(&model, &rho, &xi, 1.0, 20, 5000, 11).unwrap();
    assert!(report.pass && report.lhs <= report.rhs, "{report:?}");
    let same = stability_experiment(&model, &rho, &rho, 1.0, 20, 5000, 11).unwrap();
    assert_eq!(same.lhs, 0.0);
}
