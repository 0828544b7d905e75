use revivals_core::oracle::{run_oracle, OracleSetup};
use revivals_core::spectra::PowerLawSystem;
use revivals_core::Time;

fn quartic_setup(n_points: usize) -> OracleSetup {
    let sys = PowerLawSystem::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
    let mut setup = OracleSetup::new(sys, 10.0, 1.0);
    setup.n_points = n_points;
    setup
}

#[test]
fn classical_period_is_stable_under_grid_refinement() {
    let mut coarse = quartic_setup(1024);
    let probe = run_oracle(&{
        let mut s = coarse.clone();
        s.t_end = Some(1.0);
        s
    })
    .unwrap();
    let t_end = 10.0 * probe.predicted_cl;
    coarse.t_end = Some(t_end);
    coarse.dt = Some(probe.dt);
    let mut fine = quartic_setup(2048);
    fine.t_end = Some(t_end);
    fine.dt = Some(0.5 * probe.dt);

    let a = run_oracle(&coarse).unwrap();
    let b = run_oracle(&fine).unwrap();
    let (ta, tb) = (a.estimate.classical_period.unwrap(), b.estimate.classical_period.unwrap());
    assert!(((ta - tb) / tb).abs() < 5e-3, "{ta} vs {tb}");
    assert!(a.classical_error.unwrap().abs() < 1e-2);
    assert!(a.max_norm_drift < 1e-10 && b.max_norm_drift < 1e-10);
}

#[test]
fn driven_short_run_follows_rotating_frame_period() {
    let sys = PowerLawSystem::new(61643.076, 1.0, 4.0, 2000.0, 1.0).unwrap();
    let mut setup = OracleSetup::new(sys, 20.0, 1.0).with_drive(0.05, 1);
    setup.n_points = 1024;
    setup.t_end = Some(200.0);
    let rep = run_oracle(&setup).unwrap();
    assert_eq!(rep.frame_frequency, 1.0);
    assert!(rep.perturbative);
    assert!(matches!(rep.predicted_q, Time::Finite(t) if t > 600.0));
    let err = rep.classical_error.expect("classical period resolved");
    assert!(err.abs() < 0.05, "{err}");
    assert!(rep.estimate.revival_time.is_none());
}
