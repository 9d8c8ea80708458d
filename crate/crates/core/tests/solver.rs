//! End-to-end solver behaviour against closed forms and long-run properties.

use neolith::diagnostics::{estimate_speed, leading_edge_report, Field};
use neolith::model::derived_constants;
use neolith::solver::{run, scalar_kpp_run, FieldState, Grid1D, InitialSpec, SolverConfig, Stepper};
use neolith::waves::heat_kernel;
use neolith::ModelParams;

fn mp(a: f64, g: f64) -> ModelParams {
    ModelParams::new(a, 1.0, 1.0, g, 1.0, 1.0).unwrap()
}

#[test]
fn pure_diffusion_tracks_gaussian() {
    // F0 = G(t0, x) evolves into G(t0 + t, x) when reactions are off
    let (t0, t) = (2.0, 2.0);
    let g = Grid1D::centered(0.0, 30.0, 0.025).unwrap();
    let cfg = SolverConfig { dt: 1e-4, t_end: t, reaction: false, ..SolverConfig::default() };
    let mut st = FieldState::uniform(g.n, 0.0, 0.0, 1.0);
    for i in 0..g.n {
        st.f[i] = heat_kernel(t0, g.x(i)).unwrap();
    }
    let mut s = Stepper::new(&mp(1.0, 2.0), &g, &cfg).unwrap();
    for _ in 0..20_000 {
        s.step(&mut st).unwrap();
    }
    let sigma = (2.0 * (t0 + t)).sqrt();
    let mut worst: f64 = 0.0;
    for i in g.indices_within(2.0 * sigma) {
        let exact = heat_kernel(t0 + t, g.x(i)).unwrap();
        worst = worst.max((st.f[i] - exact).abs() / exact);
    }
    assert!(worst < 1e-4, "relative error {worst:e}");
}

#[test]
fn c_front_speed_at_t150() {
    let m = mp(1.0, 2.0);
    let spec = InitialSpec::default();
    let g = Grid1D::new(-600.0, 600.0, 12001).unwrap();
    let cfg = SolverConfig::with_snapshot_every(150.0, 5.0);
    let rec = run(&m, &g, &spec, &cfg).unwrap();
    let fs = rec.front(Field::C, 0.5).unwrap();
    let v = estimate_speed(fs, 100.0, 150.0).unwrap().slope;
    assert!((v / (2.0 * 2f64.sqrt()) - 1.0).abs() < 0.05, "speed {v}");
    assert!(rec.invariants.holds);

    let c_star = derived_constants(&m).unwrap().c_star;
    let le = leading_edge_report(&rec, 1.2 * c_star, 1.2 * 2.0, 150.0, 150.0).unwrap();
    assert!(le.final_sup_ch < 0.01, "sup C + |1-H| = {}", le.final_sup_ch);
    assert!(le.final_sup_f < 0.01, "sup F = {}", le.final_sup_f);
}

#[test]
fn identical_configs_give_identical_records() {
    let m = mp(3.0, 0.5);
    let spec = InitialSpec::default();
    let g = Grid1D::sized_for(&spec, 2.0 * 3f64.sqrt(), 30.0, 0.1).unwrap();
    let cfg = SolverConfig::with_snapshot_every(30.0, 10.0);
    let a = run(&m, &g, &spec, &cfg).unwrap();
    let b = run(&m, &g, &spec, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn kpp_speeds() {
    for (d, r) in [(1.0f64, 1.0f64), (4.0, 1.0)] {
        let target = 2.0 * (d * r).sqrt();
        let spec = InitialSpec::default();
        let g = Grid1D::sized_for(&spec, target, 150.0, 0.1).unwrap();
        let cfg = SolverConfig::with_snapshot_every(150.0, 150.0);
        let out = scalar_kpp_run(d, r, &g, &spec, &cfg).unwrap();
        let v = out.speed.unwrap().slope;
        assert!((v / target - 1.0).abs() < 0.03, "(d={d}, r={r}) speed {v}");
    }
}
