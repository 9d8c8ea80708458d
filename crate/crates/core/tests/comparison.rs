//! Constructed bounds: certificates, constraint rejection, ordering against runs.

use neolith::comparison::{
    certify_escalating, certify_signs, eval_spec, super_pair_q_bound, super_pair_tau_bound, verify_ordering,
    LowerHSpec, SubPairSpec, SuperPairSpec, SuperSubSpec, Wedge,
};
use neolith::solver::{run, Grid1D, InitialSpec, SolverConfig};
use neolith::waves::{heat_solution_alpha, HeatProfileSpec};
use neolith::{Error, ModelParams};

fn super_pair(d_c: f64, c0: f64, c1: f64) -> SuperPairSpec {
    SuperPairSpec {
        d_c,
        c0,
        c1,
        q: 0.5 * super_pair_q_bound(d_c, c0, c1),
        tau: 0.5 * super_pair_tau_bound(d_c, c0, c1),
        b1: 1.0,
        a_coeff: 1.0,
    }
}

#[test]
fn super_pair_certificate_slow_diffusion() {
    let spec = SuperSubSpec::SuperPair(super_pair(0.5, 2.5, 3.2));
    let rep = certify_escalating(&spec, &Wedge::new(200.0, 2.5, 400.0).unwrap(), 1e-12, 1e4).unwrap();
    assert!(rep.pass, "{:?}", rep.violations.first());
    assert!(rep.samples > 0);
}

#[test]
fn q_beyond_bound_is_a_constraint_error() {
    let mut sp = super_pair(1.0, 1.0, 3.0);
    sp.q = 1.01 * super_pair_q_bound(1.0, 1.0, 3.0);
    let err = certify_signs(&SuperSubSpec::SuperPair(sp), &Wedge::new(10.0, 1.0, 20.0).unwrap(), 1e-12);
    assert!(matches!(err, Err(Error::Constraint(_))), "{err:?}");
}

#[test]
fn hunder_rejects_steep_rate() {
    let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
    let spec = LowerHSpec { params: m, f_amplitude: 3.0, c_amplitude: 3.0, h_amplitude: 2.0, eps: 0.1, lambda_h: 50.0 };
    let err = certify_signs(&SuperSubSpec::Hunder(spec), &Wedge::new(10.0, 1.0, 20.0).unwrap(), 1e-12);
    assert!(matches!(err, Err(Error::Constraint(_))));
}

#[test]
fn unit_diffusivity_super_pair_reduces_to_heat_flow() {
    let sp = super_pair(1.0, 1.0, 3.0);
    let heat = HeatProfileSpec::new(sp.b1, sp.q, 1.0).unwrap();
    for (t, x) in [(20.0, 3.0), (50.0, -12.0), (80.0, 40.0)] {
        let v = eval_spec(&SuperSubSpec::SuperPair(sp), t, x).unwrap();
        let u = v.get("u").unwrap().v;
        let expect = (1.0 - (-sp.tau * t).exp()) * heat_solution_alpha(t, x, &heat).unwrap();
        assert!((u / expect - 1.0).abs() < 1e-12, "({t}, {x}): {u} vs {expect}");
    }
}

#[test]
fn sub_pair_is_even() {
    let sb = SubPairSpec {
        d_c: 2.0,
        c0: 1.0,
        c1: 2.0 * 2f64.sqrt() + 1.0,
        b2: 0.5,
        gamma: 0.5,
        b4: 1.5,
        delta: 0.25,
        theta: 0.45,
        zeta0: 1.0,
        k: None,
        s: 1.0,
        gamma_h: 0.1,
        a_coeff: 1.0,
    };
    let spec = SuperSubSpec::SubPair(sb);
    for (t, x) in [(100.0, 7.5), (300.0, 210.0)] {
        let p = eval_spec(&spec, t, x).unwrap();
        let m = eval_spec(&spec, t, -x).unwrap();
        for (name, j) in &p.components {
            assert_eq!(j.v, m.get(name).unwrap().v, "{name} at ({t}, {x})");
        }
    }
}

#[test]
fn spec_parses_from_tagged_json() {
    let text = r#"{"kind": "SuperPair", "d_c": 1.0, "c0": 1.0, "c1": 3.0, "q": 0.1, "tau": 0.2, "B1": 2.0}"#;
    let spec: SuperSubSpec = serde_json::from_str(text).unwrap();
    match spec {
        SuperSubSpec::SuperPair(p) => assert_eq!((p.b1, p.a_coeff), (2.0, 1.0)),
        other => panic!("parsed {}", other.kind_name()),
    }
}

#[test]
fn empty_wedge_ordering_is_vacuous() {
    let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
    let spec = InitialSpec::default();
    let grid = Grid1D::sized_for(&spec, 2.0 * 2f64.sqrt(), 10.0, 0.1).unwrap();
    let rec = run(&m, &grid, &spec, &SolverConfig::with_snapshot_every(10.0, 5.0)).unwrap();
    let wedge = Wedge::new(60.0, 1.0, 60.0).unwrap();
    let rep = verify_ordering(&rec, &SuperSubSpec::SuperPair(super_pair(1.0, 1.0, 3.0)), &wedge).unwrap();
    assert!(rep.pass && rep.samples == 0 && rep.violation_count == 0);
}
