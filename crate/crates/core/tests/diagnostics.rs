//! Diagnostics on full-length runs: final zone, decay, Lyapunov mean, fronts.

use std::sync::OnceLock;

use rayon::prelude::*;

use neolith::diagnostics::{
    estimate_speed, exponential_decay_check, final_zone_report, fit_bump, fit_log_correction, lyapunov_series,
    zone_stats, DecayQuantity, Field,
};
use neolith::model::derived_constants;
use neolith::solver::{run, Grid1D, InitialSpec, SimulationRecord, SolverConfig};
use neolith::ModelParams;

const T: f64 = 300.0;

fn quadruple() -> &'static Vec<SimulationRecord> {
    static RUNS: OnceLock<Vec<SimulationRecord>> = OnceLock::new();
    RUNS.get_or_init(|| {
        [(3.0, 2.0), (1.0, 2.0), (3.0, 0.5), (1.0, 0.5)]
            .par_iter()
            .map(|&(a, g)| {
                let m = ModelParams::new(a, 1.0, 1.0, g, 1.0, 1.0).unwrap();
                let spec = InitialSpec::default();
                let c_star = derived_constants(&m).unwrap().c_star;
                let grid = Grid1D::sized_for(&spec, c_star, T, 0.1).unwrap();
                run(&m, &grid, &spec, &SolverConfig::with_snapshot_every(T, 5.0)).unwrap()
            })
            .collect()
    })
}

fn by(a: f64, g: f64) -> &'static SimulationRecord {
    quadruple().iter().find(|r| r.params.a == a && r.params.g == g).unwrap()
}

#[test]
fn convert_led_high_conversion_final_zone() {
    let rec = by(1.0, 2.0);
    let c_star = derived_constants(&rec.params).unwrap().c_star;
    let z = zone_stats(rec.final_state().unwrap(), &rec.grid, &rec.params, 0.7 * c_star);
    assert!(z.sup_abs_c_minus_1 < 0.05, "{}", z.sup_abs_c_minus_1);
    assert!(z.sup_h < 0.05 && z.sup_f < 0.05, "{} {}", z.sup_h, z.sup_f);
    let rep = final_zone_report(rec, 2.0, 250.0, T, 0.05).unwrap();
    assert!(rep.verdicts.iter().all(|v| v.value.is_finite()));
}

#[test]
fn convert_led_low_conversion_final_zone() {
    let rec = by(1.0, 0.5);
    let c_star = derived_constants(&rec.params).unwrap().c_star;
    let z = zone_stats(rec.final_state().unwrap(), &rec.grid, &rec.params, 0.7 * c_star);
    assert!(z.sup_abs_c_minus_ceq.unwrap() < 0.05);
    assert!(z.sup_abs_h_minus_heq.unwrap() < 0.05);
    let rep = final_zone_report(rec, 2.0, 250.0, T, 0.05).unwrap();
    assert!(rep.pass, "{:?}", rep.verdicts);
}

#[test]
fn hair_trigger_and_h_ceiling_hold_for_every_run() {
    for rec in quadruple() {
        let m = rec.params;
        let c_star = derived_constants(&m).unwrap().c_star;
        let z = zone_stats(rec.final_state().unwrap(), &rec.grid, &m, 0.5 * c_star);
        assert!(z.inf_fc >= 0.95, "a={} g={}: inf(F+C) = {}", m.a, m.g, z.inf_fc);
        assert!(z.sup_h <= (1.0 - m.g).max(0.0) + 0.05, "a={} g={}: sup H = {}", m.a, m.g, z.sup_h);
    }
}

#[test]
fn speed_sandwich_and_farmer_containment() {
    for rec in quadruple() {
        let m = rec.params;
        let dc = derived_constants(&m).unwrap();
        let v_c = estimate_speed(rec.front(Field::C, 0.5).unwrap(), 200.0, T).unwrap().slope;
        assert!(v_c >= 0.95 * dc.c_star && v_c <= 1.02 * dc.c_star, "a={} g={}: {v_c}", m.a, m.g);
        if let Ok(f) = estimate_speed(rec.front(Field::F, 0.5).unwrap(), 200.0, T) {
            assert!(f.slope <= v_c.max(1.02 * dc.c_f) + 1e-12, "F front {} outruns", f.slope);
        }
    }
}

#[test]
fn hunter_density_decays_exponentially() {
    let rec = by(1.0, 2.0);
    let d = exponential_decay_check(rec, DecayQuantity::H, 1.0, 100.0, T).unwrap();
    assert!(d.fit.slope < -0.05, "slope {}", d.fit.slope);
}

#[test]
fn lyapunov_mean_vanishes_at_coexistence() {
    for (a, g) in [(1.0, 0.5), (3.0, 0.5)] {
        let rec = by(a, g);
        let ls = lyapunov_series(rec, 2.0, 150.0, T).unwrap();
        let last = ls.series.last().unwrap().1;
        assert!(last < 0.01, "a={a}: {last}");
    }
}

#[test]
fn fits_are_idempotent() {
    let rec = by(1.0, 2.0);
    assert_eq!(fit_bump(rec, 75.0, T, 0.1).unwrap(), fit_bump(rec, 75.0, T, 0.1).unwrap());
    let fs = rec.front(Field::C, 0.5).unwrap();
    let c = 2.0 * 2f64.sqrt();
    assert_eq!(fit_log_correction(fs, c, 100.0, T).unwrap(), fit_log_correction(fs, c, 100.0, T).unwrap());
    assert_eq!(final_zone_report(rec, 2.0, 250.0, T, 0.05).unwrap(), final_zone_report(rec, 2.0, 250.0, T, 0.05).unwrap());
}
