//! Run directories written to disk reload into the same record.

use std::fs;

use neolith::diagnostics::final_zone_report;
use neolith::io::{load_record, save_record, Manifest, FRONTS_FILE, SNAPSHOTS_FILE};
use neolith::model::derived_constants;
use neolith::solver::{run, Grid1D, InitialSpec, SolverConfig};
use neolith::ModelParams;

#[test]
fn saved_run_reloads_and_reports_identically() {
    let m = ModelParams::new(1.0, 1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
    let spec = InitialSpec::default();
    let dc = derived_constants(&m).unwrap();
    let grid = Grid1D::sized_for(&spec, dc.c_star, 40.0, 0.1).unwrap();
    let rec = run(&m, &grid, &spec, &SolverConfig::with_snapshot_every(40.0, 10.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let man = Manifest::for_record(&rec, dc, serde_json::json!({"model": {"g": 0.5}}), 0.0);
    save_record(dir.path(), &rec, &man).unwrap();
    let (back, man2) = load_record(dir.path()).unwrap();
    assert_eq!(back, rec);
    assert_eq!(man2.derived, dc);
    assert_eq!(
        final_zone_report(&back, 2.0, 30.0, 40.0, 0.05).unwrap(),
        final_zone_report(&rec, 2.0, 30.0, 40.0, 0.05).unwrap()
    );
}

#[test]
fn rewriting_is_byte_identical() {
    let m = ModelParams::new(3.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
    let spec = InitialSpec::default();
    let grid = Grid1D::sized_for(&spec, 2.0 * 3f64.sqrt(), 10.0, 0.1).unwrap();
    let cfg = SolverConfig::with_snapshot_every(10.0, 5.0);
    let dc = derived_constants(&m).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let rec = run(&m, &grid, &spec, &cfg).unwrap();
        save_record(d.path(), &rec, &Manifest::for_record(&rec, dc, serde_json::Value::Null, 0.0)).unwrap();
    }
    for f in [SNAPSHOTS_FILE, FRONTS_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_record(&dir.path().join("absent")).unwrap_err();
    assert!(matches!(err, neolith::Error::Io(_)), "{err}");
}
