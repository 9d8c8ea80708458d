use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module<R>(f: impl FnOnce(Python<'_>, &Bound<'_, PyModule>) -> R) -> R {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "pyneolith").unwrap();
        pyneolith::pyneolith(&m).unwrap();
        f(py, &m)
    })
}

#[test]
fn module_exports() {
    with_module(|_, m| {
        for name in ["ModelParams", "Record", "simulate", "traveling_wave", "ode_trajectory", "lyapunov", "certify", "kpp_speed"] {
            assert!(m.hasattr(name).unwrap(), "{name}");
        }
    });
}

#[test]
fn params_and_derived_constants() {
    with_module(|py, m| {
        let kw = PyDict::new(py);
        kw.set_item("g", 0.5).unwrap();
        let p = m.getattr("ModelParams").unwrap().call((3.0,), Some(&kw)).unwrap();
        assert_eq!(p.call_method0("figure").unwrap().extract::<Option<u8>>().unwrap(), Some(3));
        let d = p.call_method0("derived").unwrap();
        let c_star: f64 = d.get_item("c_star").unwrap().extract().unwrap();
        assert!((c_star - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!(m.getattr("ModelParams").unwrap().call1((0.0,)).is_err());
    });
}

#[test]
fn simulate_and_read_back() {
    with_module(|py, m| {
        let p = m.getattr("ModelParams").unwrap().call1((1.0,)).unwrap();
        let kw = PyDict::new(py);
        kw.set_item("snapshot_interval", 5.0).unwrap();
        let rec = m.getattr("simulate").unwrap().call((p, 10.0), Some(&kw)).unwrap();
        assert_eq!(rec.len().unwrap(), 3);
        let (t, f, _c, h): (f64, Vec<f64>, Vec<f64>, Vec<f64>) = rec.call_method1("snapshot", (-1,)).unwrap().extract().unwrap();
        assert_eq!(t, 10.0);
        assert!(f.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
        assert!(h.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(rec.call_method1("snapshot", (7,)).is_err());
        let inv = rec.getattr("invariants").unwrap();
        assert!(inv.get_item("holds").unwrap().extract::<bool>().unwrap());
    });
}

#[test]
fn wave_and_certificate() {
    with_module(|_, m| {
        let w = m.getattr("traveling_wave").unwrap().call1((1.0, 3.0)).unwrap();
        let l1: f64 = w.get_item("lambda1").unwrap().extract().unwrap();
        assert!((l1 - 0.302776).abs() < 1e-6);
        let bad = r#"{"kind": "SuperPair", "d_c": 0.5, "c0": 2.5, "c1": 3.2, "q": 5.0, "tau": 0.05, "B1": 1.0}"#;
        let err = m.getattr("certify").unwrap().call1((bad, 200.0, 2.5, 400.0)).unwrap_err();
        assert!(err.to_string().contains("q"), "{err}");
    });
}
