//! Python bindings. Structured results cross as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use neolith::comparison::{certify_escalating, SuperSubSpec, Wedge};
use neolith::diagnostics::{final_zone_report, Field};
use neolith::io::{load_record, save_record, Manifest};
use neolith::model::{self, CRITICAL_TOL, DEFAULT_ODE_DT};
use neolith::solver::{self, snapshot_grid, Grid1D, InitialSpec, SolverConfig};
use neolith::waves::{solve_traveling_wave, DEFAULT_WAVE_TOL};

fn to_py(e: neolith::Error) -> PyErr {
    match e {
        neolith::Error::NumericalInstability { .. } => PyArithmeticError::new_err(e.to_string()),
        neolith::Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serialize through JSON into native Python objects.
fn to_object<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_json<T: for<'de> serde::Deserialize<'de>>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Dimensionless parameters `(a, b, s, g, d_c, d_h)`.
#[pyclass(name = "ModelParams", module = "pyneolith", from_py_object)]
#[derive(Clone, Copy)]
pub struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (a, b=1.0, s=1.0, g=2.0, d_c=1.0, d_h=1.0))]
    fn new(a: f64, b: f64, s: f64, g: f64, d_c: f64, d_h: f64) -> PyResult<Self> {
        Ok(PyModelParams { inner: model::ModelParams::new(a, b, s, g, d_c, d_h).map_err(to_py)? })
    }

    /// From the nine dimensional parameters, keyed `D_f, D_c, D_h, r_f, r_c, r_h, K, L, e`.
    #[staticmethod]
    fn from_original(py: Python<'_>, original: Py<PyAny>) -> PyResult<Self> {
        let text: String = py.import("json")?.call_method1("dumps", (original,))?.extract()?;
        let orig: model::OriginalParams = from_json(&text)?;
        Ok(PyModelParams { inner: model::nondimensionalize(&orig).map_err(to_py)? })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }
    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }
    #[getter]
    fn d_c(&self) -> f64 {
        self.inner.d_c
    }
    #[getter]
    fn d_h(&self) -> f64 {
        self.inner.d_h
    }

    /// Speeds, equilibria and regime inputs.
    fn derived(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &model::derived_constants(&self.inner).map_err(to_py)?)
    }

    fn regime(&self) -> String {
        model::classify_regime(&self.inner, CRITICAL_TOL).to_string()
    }

    /// Regime number 1 to 4, `None` for critical cases.
    fn figure(&self) -> Option<u8> {
        model::classify_regime(&self.inner, CRITICAL_TOL).figure()
    }

    fn __repr__(&self) -> String {
        let m = self.inner;
        format!("ModelParams(a={}, b={}, s={}, g={}, d_c={}, d_h={})", m.a, m.b, m.s, m.g, m.d_c, m.d_h)
    }
}

/// Snapshots and front series of one simulation.
#[pyclass(name = "Record", module = "pyneolith")]
pub struct PyRecord {
    inner: solver::SimulationRecord,
}

#[pymethods]
impl PyRecord {
    #[getter]
    fn params(&self) -> PyModelParams {
        PyModelParams { inner: self.inner.params }
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.snapshots.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        let g = self.inner.grid;
        (0..g.n).map(|i| g.x(i)).collect()
    }

    /// `(t, F, C, H)` of snapshot `index` (negative counts from the end).
    fn snapshot(&self, index: isize) -> PyResult<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = self.inner.snapshots.len() as isize;
        let i = if index < 0 { n + index } else { index };
        let s = usize::try_from(i)
            .ok()
            .and_then(|i| self.inner.snapshots.get(i))
            .ok_or_else(|| PyValueError::new_err(format!("snapshot index {index} out of range ({n} snapshots)")))?;
        Ok((s.t, s.f.clone(), s.c.clone(), s.h.clone()))
    }

    /// `[(t, x_front or None)]` for `field` in `F`, `C`, `H` (H tracks `1-H`), `F+C`.
    #[pyo3(signature = (field, level=0.5))]
    fn front(&self, field: &str, level: f64) -> PyResult<Vec<(f64, Option<f64>)>> {
        let f = Field::parse(field).map_err(to_py)?;
        self.inner
            .front(f, level)
            .map(|fs| fs.samples.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no {field} front at level {level}")))
    }

    #[getter]
    fn invariants(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_object(py, &self.inner.invariants)
    }

    /// Regime verdicts over `|x| <= zone_fraction * c_star * t` for `t` in the late window.
    #[pyo3(signature = (zone_fraction=0.5, window_start=2.0/3.0, tolerance=0.05))]
    fn final_zone_report(&self, py: Python<'_>, zone_fraction: f64, window_start: f64, tolerance: f64) -> PyResult<Py<PyAny>> {
        let d = model::derived_constants(&self.inner.params).map_err(to_py)?;
        let t_end = self.inner.config.t_end;
        let r = final_zone_report(&self.inner, zone_fraction * d.c_star, window_start * t_end, t_end, tolerance)
            .map_err(to_py)?;
        to_object(py, &r)
    }

    /// Write `snapshots.csv`, `fronts.csv` and `manifest.json` into `dir`.
    fn save(&self, dir: PathBuf) -> PyResult<()> {
        let d = model::derived_constants(&self.inner.params).map_err(to_py)?;
        let man = Manifest::for_record(&self.inner, d, serde_json::Value::Null, 0.0);
        save_record(&dir, &self.inner, &man).map_err(to_py)?;
        Ok(())
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(PyRecord { inner: load_record(&dir).map_err(to_py)?.0 })
    }

    fn __len__(&self) -> usize {
        self.inner.snapshots.len()
    }
}

/// Integrate from the default indicator start on a domain sized for `t_end`.
#[pyfunction]
#[pyo3(signature = (params, t_end, dx=0.1, dt=0.02, snapshot_interval=5.0, half_width=None))]
fn simulate(
    py: Python<'_>,
    params: PyModelParams,
    t_end: f64,
    dx: f64,
    dt: f64,
    snapshot_interval: f64,
    half_width: Option<f64>,
) -> PyResult<PyRecord> {
    let m = params.inner;
    let spec = InitialSpec::default();
    let c_star = model::derived_constants(&m).map_err(to_py)?.c_star;
    let grid = match half_width {
        Some(hw) => {
            let g = Grid1D::centered(0.0, hw, dx).map_err(to_py)?;
            solver::check_boundary_guard(&g, &spec, c_star, t_end).map_err(to_py)?;
            g
        }
        None => Grid1D::sized_for(&spec, c_star, t_end, dx).map_err(to_py)?,
    };
    let cfg = SolverConfig { dt, t_end, snapshot_times: snapshot_grid(t_end, snapshot_interval), ..SolverConfig::default() };
    let rec = py.detach(|| solver::run(&m, &grid, &spec, &cfg)).map_err(to_py)?;
    Ok(PyRecord { inner: rec })
}

/// Wave profile `V` of `d_c V'' + c1 V' + V(1-V) = 0`: summary dict plus `xi`, `V`, `Vprime` lists.
#[pyfunction]
#[pyo3(signature = (d_c, c1, tol=DEFAULT_WAVE_TOL))]
fn traveling_wave(py: Python<'_>, d_c: f64, c1: f64, tol: f64) -> PyResult<Py<PyAny>> {
    let w = solve_traveling_wave(d_c, c1, None, tol).map_err(to_py)?;
    let mut v = serde_json::to_value(w.summary().map_err(to_py)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (xi, (vv, dv)): (Vec<f64>, (Vec<f64>, Vec<f64>)) = w.samples().map(|(a, b, c)| (a, (b, c))).unzip();
    v["xi"] = xi.into();
    v["V"] = vv.into();
    v["Vprime"] = dv.into();
    to_object(py, &v)
}

/// Kinetic `(C, H)` trajectory as `[(t, C, H)]`.
#[pyfunction]
#[pyo3(signature = (c0, h0, b=1.0, s=1.0, g=0.5, t_end=100.0, dt=DEFAULT_ODE_DT))]
fn ode_trajectory(c0: f64, h0: f64, b: f64, s: f64, g: f64, t_end: f64, dt: f64) -> PyResult<Vec<(f64, f64, f64)>> {
    let traj = model::ode_trajectory(c0, h0, model::KineticParams { b, s, g }, dt, t_end).map_err(to_py)?;
    Ok(traj.into_iter().map(|p| (p.t, p.c, p.h)).collect())
}

#[pyfunction]
#[pyo3(signature = (c, h, b=1.0, s=1.0, g=0.5))]
fn lyapunov(c: f64, h: f64, b: f64, s: f64, g: f64) -> PyResult<f64> {
    model::lyapunov(c, h, model::KineticParams { b, s, g }).map_err(to_py)
}

/// Sign certificate for a construction given as a JSON object with a `kind` tag.
#[pyfunction]
#[pyo3(signature = (spec_json, t_start, c0, t_max, tolerance=1e-12, escalate_cap=None))]
fn certify(
    py: Python<'_>,
    spec_json: &str,
    t_start: f64,
    c0: f64,
    t_max: f64,
    tolerance: f64,
    escalate_cap: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let spec: SuperSubSpec = from_json(spec_json)?;
    let wedge = Wedge::new(t_start, c0, t_max).map_err(to_py)?;
    let cap = escalate_cap.unwrap_or(t_start);
    let r = py.detach(|| certify_escalating(&spec, &wedge, tolerance, cap)).map_err(to_py)?;
    to_object(py, &r)
}

/// Measured front speed of `u_t = d u_xx + r u(1-u)`.
#[pyfunction]
#[pyo3(signature = (d=1.0, r=1.0, t_end=100.0, dx=0.1))]
fn kpp_speed(py: Python<'_>, d: f64, r: f64, t_end: f64, dx: f64) -> PyResult<f64> {
    let spec = InitialSpec::default();
    let grid = Grid1D::sized_for(&spec, 2.0 * (d * r).sqrt(), t_end, dx).map_err(to_py)?;
    let cfg = SolverConfig::with_snapshot_every(t_end, t_end);
    let out = py.detach(|| solver::scalar_kpp_run(d, r, &grid, &spec, &cfg)).map_err(to_py)?;
    out.speed.map(|f| f.slope).ok_or_else(|| PyValueError::new_err("no front detected"))
}

#[pymodule]
pub fn pyneolith(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyRecord>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_wave, m)?)?;
    m.add_function(wrap_pyfunction!(ode_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(kpp_speed, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_python_exception_types() {
        Python::initialize();
        Python::attach(|py| {
            let e = to_py(neolith::Error::NumericalInstability { field: "F", node: 3, value: f64::NAN, t: 1.0 });
            assert!(e.is_instance_of::<PyArithmeticError>(py));
            assert!(to_py(neolith::Error::Io("x".into())).is_instance_of::<PyOSError>(py));
            assert!(to_py(neolith::Error::Constraint("q".into())).is_instance_of::<PyValueError>(py));
        });
    }

    #[test]
    fn json_values_become_dicts() {
        Python::initialize();
        Python::attach(|py| {
            let obj = to_object(py, &serde_json::json!({"k": [1.5, null]})).unwrap();
            let k = obj.bind(py).get_item("k").unwrap();
            assert_eq!(k.get_item(0).unwrap().extract::<f64>().unwrap(), 1.5);
            assert!(k.get_item(1).unwrap().is_none());
        });
    }
}
