//! Subcommand bodies. Each returns the directory it wrote; verdict failures
//! come back as [`CliError::Verdict`] after the artifacts are on disk.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use neolith::comparison::{certify_escalating, residual_field, verify_ordering, Construction, OrderingReport, ResidualReport, SuperSubSpec, Wedge};
use neolith::diagnostics::{
    exponential_decay_check, final_zone_report, fit_bump, fit_log_correction, front_peak_series, lyapunov_series,
    zone_stats, BumpFit, DecayCheck, DecayQuantity, Field, FrontPeak, LogFit, LyapunovSeries, RegimeReport,
    ZoneStats,
};
use neolith::io::{fmt_f64, load_record, read_json, save_record, write_csv, write_json, Manifest, MANIFEST_FILE};
use neolith::model::{
    classify_regime, derived_constants, lyapunov, ode_trajectory, DerivedConstants, KineticParams, RegimeLabel,
    CRITICAL_TOL, DEFAULT_ODE_DT,
};
use neolith::solver::{run, scalar_kpp_run, Grid1D, InitialSpec, SimulationRecord, SolverConfig};
use neolith::waves::{solve_traveling_wave, DEFAULT_WAVE_TOL};
use neolith::ModelParams;

use crate::config::{content_hash, out_root, ExperimentConfig, Resolved, DEFAULT_SWEEP_CAP};
use crate::error::{CliError, CliResult};

fn named_dir(root: Option<&str>, prefix: &str, key: &impl Serialize) -> PathBuf {
    let v = serde_json::to_value(key).expect("key serializes");
    out_root(root).join(format!("{prefix}-{}", content_hash(&v)))
}

/// Run the resolved configuration and persist it. With `reuse`, an existing
/// directory whose manifest echoes the same configuration is loaded instead.
pub fn execute(res: &Resolved, reuse: bool) -> CliResult<(SimulationRecord, PathBuf)> {
    let dir = res.run_dir();
    if reuse && dir.join(MANIFEST_FILE).exists() {
        if let Ok((rec, man)) = load_record(&dir) {
            let mut stored = man.config.clone();
            stored["output"] = res.echo()["output"].clone();
            if stored == res.echo() {
                return Ok((rec, dir));
            }
        }
    }
    let start = Instant::now();
    let rec = run(&res.params, &res.grid, &res.config.initial, &res.solver)?;
    let derived = derived_constants(&res.params)?;
    let man = Manifest::for_record(&rec, derived, res.manifest_echo(), start.elapsed().as_secs_f64());
    save_record(&dir, &rec, &man)?;
    Ok((rec, dir))
}

pub fn cmd_run(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    let res = cfg.resolve()?;
    let (rec, dir) = execute(&res, false)?;
    if !rec.invariants.holds {
        return Err(CliError::Verdict(format!("field invariants failed: {:?}", rec.invariants)));
    }
    Ok(dir)
}

/// Verdict table row: the regime, the measured evidence and the clauses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub params: ModelParams,
    pub derived: DerivedConstants,
    pub regime: RegimeLabel,
    pub figure: Option<u8>,
    pub behaviour: String,
    pub measured_speed: Option<f64>,
    /// Final-zone statistics at the last snapshot.
    pub zone: ZoneStats,
    pub report: RegimeReport,
    pub pass: bool,
    pub run_dir: PathBuf,
}

pub fn behaviour(label: &RegimeLabel) -> &'static str {
    match label.figure() {
        Some(1) => "farmers and converts advance at 2 sqrt(a); hunter-gatherers vanish behind a front carrying a peak of F",
        Some(2) => "converts lead at 2 sqrt(d_c (1+s)); F dies out and C -> 1, H -> 0 behind the front",
        Some(3) => "farmers lead at 2 sqrt(a); hunter-gatherers persist behind the front at (C*, H*)",
        Some(4) => "converts lead at 2 sqrt(d_c (1+s)); F dies out and (C, H) -> (C*, H*)",
        _ => "critical case, not classified",
    }
}

pub fn summarize(rec: &SimulationRecord, cfg: &ExperimentConfig, dir: PathBuf) -> CliResult<RegimeSummary> {
    let m = rec.params;
    let derived = derived_constants(&m)?;
    let t_end = rec.config.t_end;
    let diag = &cfg.diagnostics;
    let c1 = diag.zone_fraction * derived.c_star;
    let report = final_zone_report(rec, c1, diag.final_window_start * t_end, t_end, diag.tolerance)?;
    let last = rec
        .final_state()
        .ok_or_else(|| neolith::Error::InsufficientData("record has no snapshots".into()))?;
    let zone = zone_stats(last, &rec.grid, &m, c1);
    let regime = classify_regime(&m, CRITICAL_TOL);
    Ok(RegimeSummary {
        params: m,
        derived,
        regime,
        figure: regime.figure(),
        behaviour: behaviour(&regime).into(),
        measured_speed: report.speed.map(|f| f.slope),
        zone,
        pass: report.pass,
        report,
        run_dir: dir,
    })
}

pub const DEFAULT_QUADRUPLE: [(f64, f64, f64, f64); 4] =
    [(3.0, 1.0, 1.0, 2.0), (1.0, 1.0, 1.0, 2.0), (3.0, 1.0, 1.0, 0.5), (1.0, 1.0, 1.0, 0.5)];

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Run four parameter sets `(a, s, d_c, g)`, one per spreading behaviour.
pub fn cmd_regimes(base: &ExperimentConfig, sets: &[(f64, f64, f64, f64)]) -> CliResult<PathBuf> {
    if sets.len() != 4 {
        return Err(CliError::Config(format!("regimes needs four parameter sets, got {}", sets.len())));
    }
    let mut configs = Vec::new();
    let mut figures = BTreeSet::new();
    for &(a, s, d_c, g) in sets {
        let mut c = base.clone();
        c.model.original = None;
        (c.model.a, c.model.s, c.model.d_c, c.model.g) = (Some(a), Some(s), Some(d_c), Some(g));
        let res = c.resolve()?;
        let label = classify_regime(&res.params, CRITICAL_TOL);
        if label.is_critical() {
            return Err(CliError::Config(format!("(a={a}, s={s}, d_c={d_c}, g={g}) is a critical case ({label})")));
        }
        figures.insert(label.figure());
        configs.push(res);
    }
    if figures.len() != 4 {
        return Err(CliError::Config("the four sets must cover g <> 1 crossed with a <> d_c (1+s)".into()));
    }
    let rows: Vec<RegimeSummary> = configs
        .par_iter()
        .map(|res| {
            let (rec, dir) = execute(res, true)?;
            summarize(&rec, &res.config, dir)
        })
        .collect::<CliResult<_>>()?;
    let keys: Vec<_> = configs.iter().map(|r| r.echo()).collect();
    let dir = named_dir(base.output.root.as_deref(), "regimes", &keys);
    write_json(&dir.join("regimes.json"), &rows)?;
    let header = [
        "figure", "regime", "a", "s", "d_c", "g", "c_star", "speed", "sup_F_all", "inf_FC", "sup_abs_C_minus_1",
        "sup_H", "sup_abs_C_minus_Cstar", "sup_abs_H_minus_Hstar", "pass", "behaviour",
    ];
    let table = rows.iter().map(|r| {
        vec![
            r.figure.map(|f| f.to_string()).unwrap_or_default(),
            r.regime.to_string(),
            fmt_f64(r.params.a),
            fmt_f64(r.params.s),
            fmt_f64(r.params.d_c),
            fmt_f64(r.params.g),
            fmt_f64(r.derived.c_star),
            opt_cell(r.measured_speed),
            fmt_f64(r.zone.sup_f_all),
            fmt_f64(r.zone.inf_fc),
            fmt_f64(r.zone.sup_abs_c_minus_1),
            fmt_f64(r.zone.sup_h),
            opt_cell(r.zone.sup_abs_c_minus_ceq),
            opt_cell(r.zone.sup_abs_h_minus_heq),
            r.pass.to_string(),
            r.behaviour.clone(),
        ]
    });
    write_csv(&dir.join("regimes.csv"), &header, table)?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.pass).map(|r| r.regime.to_string()).collect();
    if !failed.is_empty() {
        return Err(CliError::Verdict(format!("regime verdicts failed for {} (see {})", failed.join(", "), dir.display())));
    }
    Ok(dir)
}

/// One sweep axis: a model parameter and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    /// `name=v1,v2,...`
    pub fn parse(text: &str) -> CliResult<Self> {
        let (name, vals) = text
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("axis `{text}` is not name=v1,v2,...")))?;
        let values = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad value `{v}` on axis {name}"))))
            .collect::<CliResult<Vec<f64>>>()?;
        Ok(Axis { name: name.trim().to_string(), values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub max_parallel: usize,
    pub cap: usize,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>, max_parallel: Option<usize>) -> Self {
        SweepSpec {
            axes,
            max_parallel: max_parallel.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
            cap: DEFAULT_SWEEP_CAP,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let mut seen = BTreeSet::new();
        for ax in &self.axes {
            if crate::config::default_params().get(&ax.name).is_none() {
                return Err(CliError::Config(format!("axis `{}` is not a model parameter", ax.name)));
            }
            if !seen.insert(ax.name.as_str()) {
                return Err(CliError::Config(format!("duplicate axis `{}`", ax.name)));
            }
            if ax.values.is_empty() {
                return Err(CliError::Config(format!("axis `{}` has no values", ax.name)));
            }
        }
        let size = self.size();
        if size > self.cap {
            return Err(CliError::Config(format!("sweep has {size} points, cap is {}", self.cap)));
        }
        if self.max_parallel == 0 {
            return Err(CliError::Config("max_parallel must be at least 1".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Cartesian product, lexicographic in the axes (values sorted ascending).
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut out: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for ax in &self.axes {
            let mut vals = ax.values.clone();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push((ax.name.clone(), v));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

pub fn cmd_sweep(base: &ExperimentConfig, spec: &SweepSpec) -> CliResult<PathBuf> {
    spec.validate()?;
    let base_params = base.model_params()?;
    let resolved: Vec<Resolved> = spec
        .points()
        .into_iter()
        .map(|pt| {
            let mut m = base_params;
            for (name, v) in &pt {
                m.set(name, *v)?;
            }
            let mut c = base.clone();
            c.model = crate::config::ModelSection {
                a: Some(m.a),
                b: Some(m.b),
                s: Some(m.s),
                g: Some(m.g),
                d_c: Some(m.d_c),
                d_h: Some(m.d_h),
                original: None,
            };
            c.resolve()
        })
        .collect::<CliResult<_>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.max_parallel)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    // collect() on an indexed parallel iterator keeps the input order
    let rows: Vec<RegimeSummary> = pool.install(|| {
        resolved
            .par_iter()
            .map(|res| {
                let (rec, dir) = execute(res, true)?;
                summarize(&rec, &res.config, dir)
            })
            .collect::<CliResult<_>>()
    })?;
    let mut keyed = base.clone();
    keyed.output = Default::default();
    let key = (&keyed, &spec.axes);
    let dir = named_dir(base.output.root.as_deref(), "sweep", &key);
    let header = [
        "a", "b", "s", "g", "d_c", "d_h", "c_f", "c_c", "c_star", "C_star", "H_star", "regime", "figure", "speed",
        "sup_F_all", "inf_FC", "sup_abs_C_minus_1", "sup_H", "sup_abs_C_minus_Cstar", "sup_abs_H_minus_Hstar", "pass",
        "run_dir",
    ];
    let table = rows.iter().map(|r| {
        let p = r.params;
        let d = r.derived;
        vec![
            fmt_f64(p.a),
            fmt_f64(p.b),
            fmt_f64(p.s),
            fmt_f64(p.g),
            fmt_f64(p.d_c),
            fmt_f64(p.d_h),
            fmt_f64(d.c_f),
            fmt_f64(d.c_c),
            fmt_f64(d.c_star),
            opt_cell(d.c_eq),
            opt_cell(d.h_eq),
            r.regime.to_string(),
            r.figure.map(|f| f.to_string()).unwrap_or_default(),
            opt_cell(r.measured_speed),
            fmt_f64(r.zone.sup_f_all),
            fmt_f64(r.zone.inf_fc),
            fmt_f64(r.zone.sup_abs_c_minus_1),
            fmt_f64(r.zone.sup_h),
            opt_cell(r.zone.sup_abs_c_minus_ceq),
            opt_cell(r.zone.sup_abs_h_minus_heq),
            r.pass.to_string(),
            r.run_dir.display().to_string(),
        ]
    });
    write_csv(&dir.join("atlas.csv"), &header, table)?;
    write_json(&dir.join("sweep.json"), spec)?;
    Ok(dir)
}

/// Input of `verify`: a construction, its wedge and the certificate settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyInput {
    pub spec: SuperSubSpec,
    pub wedge: Wedge,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Escalate the wedge start up to this time; absent means no escalation.
    #[serde(default)]
    pub escalate_cap: Option<f64>,
}

fn default_tolerance() -> f64 {
    1e-12
}

impl VerifyInput {
    /// TOML or JSON, chosen by extension (JSON if `.json`).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutput {
    pub certificate: ResidualReport,
    pub ordering: Option<OrderingReport>,
}

pub fn cmd_verify(
    input: &VerifyInput,
    record_dir: Option<&Path>,
    residual_csv: bool,
    root: Option<&str>,
) -> CliResult<PathBuf> {
    let cap = input.escalate_cap.unwrap_or(input.wedge.t_start);
    let certificate = certify_escalating(&input.spec, &input.wedge, input.tolerance, cap)?;
    let ordering = match record_dir {
        Some(d) => {
            let (rec, _) = load_record(d)?;
            Some(verify_ordering(&rec, &input.spec, &input.wedge)?)
        }
        None => None,
    };
    let dir = named_dir(root, "verify", &(input, record_dir));
    if residual_csv {
        let c = Construction::new(input.spec)?;
        let field = residual_field(&c, &certificate.wedge)?;
        let rows = field.into_iter().map(|(t, x, pc)| {
            let v = |k: usize| pc.values.get(k).map(|(_, _, r)| fmt_f64(*r)).unwrap_or_default();
            vec![fmt_f64(t), fmt_f64(x), v(0), v(1)]
        });
        write_csv(&dir.join("residuals.csv"), &["t", "x", "N1", "N2"], rows)?;
    }
    let out = VerifyOutput { certificate, ordering };
    write_json(&dir.join("verify.json"), &out)?;
    let ordering_ok = out.ordering.as_ref().is_none_or(|o| o.pass);
    if !(out.certificate.pass && ordering_ok) {
        return Err(CliError::Verdict(format!(
            "{}: {} residual violations, ordering {} (see {})",
            out.certificate.kind,
            out.certificate.violation_count,
            match &out.ordering {
                Some(o) => format!("{} violations", o.violation_count),
                None => "not checked".into(),
            },
            dir.display()
        )));
    }
    Ok(dir)
}

pub fn cmd_wave(d_c: f64, c1: f64, range: Option<(f64, f64)>, tol: Option<f64>, root: Option<&str>) -> CliResult<PathBuf> {
    let tol = tol.unwrap_or(DEFAULT_WAVE_TOL);
    let wave = solve_traveling_wave(d_c, c1, range, tol)?;
    let summary = wave.summary()?;
    let dir = named_dir(root, "wave", &(d_c, c1, range, tol));
    let rows = wave.samples().map(|(xi, v, dv)| vec![fmt_f64(xi), fmt_f64(v), fmt_f64(dv)]);
    write_csv(&dir.join("wave.csv"), &["xi", "V", "Vprime"], rows)?;
    write_json(&dir.join("wave.json"), &summary)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeOutput {
    pub params: KineticParams,
    pub start: (f64, f64),
    pub t_end: f64,
    pub dt: f64,
    pub terminal: (f64, f64),
    /// `(C*, H*)` when `g < 1`.
    pub equilibrium: Option<(f64, f64)>,
    pub distance: Option<f64>,
}

pub fn cmd_ode(start: (f64, f64), k: KineticParams, dt: Option<f64>, t_end: f64, root: Option<&str>) -> CliResult<PathBuf> {
    let dt = dt.unwrap_or(DEFAULT_ODE_DT);
    let traj = ode_trajectory(start.0, start.1, k, dt, t_end)?;
    let eq = k.equilibrium().ok();
    let end = traj.last().expect("trajectory includes the start");
    let dir = named_dir(root, "ode", &(start, k, dt, t_end));
    let stride = (traj.len() / 2000).max(1);
    let rows = traj.iter().enumerate().filter(|(i, _)| i % stride == 0 || *i == traj.len() - 1).map(|(_, p)| {
        let phi = eq.and_then(|_| lyapunov(p.c, p.h, k).ok());
        vec![fmt_f64(p.t), fmt_f64(p.c), fmt_f64(p.h), opt_cell(phi)]
    });
    write_csv(&dir.join("ode.csv"), &["t", "C", "H", "Phi"], rows)?;
    let out = OdeOutput {
        params: k,
        start,
        t_end,
        dt,
        terminal: (end.c, end.h),
        equilibrium: eq,
        distance: eq.map(|(c, h)| ((end.c - c).powi(2) + (end.h - h).powi(2)).sqrt()),
    };
    write_json(&dir.join("ode.json"), &out)?;
    Ok(dir)
}

#[derive(Debug, Clone, Serialize)]
pub struct KppOutput {
    pub d: f64,
    pub r: f64,
    pub t_end: f64,
    pub target: f64,
    pub speed: Option<f64>,
    pub relative_error: Option<f64>,
    pub band: f64,
    pub pass: bool,
}

pub fn cmd_kpp(d: f64, r: f64, t_end: f64, dx: f64, band: f64, root: Option<&str>) -> CliResult<PathBuf> {
    let target = 2.0 * (d * r).sqrt();
    let spec = InitialSpec::default();
    let grid = Grid1D::sized_for(&spec, target, t_end, dx)?;
    let cfg = SolverConfig::with_snapshot_every(t_end, t_end);
    let out = scalar_kpp_run(d, r, &grid, &spec, &cfg)?;
    let speed = out.speed.map(|f| f.slope);
    let rel = speed.map(|v| v / target - 1.0);
    let pass = rel.is_some_and(|e| e.abs() <= band);
    let dir = named_dir(root, "kpp", &(d, r, t_end, dx));
    let rows = out.front.samples.iter().map(|(t, x)| vec![fmt_f64(*t), opt_cell(*x)]);
    write_csv(&dir.join("kpp_front.csv"), &["t", "x_front"], rows)?;
    write_json(&dir.join("kpp.json"), &KppOutput { d, r, t_end, target, speed, relative_error: rel, band, pass })?;
    if !pass {
        return Err(CliError::Verdict(format!("speed {speed:?} outside {target} +- {:.0}%", 100.0 * band)));
    }
    Ok(dir)
}

/// Every diagnostic applicable to a saved run.
#[derive(Debug, Clone, Serialize)]
pub struct FullReport {
    pub summary: RegimeSummary,
    pub log_fit: Option<LogFit>,
    pub bump: Option<BumpFit>,
    pub front_peak: Option<FrontPeak>,
    pub decay: Option<DecayCheck>,
    pub lyapunov: Option<LyapunovSeries>,
    /// Diagnostics that did not apply, with the reason.
    pub skipped: Vec<(String, String)>,
}

fn keep<T>(name: &str, r: neolith::Result<T>, skipped: &mut Vec<(String, String)>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            skipped.push((name.into(), e.to_string()));
            None
        }
    }
}

pub fn cmd_report(run_dir: &Path) -> CliResult<PathBuf> {
    let (rec, man) = load_record(run_dir)?;
    let cfg: ExperimentConfig = serde_json::from_value(man.config.clone()).unwrap_or_default();
    let summary = summarize(&rec, &cfg, run_dir.to_path_buf())?;
    let t_end = rec.config.t_end;
    let diag = &cfg.diagnostics;
    let c_star = summary.derived.c_star;
    let mut skipped = Vec::new();
    let c_front = rec.front(Field::C, 0.5);
    let log_fit = keep(
        "log_fit",
        c_front
            .ok_or_else(|| neolith::Error::InsufficientData("no C front at level 0.5".into()))
            .and_then(|fs| fit_log_correction(fs, c_star, diag.log_window_start * t_end, t_end)),
        &mut skipped,
    );
    let bump = keep("bump", fit_bump(&rec, diag.bump_window_start * t_end, t_end, 0.1), &mut skipped);
    let front_peak = keep("front_peak", front_peak_series(&rec, t_end / 2.0, t_end), &mut skipped);
    let decay = keep(
        "decay",
        exponential_decay_check(&rec, DecayQuantity::H, 0.5 * summary.derived.c_c, t_end / 3.0, t_end),
        &mut skipped,
    );
    let lyap = keep(
        "lyapunov",
        lyapunov_series(&rec, diag.zone_fraction * c_star, diag.final_window_start * t_end, t_end),
        &mut skipped,
    );
    let dir = run_dir.join("report");
    let fronts = rec.fronts.iter().flat_map(|fs| {
        fs.samples.iter().map(move |(t, x)| {
            vec![
                fmt_f64(*t),
                fs.field.name().to_string(),
                fmt_f64(fs.level),
                opt_cell(*x),
                opt_cell(x.map(|x| x - c_star * t)),
            ]
        })
    });
    write_csv(&dir.join("front_series.csv"), &["t", "field", "level", "x_front", "x_front_minus_cstar_t"], fronts)?;
    if let Some(l) = &lyap {
        write_csv(&dir.join("phi_series.csv"), &["t", "Phi_mean"], l.series.iter().map(|(t, p)| vec![fmt_f64(*t), fmt_f64(*p)]))?;
    }
    if let Some(b) = &bump {
        let rows = b.center_series.iter().map(|&(t, f)| {
            let fitted = b.ln_amplitude - b.alpha * t.ln();
            vec![fmt_f64(t), fmt_f64(f.ln()), fmt_f64(fitted), fmt_f64(f.ln() - fitted)]
        });
        write_csv(&dir.join("bump_residuals.csv"), &["t", "ln_F0", "fitted", "residual"], rows)?;
    }
    let pass = summary.pass;
    let full = FullReport { summary, log_fit, bump, front_peak, decay, lyapunov: lyap, skipped };
    write_json(&dir.join("report.json"), &full)?;
    if !pass {
        let failed: Vec<String> =
            full.summary.report.verdicts.iter().filter(|v| !v.pass).map(|v| format!("{} ({:.3e})", v.clause, v.value)).collect();
        return Err(CliError::Verdict(format!("{} (see {})", failed.join("; "), dir.display())));
    }
    Ok(dir)
}

/// Read the manifest of a run directory without loading snapshots.
pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    Ok(read_json(&dir.join(MANIFEST_FILE))?)
}
