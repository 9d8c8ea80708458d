//! Measurements on simulation records: fronts, speeds, the logarithmic
//! delay, the bump fit, final-zone and leading-edge sups, front peaks,
//! exponential decay rates and Lyapunov series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    classify_regime, derived_constants, entropy_integral, Conversion, ModelParams, RegimeLabel, SpeedOrder,
    CRITICAL_TOL,
};
use crate::solver::{FieldState, Grid1D, SimulationRecord};
use crate::stats::{fit_line, LineFit};

/// Field selector for front tracking. `H` is tracked through its deficit
/// `1 - H`, so every selector is zero ahead of the invasion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    F,
    C,
    #[serde(rename = "F+C")]
    FPlusC,
    H,
}

impl Field {
    pub fn name(&self) -> &'static str {
        match self {
            Field::F => "F",
            Field::C => "C",
            Field::FPlusC => "F+C",
            Field::H => "H",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "F" => Ok(Field::F),
            "C" => Ok(Field::C),
            "F+C" => Ok(Field::FPlusC),
            "H" | "1-H" => Ok(Field::H),
            other => Err(Error::Validation(format!("unknown field `{other}`"))),
        }
    }

    #[inline]
    pub fn value(&self, s: &FieldState, i: usize) -> f64 {
        match self {
            Field::F => s.f[i],
            Field::C => s.c[i],
            Field::FPlusC => s.f[i] + s.c[i],
            Field::H => 1.0 - s.h[i],
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSeries {
    pub field: Field,
    pub level: f64,
    /// `(t, x_front)`; `None` where the field stays below the level.
    pub samples: Vec<(f64, Option<f64>)>,
}

impl FrontSeries {
    pub fn new(field: Field, level: f64) -> Self {
        FrontSeries {
            field,
            level,
            samples: Vec::new(),
        }
    }

    pub fn from_points(field: Field, level: f64, pts: impl IntoIterator<Item = (f64, f64)>) -> Self {
        FrontSeries {
            field,
            level,
            samples: pts.into_iter().map(|(t, x)| (t, Some(x))).collect(),
        }
    }

    /// Defined samples with `t1 <= t <= t2`.
    pub fn window(&self, t1: f64, t2: f64) -> (Vec<f64>, Vec<f64>) {
        self.samples
            .iter()
            .filter(|(t, _)| *t >= t1 - 1e-9 && *t <= t2 + 1e-9)
            .filter_map(|(t, x)| x.map(|x| (*t, x)))
            .unzip()
    }
}

/// Rightmost crossing of `level`, linearly interpolated between the
/// bracketing nodes. `None` when the field is below `level` everywhere.
pub fn front_position(state: &FieldState, grid: &Grid1D, field: Field, level: f64) -> Option<f64> {
    let n = state.len();
    let i = (0..n).rev().find(|&i| field.value(state, i) >= level)?;
    if i == n - 1 {
        return Some(grid.x(n - 1));
    }
    let (u0, u1) = (field.value(state, i), field.value(state, i + 1));
    let (x0, x1) = (grid.x(i), grid.x(i + 1));
    Some(x0 + (u0 - level) / (u0 - u1) * (x1 - x0))
}

/// Least-squares slope of front position against time on `[t1, t2]`.
pub fn estimate_speed(fs: &FrontSeries, t1: f64, t2: f64) -> Result<LineFit> {
    let (t, x) = fs.window(t1, t2);
    if t.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} front samples in [{t1}, {t2}], need 10",
            t.len()
        )));
    }
    fit_line(&t, &x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    /// Coefficient of `-ln t`.
    pub m: f64,
    pub k: f64,
    pub m_stderr: f64,
    pub k_stderr: f64,
    pub rms: f64,
    pub n: usize,
}

/// Fit `x_front - c_fixed t = k - m ln t` on `[t1, t2]`.
pub fn fit_log_correction(fs: &FrontSeries, c_fixed: f64, t1: f64, t2: f64) -> Result<LogFit> {
    let (t, x) = fs.window(t1.max(10.0), t2);
    if t.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "{} front samples with t >= 10 in [{t1}, {t2}], need 20",
            t.len()
        )));
    }
    let reg: Vec<f64> = t.iter().map(|t| -t.ln()).collect();
    let y: Vec<f64> = t.iter().zip(&x).map(|(t, x)| x - c_fixed * t).collect();
    let f = fit_line(&reg, &y)?;
    Ok(LogFit {
        m: f.slope,
        k: f.intercept,
        m_stderr: f.slope_stderr,
        k_stderr: f.intercept_stderr,
        rms: f.rms,
        n: f.n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFit {
    /// Decay exponent of `F(t, 0)`.
    pub alpha: f64,
    pub alpha_stderr: f64,
    /// Intercept of the `ln F(t, 0)` against `ln t` regression.
    pub ln_amplitude: f64,
    /// `(t, F(t, 0))` over the window.
    pub center_series: Vec<(f64, f64)>,
    /// Mean Gaussian diffusivity over the window.
    pub d_fit: f64,
    /// `(t, D)` per snapshot.
    pub d_series: Vec<(f64, f64)>,
    /// RMS residual of the `ln F(t, 0)` regression.
    pub rms: f64,
    pub k_star: f64,
    pub d_star: f64,
    /// `k* - slack <= alpha <= 1/2 + slack` and `1 - slack <= D <= d* (1 + slack)`.
    pub within_bounds: bool,
    pub slack: f64,
}

fn require_bump_regime(m: &ModelParams) -> Result<RegimeLabel> {
    let label = classify_regime(m, CRITICAL_TOL);
    if label.speed_order != SpeedOrder::ConvertLed || !(m.g > 1.0) || label.conversion_critical {
        return Err(Error::Unsupported(format!(
            "bump fit needs a < d_c (1 + s) and g > 1, got {label}"
        )));
    }
    Ok(label)
}

/// Fit `F(t, 0) ~ t^{-alpha}` and `F(t, x) ~ exp(-x^2 / (4 D t))` over
/// snapshots in `[t1, t2]`, the latter on `|x| <= sqrt t`.
pub fn fit_bump(record: &SimulationRecord, t1: f64, t2: f64, slack: f64) -> Result<BumpFit> {
    let m = &record.params;
    require_bump_regime(m)?;
    let t_last = record.final_state().map(|s| s.t).unwrap_or(0.0);
    if t_last < 200.0 - 1e-9 {
        return Err(Error::InsufficientData(format!("record ends at t = {t_last}, bump fit needs T >= 200")));
    }
    let grid = &record.grid;
    let center = (0..grid.n)
        .min_by(|&a, &b| grid.x(a).abs().total_cmp(&grid.x(b).abs()))
        .unwrap();
    let mut lt = Vec::new();
    let mut lf = Vec::new();
    let mut d_series = Vec::new();
    let mut center_series = Vec::new();
    for s in record.snapshots_in(t1, t2) {
        if s.t <= 0.0 {
            continue;
        }
        let f0 = s.f[center];
        if !(f0 > 1e-300) {
            return Err(Error::Domain(format!("F(t, 0) = {f0:e} underflows at t = {}", s.t)));
        }
        lt.push(s.t.ln());
        lf.push(f0.ln());
        center_series.push((s.t, f0));
        let r = s.t.sqrt();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for i in grid.indices_within(r) {
            let v = s.f[i];
            if v > 1e-300 {
                xs.push(grid.x(i).powi(2));
                ys.push(v.ln());
            }
        }
        let fit = fit_line(&xs, &ys)?;
        if fit.slope < 0.0 {
            d_series.push((s.t, -1.0 / (4.0 * s.t * fit.slope)));
        } else {
            d_series.push((s.t, f64::INFINITY));
        }
    }
    if lt.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "{} snapshots in [{t1}, {t2}], bump fit needs 20",
            lt.len()
        )));
    }
    let tfit = fit_line(&lt, &lf)?;
    let alpha = -tfit.slope;
    let d_fit = d_series.iter().map(|(_, d)| d).sum::<f64>() / d_series.len() as f64;
    let dc = derived_constants(m)?;
    let within_bounds = alpha >= dc.k_star - slack
        && alpha <= 0.5 + slack
        && d_fit >= 1.0 - slack
        && d_fit <= dc.d_star * (1.0 + slack);
    Ok(BumpFit {
        alpha,
        alpha_stderr: tfit.slope_stderr,
        ln_amplitude: tfit.intercept,
        center_series,
        d_fit,
        d_series,
        rms: tfit.rms,
        k_star: dc.k_star,
        d_star: dc.d_star,
        within_bounds,
        slack,
    })
}

/// Sups and infs over `|x| <= c1 t` at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneStats {
    pub t: f64,
    pub radius: f64,
    pub sup_f: f64,
    pub inf_f: f64,
    pub sup_c: f64,
    pub inf_c: f64,
    pub sup_h: f64,
    pub inf_h: f64,
    pub inf_fc: f64,
    pub sup_fc: f64,
    pub sup_abs_c_minus_1: f64,
    pub sup_c_minus_1_plus_h: f64,
    /// `sup |C - C*|`, `sup |H - H*|` and `sup (|C - C*| + |H - H*|)` when `g < 1`.
    pub sup_abs_c_minus_ceq: Option<f64>,
    pub sup_abs_h_minus_heq: Option<f64>,
    pub sup_coexistence_gap: Option<f64>,
    /// `sup F` over the whole grid.
    pub sup_f_all: f64,
}

pub fn zone_stats(s: &FieldState, grid: &Grid1D, m: &ModelParams, c1: f64) -> ZoneStats {
    let radius = c1 * s.t;
    let idx = grid.indices_within(radius);
    let eq = crate::model::Coexistence::of(m);
    let mut z = ZoneStats {
        t: s.t,
        radius,
        sup_f: f64::NEG_INFINITY,
        inf_f: f64::INFINITY,
        sup_c: f64::NEG_INFINITY,
        inf_c: f64::INFINITY,
        sup_h: f64::NEG_INFINITY,
        inf_h: f64::INFINITY,
        inf_fc: f64::INFINITY,
        sup_fc: f64::NEG_INFINITY,
        sup_abs_c_minus_1: f64::NEG_INFINITY,
        sup_c_minus_1_plus_h: f64::NEG_INFINITY,
        sup_abs_c_minus_ceq: eq.map(|_| f64::NEG_INFINITY),
        sup_abs_h_minus_heq: eq.map(|_| f64::NEG_INFINITY),
        sup_coexistence_gap: eq.map(|_| f64::NEG_INFINITY),
        sup_f_all: s.f.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    };
    for i in idx {
        let (f, c, h) = (s.f[i], s.c[i], s.h[i]);
        z.sup_f = z.sup_f.max(f);
        z.inf_f = z.inf_f.min(f);
        z.sup_c = z.sup_c.max(c);
        z.inf_c = z.inf_c.min(c);
        z.sup_h = z.sup_h.max(h);
        z.inf_h = z.inf_h.min(h);
        z.inf_fc = z.inf_fc.min(f + c);
        z.sup_fc = z.sup_fc.max(f + c);
        z.sup_abs_c_minus_1 = z.sup_abs_c_minus_1.max((c - 1.0).abs());
        z.sup_c_minus_1_plus_h = z.sup_c_minus_1_plus_h.max((c - 1.0).abs() + h);
        if let Some(eq) = eq {
            let (dc, dh) = ((c - eq.c).abs(), (h - eq.h).abs());
            z.sup_abs_c_minus_ceq = z.sup_abs_c_minus_ceq.map(|v| v.max(dc));
            z.sup_abs_h_minus_heq = z.sup_abs_h_minus_heq.map(|v| v.max(dh));
            z.sup_coexistence_gap = z.sup_coexistence_gap.map(|v| v.max(dc + dh));
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub clause: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Verdict {
    fn below(clause: &str, value: f64, threshold: f64) -> Self {
        Verdict {
            clause: clause.to_string(),
            value,
            threshold,
            pass: value < threshold,
        }
    }

    fn at_least(clause: &str, value: f64, threshold: f64) -> Self {
        Verdict {
            clause: clause.to_string(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub params: ModelParams,
    pub regime: RegimeLabel,
    pub c1: f64,
    pub tol: f64,
    /// Zone statistics at every snapshot of the late window.
    pub zones: Vec<ZoneStats>,
    /// C-front speed at level 1/2 over the last third of the record.
    pub speed: Option<LineFit>,
    pub c_star: f64,
    /// Clauses evaluated at the last snapshot of the window.
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// Final-zone sups over `|x| <= c1 t` for snapshots in `[t1, t2]` and the
/// regime verdicts at the last of them.
pub fn final_zone_report(record: &SimulationRecord, c1: f64, t1: f64, t2: f64, tol: f64) -> Result<RegimeReport> {
    let m = &record.params;
    let dc = derived_constants(m)?;
    if !(c1 > 0.0 && c1 < dc.c_star) {
        return Err(Error::Validation(format!("need 0 < c1 < c* = {}, got {c1}", dc.c_star)));
    }
    let zones: Vec<ZoneStats> = record
        .snapshots_in(t1, t2)
        .filter(|s| s.t > 0.0)
        .map(|s| zone_stats(s, &record.grid, m, c1))
        .collect();
    let last = *zones
        .last()
        .ok_or_else(|| Error::Coverage(format!("no snapshots in [{t1}, {t2}]")))?;
    let regime = classify_regime(m, CRITICAL_TOL);
    let mut verdicts = vec![
        Verdict::at_least("inf(F+C) >= 1 - tol", last.inf_fc, 1.0 - tol),
        Verdict::below("sup H < max(0, 1-g) + tol", last.sup_h, (1.0 - m.g).max(0.0) + tol),
    ];
    if regime.speed_order == SpeedOrder::ConvertLed {
        verdicts.push(Verdict::below("sup_x F < tol", last.sup_f_all, tol));
        match regime.conversion {
            Conversion::High => {
                verdicts.push(Verdict::below("sup(|C-1| + H) < tol", last.sup_c_minus_1_plus_h, tol))
            }
            Conversion::Low => verdicts.push(Verdict::below(
                "sup(|C-C*| + |H-H*|) < tol",
                last.sup_coexistence_gap.unwrap_or(f64::INFINITY),
                tol,
            )),
        }
    }
    let t_end = record.final_state().map(|s| s.t).unwrap_or(0.0);
    let speed = record
        .front(Field::C, 0.5)
        .and_then(|fs| estimate_speed(fs, 2.0 * t_end / 3.0, t_end).ok());
    let pass = verdicts.iter().all(|v| v.pass);
    Ok(RegimeReport {
        params: *m,
        regime,
        c1,
        tol,
        zones,
        speed,
        c_star: dc.c_star,
        verdicts,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontPeak {
    /// `(t, max F near the front)`.
    pub series: Vec<(f64, f64)>,
    /// Infimum of the series over the requested window.
    pub late_inf: f64,
}

/// Max of `F` over `[x_front(C, 0.1) - 30, x_front(F, 0.01) + 30]` per snapshot.
pub fn front_peak_series(record: &SimulationRecord, t1: f64, t2: f64) -> Result<FrontPeak> {
    let m = &record.params;
    if !(m.a > 1.0 + m.s) {
        return Err(Error::Unsupported(format!(
            "front peak needs a > 1 + s, got a = {}, s = {}",
            m.a, m.s
        )));
    }
    let grid = &record.grid;
    let mut series = Vec::new();
    for s in record.snapshots.iter().filter(|s| s.t > 0.0) {
        let xc = front_position(s, grid, Field::C, 0.1);
        let xf = front_position(s, grid, Field::F, 0.01);
        let (Some(xc), Some(xf)) = (xc, xf) else {
            if s.t >= t1 - 1e-9 && s.t <= t2 + 1e-9 {
                return Err(Error::InsufficientData(format!("fronts absent at t = {}", s.t)));
            }
            continue;
        };
        let (lo, hi) = (xc.min(xf) - 30.0, xf.max(xc) + 30.0);
        let peak = (0..grid.n)
            .filter(|&i| (lo..=hi).contains(&grid.x(i)))
            .map(|i| s.f[i])
            .fold(0.0, f64::max);
        series.push((s.t, peak));
    }
    let late: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= t1 - 1e-9 && *t <= t2 + 1e-9)
        .map(|(_, p)| *p)
        .collect();
    if late.is_empty() {
        return Err(Error::InsufficientData(format!("no snapshots with fronts in [{t1}, {t2}]")));
    }
    Ok(FrontPeak {
        series,
        late_inf: late.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingEdge {
    /// `(t, sup_{|x| >= c2 t} C + |1 - H|, sup_{|x| >= c1 t} F)`.
    pub series: Vec<(f64, f64, f64)>,
    pub final_sup_ch: f64,
    pub final_sup_f: f64,
    /// Exponential rates fitted to the positive part of each series.
    pub rate_ch: Option<f64>,
    pub rate_f: Option<f64>,
}

fn sup_outside(grid: &Grid1D, r: f64, f: impl Fn(usize) -> f64) -> f64 {
    let slack = 1e-9 * grid.dx();
    (0..grid.n)
        .filter(|&i| grid.x(i).abs() >= r - slack)
        .map(f)
        .fold(0.0, f64::max)
}

pub fn leading_edge_report(record: &SimulationRecord, c2: f64, c1: f64, t1: f64, t2: f64) -> Result<LeadingEdge> {
    let m = &record.params;
    let dc = derived_constants(m)?;
    if !(c2 > dc.c_star) {
        return Err(Error::Validation(format!("need c2 > c* = {}, got {c2}", dc.c_star)));
    }
    if !(c1 > dc.c_f) {
        return Err(Error::Validation(format!("need c1 > 2 sqrt(a) = {}, got {c1}", dc.c_f)));
    }
    let grid = &record.grid;
    let reach = grid.half_width();
    let mut series = Vec::new();
    for s in record.snapshots_in(t1, t2) {
        if c2 * s.t >= reach || c1 * s.t >= reach {
            return Err(Error::Coverage(format!(
                "region |x| >= {} t at t = {} lies outside the grid",
                c2.max(c1),
                s.t
            )));
        }
        let ch = sup_outside(grid, c2 * s.t, |i| s.c[i] + (1.0 - s.h[i]).abs());
        let f = sup_outside(grid, c1 * s.t, |i| s.f[i]);
        series.push((s.t, ch, f));
    }
    let &(_, final_sup_ch, final_sup_f) = series
        .last()
        .ok_or_else(|| Error::Coverage(format!("no snapshots in [{t1}, {t2}]")))?;
    let rate = |pick: fn(&(f64, f64, f64)) -> f64| {
        let pts: Vec<(f64, f64)> = series
            .iter()
            .filter(|p| p.0 > 0.0 && pick(p) > 0.0)
            .map(|p| (p.0, pick(p).ln()))
            .collect();
        let (t, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        fit_line(&t, &y).ok().map(|f| f.slope)
    };
    Ok(LeadingEdge {
        rate_ch: rate(|p| p.1),
        rate_f: rate(|p| p.2),
        series,
        final_sup_ch,
        final_sup_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayQuantity {
    /// `sup H`
    H,
    /// `sup max(C - 1, 0)`
    CMinusOne,
}

/// Slope of `ln sup` against `t`; zero samples are dropped.
pub fn exponential_rate(series: &[(f64, f64)]) -> Result<LineFit> {
    let (t, y): (Vec<f64>, Vec<f64>) = series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .unzip();
    if t.len() < 3 {
        return Err(Error::InsufficientData(format!("{} positive samples, need 3", t.len())));
    }
    fit_line(&t, &y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    pub quantity: DecayQuantity,
    pub series: Vec<(f64, f64)>,
    pub fit: LineFit,
    pub decaying: bool,
}

/// Fitted exponential rate of a final-zone sup over `|x| <= c0 t`.
pub fn exponential_decay_check(
    record: &SimulationRecord,
    quantity: DecayQuantity,
    c0: f64,
    t1: f64,
    t2: f64,
) -> Result<DecayCheck> {
    let m = &record.params;
    require_bump_regime(m)?;
    let dc = derived_constants(m)?;
    if !(c0 > 0.0 && c0 < dc.c_c) {
        return Err(Error::Validation(format!("need 0 < c0 < c_c = {}, got {c0}", dc.c_c)));
    }
    let grid = &record.grid;
    let series: Vec<(f64, f64)> = record
        .snapshots_in(t1, t2)
        .filter(|s| s.t > 0.0)
        .map(|s| {
            let v = grid
                .indices_within(c0 * s.t)
                .map(|i| match quantity {
                    DecayQuantity::H => s.h[i],
                    DecayQuantity::CMinusOne => (s.c[i] - 1.0).max(0.0),
                })
                .fold(0.0, f64::max);
            (s.t, v)
        })
        .collect();
    let fit = exponential_rate(&series)?;
    Ok(DecayCheck {
        quantity,
        decaying: fit.slope < 0.0,
        series,
        fit,
    })
}

/// Increases of the late Lyapunov mean below this count as roundoff.
pub const LYAPUNOV_SERIES_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSeries {
    /// `(t, mean Phi over |x| <= c1 t)`.
    pub series: Vec<(f64, f64)>,
    /// Largest sample-to-sample increase over the late window.
    pub max_increase: f64,
    pub monotone: bool,
}

/// Spatial mean of the Lyapunov functional over `|x| <= c1 t`, with `C`, `H`
/// pushed `1e-12` inside `Sigma` before evaluation.
pub fn lyapunov_series(record: &SimulationRecord, c1: f64, t1: f64, t2: f64) -> Result<LyapunovSeries> {
    let m = &record.params;
    let Some(eq) = crate::model::Coexistence::of(m) else {
        return Err(Error::Unsupported(format!("Lyapunov series needs g < 1, got {}", m.g)));
    };
    let dc = derived_constants(m)?;
    if !(c1 > 0.0 && c1 < dc.c_star) {
        return Err(Error::Validation(format!("need 0 < c1 < c* = {}, got {c1}", dc.c_star)));
    }
    let grid = &record.grid;
    let eps = 1e-12;
    let mut series = Vec::new();
    for s in &record.snapshots {
        // At t = 0 the region is a single node; use it.
        let idx = grid.indices_within((c1 * s.t).max(0.5 * grid.dx()));
        let k = idx.len();
        if k == 0 {
            continue;
        }
        let total: f64 = idx
            .map(|i| {
                let c = s.c[i].clamp(eps, 1.0 + m.s - eps);
                let h = s.h[i].clamp(eps, 1.0 - eps);
                m.b * m.g * entropy_integral(c, eq.c) + m.s * entropy_integral(h, eq.h)
            })
            .sum();
        series.push((s.t, total / k as f64));
    }
    let late: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= t1 - 1e-9 && *t <= t2 + 1e-9)
        .map(|p| p.1)
        .collect();
    let max_increase = late.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(LyapunovSeries {
        series,
        max_increase,
        monotone: max_increase <= LYAPUNOV_SERIES_TOL,
    })
}

/// `max_i |u_i - u_{n-1-i}|` over all three fields.
pub fn symmetry_defect(s: &FieldState) -> f64 {
    let n = s.len();
    let mut worst: f64 = 0.0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        worst = worst
            .max((s.f[i] - s.f[j]).abs())
            .max((s.c[i] - s.c[j]).abs())
            .max((s.h[i] - s.h[j]).abs());
    }
    worst
}
