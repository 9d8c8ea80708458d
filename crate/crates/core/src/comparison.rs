//! Super- and sub-solution constructions, the competition operators, and
//! sampled sign certificates over space-time wedges.
//!
//! Pair residuals are evaluated in a rearranged form where the wave identity
//! `d V'' + c V' = -V(1 - V)` has been substituted, and `1 - u - v` is carried
//! as a sum of wave deficits. Both residuals of a pair are reported divided by
//! a positive scale (see [`PointChecks`]), so their sign survives when the raw
//! values underflow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Field;
use crate::error::{Error, Result};
use crate::model::{derived_constants, ModelParams};
use crate::solver::SimulationRecord;
use crate::special::ln_add_exp;
use crate::waves::{indicator_heat, solve_traveling_wave, HeatProfileSpec, TravelingWave, DEFAULT_WAVE_TOL};

pub const DEFAULT_T_SAMPLES: usize = 200;
pub const DEFAULT_X_SAMPLES: usize = 400;
pub const DEFAULT_WEDGE_START: f64 = 50.0;
pub const ESCALATION_CAP: f64 = 1e4;
/// Violations kept verbatim in a report; the count is always exact.
pub const MAX_LISTED_VIOLATIONS: usize = 200;
/// Relative gap between two pieces below which a sample counts as a kink.
const KINK_REL: f64 = 1e-9;

/// Value with first/second space derivatives and time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub v: f64,
    pub t: f64,
    pub x: f64,
    pub xx: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, ..Default::default() }
    }
}

/// Decaying source `s e^{-gamma_h t}(u + v)` in the second equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub s: f64,
    pub gamma_h: f64,
}

/// `u_t - u_xx - a u (1 - u - v)`.
pub fn residual_n1(u: &Jet, v: &Jet, a_coeff: f64) -> f64 {
    u.t - u.xx - a_coeff * u.v * (1.0 - u.v - v.v)
}

/// `v_t - d v_xx - v (1 - v - u)`, minus the source term when given.
pub fn residual_n2(u: &Jet, v: &Jet, d_c: f64, source: Option<Source>, t: f64) -> f64 {
    let mut r = v.t - d_c * v.xx - v.v * (1.0 - v.v - u.v);
    if let Some(src) = source {
        r -= src.s * (-src.gamma_h * t).exp() * (u.v + v.v);
    }
    r
}

fn one() -> f64 {
    1.0
}

/// Exponential upper bound on the converted farmers ahead of the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperCSpec {
    pub params: ModelParams,
    /// Amplitude of the farmer bound used as a source.
    pub f_amplitude: f64,
    pub c_amplitude: f64,
    pub eps: f64,
}

/// Lower bound on hunter-gatherers ahead of the front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerHSpec {
    pub params: ModelParams,
    pub f_amplitude: f64,
    pub c_amplitude: f64,
    pub h_amplitude: f64,
    pub eps: f64,
    pub lambda_h: f64,
}

/// `u = t^p (1 - e^{-tau t}) alpha`, `v = V(x - c1 t) + V(-x - c1 t) - 1 - u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperPairSpec {
    pub d_c: f64,
    pub c0: f64,
    pub c1: f64,
    pub q: f64,
    pub tau: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(default = "one")]
    pub a_coeff: f64,
}

/// `u = beta(t) alpha1 - alpha2`,
/// `v = V(x - c1 t - z) + V(-x - c1 t - z) - 1 - u + B4 t^{-(1+theta)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubPairSpec {
    pub d_c: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    /// `B3 = gamma B2`.
    pub gamma: f64,
    #[serde(rename = "B4")]
    pub b4: f64,
    pub delta: f64,
    pub theta: f64,
    pub zeta0: f64,
    /// Decay rate of the `alpha2` data; defaults to `c0 / 2`.
    #[serde(default)]
    pub k: Option<f64>,
    pub s: f64,
    pub gamma_h: f64,
    #[serde(default = "one")]
    pub a_coeff: f64,
}

impl SubPairSpec {
    pub fn k(&self) -> f64 {
        self.k.unwrap_or(0.5 * self.c0)
    }
    pub fn b3(&self) -> f64 {
        self.gamma * self.b2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SuperSubSpec {
    Fbar { a: f64, f_amplitude: f64 },
    Cbar1(UpperCSpec),
    Chat1(UpperCSpec),
    Cbar2(UpperCSpec),
    Chat2(UpperCSpec),
    Hunder(LowerHSpec),
    SuperPair(SuperPairSpec),
    SubPair(SubPairSpec),
}

impl SuperSubSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SuperSubSpec::Fbar { .. } => "Fbar",
            SuperSubSpec::Cbar1(_) => "Cbar1",
            SuperSubSpec::Chat1(_) => "Chat1",
            SuperSubSpec::Cbar2(_) => "Cbar2",
            SuperSubSpec::Chat2(_) => "Chat2",
            SuperSubSpec::Hunder(_) => "Hunder",
            SuperSubSpec::SuperPair(_) => "SuperPair",
            SuperSubSpec::SubPair(_) => "SubPair",
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Constraint(format!("{name} must be positive, got {v}")))
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Constraint(msg()))
    }
}

/// Largest admissible `q` for a super pair (exclusive).
pub fn super_pair_q_bound(d_c: f64, c0: f64, c1: f64) -> f64 {
    let l1 = crate::waves::wave_rate_minus(d_c, c1);
    let first = if d_c <= 1.0 { c0 / 2.0 } else { c0 / (2.0 * d_c) };
    first.min(l1 * c1 / c0)
}

/// Largest admissible `tau` for a super pair (exclusive).
pub fn super_pair_tau_bound(d_c: f64, c0: f64, c1: f64) -> f64 {
    crate::waves::wave_rate_minus(d_c, c1) * (c1 - c0)
}

fn check_wave_speed(d_c: f64, c0: f64, c1: f64) -> Result<()> {
    positive("d_c", d_c)?;
    positive("c0", c0)?;
    require(c1 > 2.0 * d_c.sqrt(), || {
        format!("c1 = {c1} must exceed 2 sqrt(d_c) = {}", 2.0 * d_c.sqrt())
    })?;
    require(c1 > c0, || format!("c1 = {c1} must exceed c0 = {c0}"))
}

impl SuperPairSpec {
    pub fn validate(&self) -> Result<()> {
        check_wave_speed(self.d_c, self.c0, self.c1)?;
        positive("B1", self.b1)?;
        positive("a_coeff", self.a_coeff)?;
        let qb = super_pair_q_bound(self.d_c, self.c0, self.c1);
        require(self.q > 0.0 && self.q < qb, || format!("q = {} must lie in (0, {qb})", self.q))?;
        let tb = super_pair_tau_bound(self.d_c, self.c0, self.c1);
        require(self.tau > 0.0 && self.tau < tb, || format!("tau = {} must lie in (0, {tb})", self.tau))
    }

    fn exponent(&self) -> f64 {
        if self.d_c <= 1.0 {
            (1.0 - self.d_c) / 2.0
        } else {
            (self.d_c - 1.0) / (2.0 * self.d_c)
        }
    }

    fn heat(&self) -> HeatProfileSpec {
        let d = if self.d_c <= 1.0 { 1.0 } else { self.d_c };
        HeatProfileSpec { b1: self.b1, q: self.q, diffusivity: d }
    }
}

impl SubPairSpec {
    pub fn validate(&self) -> Result<()> {
        check_wave_speed(self.d_c, self.c0, self.c1)?;
        require(0.0 < self.delta && self.delta < self.theta && self.theta < 0.5, || {
            format!("need 0 < delta < theta < 1/2, got delta = {}, theta = {}", self.delta, self.theta)
        })?;
        require(0.0 < self.gamma && self.gamma < 1.0, || format!("gamma = {} must lie in (0, 1)", self.gamma))?;
        require(0.0 < self.b2 && self.b2 < 1.0, || format!("B2 = {} must lie in (0, 1)", self.b2))?;
        require(self.b4 > 1.0 && self.b4.is_finite(), || format!("B4 = {} must exceed 1", self.b4))?;
        positive("zeta0", self.zeta0)?;
        positive("k", self.k())?;
        require(self.s >= 0.0, || format!("s = {} must be nonnegative", self.s))?;
        positive("gamma_h", self.gamma_h)?;
        positive("a_coeff", self.a_coeff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum UpperCKind {
    Bar1,
    Hat1,
    Bar2,
    Hat2,
}

/// Slope and speed of the exponential C bound, and whether the farmer bound
/// is the one travelling at the farmer speed.
fn upper_c_shape(kind: UpperCKind, m: &ModelParams, eps: f64) -> (f64, f64, bool) {
    let slow = ((1.0 + m.s) / m.d_c).sqrt();
    let fast = (m.d_c * (1.0 + m.s)).sqrt();
    let cf = 2.0 * m.a.sqrt();
    let cc = 2.0 * fast;
    match kind {
        UpperCKind::Bar1 => (slow, cf + eps, true),
        UpperCKind::Hat1 => (fast, cf + eps, true),
        UpperCKind::Bar2 => (slow, cc + eps, false),
        UpperCKind::Hat2 => (fast, cc + eps, false),
    }
}

fn validate_upper_c(kind: UpperCKind, sp: &UpperCSpec) -> Result<()> {
    sp.params.validate().map_err(|e| Error::Constraint(e.to_string()))?;
    let m = &sp.params;
    positive("eps", sp.eps)?;
    positive("f_amplitude", sp.f_amplitude)?;
    let case1 = m.a >= m.d_c * (1.0 + m.s);
    let (want_case1, want_wide) = match kind {
        UpperCKind::Bar1 => (true, true),
        UpperCKind::Hat1 => (true, false),
        UpperCKind::Bar2 => (false, true),
        UpperCKind::Hat2 => (false, false),
    };
    require(case1 == want_case1, || {
        if want_case1 {
            format!("requires a >= d_c (1 + s), got a = {}, d_c (1 + s) = {}", m.a, m.d_c * (1.0 + m.s))
        } else {
            format!("requires a < d_c (1 + s), got a = {}, d_c (1 + s) = {}", m.a, m.d_c * (1.0 + m.s))
        }
    })?;
    require((m.d_c >= 1.0) == want_wide, || {
        if want_wide {
            format!("requires d_c >= 1, got {}", m.d_c)
        } else {
            format!("requires d_c < 1, got {}", m.d_c)
        }
    })?;
    require(sp.c_amplitude >= 1.0 + 2.0 * m.s, || {
        format!("C amplitude {} must be at least 1 + 2s = {}", sp.c_amplitude, 1.0 + 2.0 * m.s)
    })
}

fn upper_c_kind_for(m: &ModelParams) -> UpperCKind {
    let case1 = m.a >= m.d_c * (1.0 + m.s);
    match (case1, m.d_c >= 1.0) {
        (true, true) => UpperCKind::Bar1,
        (true, false) => UpperCKind::Hat1,
        (false, true) => UpperCKind::Bar2,
        (false, false) => UpperCKind::Hat2,
    }
}

/// Upper bound on `F` used as a source: `min(A e^{-sqrt(a)(|x| - 2 sqrt(a) t)}, 1)`
/// in the farmer-led case, `min(A e^{-l (x - 2 l t)}, 1)` with `l = sqrt(d_c(1+s))` otherwise.
fn farmer_bound(m: &ModelParams, farmer_led: bool, amp: f64, t: f64, x: f64) -> f64 {
    let e = if farmer_led {
        let ra = m.a.sqrt();
        amp * (-ra * (x.abs() - 2.0 * ra * t)).exp()
    } else {
        let l = (m.d_c * (1.0 + m.s)).sqrt();
        amp * (-l * (x - 2.0 * l * t)).exp()
    };
    e.min(1.0)
}

fn kink(p1: f64, p2: f64) -> bool {
    (p1 - p2).abs() <= KINK_REL * p1.abs().max(p2.abs()).max(1.0)
}

/// Piece-selected jet of a `min(exponential, cap)` construction.
fn capped_exponential(amp: f64, slope: f64, speed: f64, cap: f64, t: f64, x: f64) -> (Jet, bool) {
    let e = amp * (-slope * (x - speed * t)).exp();
    let jet = if e <= cap {
        Jet { v: e, t: slope * speed * e, x: -slope * e, xx: slope * slope * e }
    } else {
        Jet::constant(cap)
    };
    (jet, kink(e, cap))
}

/// Where a construction is defined and sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region", rename_all = "kebab-case")]
pub enum Region {
    /// `|x| < c0 t`
    Symmetric,
    /// `x >= speed t`; sampled on `[speed t, (speed + c0) t]`.
    Ahead { speed: f64 },
}

/// Construction values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecValue {
    pub components: Vec<(&'static str, Jet)>,
    pub kink: bool,
}

impl SpecValue {
    pub fn get(&self, name: &str) -> Option<&Jet> {
        self.components.iter().find(|(n, _)| *n == name).map(|(_, j)| j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    /// residual must be `>= -tol`
    Geq,
    /// residual must be `<= tol`
    Leq,
}

/// Residuals at one point. For pairs, `N1` is divided by the positive first
/// component (`u`, or `beta alpha1 + alpha2` on the sub side) and `N2` of the
/// super pair by `u + (1 - V+) + (1 - V-)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointChecks {
    pub values: Vec<(&'static str, Sense, f64)>,
    pub kink: bool,
}

/// A validated construction, with its traveling wave prepared when needed.
#[derive(Debug, Clone)]
pub struct Construction {
    spec: SuperSubSpec,
    wave: Option<TravelingWave>,
}

impl Construction {
    pub fn new(spec: SuperSubSpec) -> Result<Self> {
        let wave = match &spec {
            SuperSubSpec::Fbar { a, f_amplitude } => {
                positive("a", *a)?;
                positive("f_amplitude", *f_amplitude)?;
                None
            }
            SuperSubSpec::Cbar1(sp) => validate_upper_c(UpperCKind::Bar1, sp).map(|_| None)?,
            SuperSubSpec::Chat1(sp) => validate_upper_c(UpperCKind::Hat1, sp).map(|_| None)?,
            SuperSubSpec::Cbar2(sp) => validate_upper_c(UpperCKind::Bar2, sp).map(|_| None)?,
            SuperSubSpec::Chat2(sp) => validate_upper_c(UpperCKind::Hat2, sp).map(|_| None)?,
            SuperSubSpec::Hunder(sp) => {
                sp.params.validate().map_err(|e| Error::Constraint(e.to_string()))?;
                let m = &sp.params;
                positive("eps", sp.eps)?;
                positive("f_amplitude", sp.f_amplitude)?;
                require(sp.c_amplitude >= 1.0 + 2.0 * m.s, || {
                    format!("C amplitude {} must be at least 1 + 2s", sp.c_amplitude)
                })?;
                require(sp.h_amplitude >= 1.0, || {
                    format!("H amplitude {} must be at least 1", sp.h_amplitude)
                })?;
                let cs = derived_constants(m)?.c_star;
                let bound = (cs / m.d_h).min(((1.0 + m.s) / m.d_c).sqrt()).min((m.d_c * (1.0 + m.s)).sqrt());
                require(sp.lambda_h > 0.0 && sp.lambda_h <= bound, || {
                    format!("lambda_h = {} must lie in (0, {bound}]", sp.lambda_h)
                })?;
                None
            }
            SuperSubSpec::SuperPair(sp) => {
                sp.validate()?;
                Some(solve_traveling_wave(sp.d_c, sp.c1, None, DEFAULT_WAVE_TOL)?)
            }
            SuperSubSpec::SubPair(sp) => {
                sp.validate()?;
                Some(solve_traveling_wave(sp.d_c, sp.c1, None, DEFAULT_WAVE_TOL)?)
            }
        };
        Ok(Construction { spec, wave })
    }

    pub fn spec(&self) -> &SuperSubSpec {
        &self.spec
    }

    pub fn wave(&self) -> Option<&TravelingWave> {
        self.wave.as_ref()
    }

    pub fn region(&self) -> Region {
        match &self.spec {
            SuperSubSpec::Fbar { .. } | SuperSubSpec::SuperPair(_) | SuperSubSpec::SubPair(_) => Region::Symmetric,
            SuperSubSpec::Cbar1(sp) => Region::Ahead { speed: upper_c_shape(UpperCKind::Bar1, &sp.params, sp.eps).1 },
            SuperSubSpec::Chat1(sp) => Region::Ahead { speed: upper_c_shape(UpperCKind::Hat1, &sp.params, sp.eps).1 },
            SuperSubSpec::Cbar2(sp) => Region::Ahead { speed: upper_c_shape(UpperCKind::Bar2, &sp.params, sp.eps).1 },
            SuperSubSpec::Chat2(sp) => Region::Ahead { speed: upper_c_shape(UpperCKind::Hat2, &sp.params, sp.eps).1 },
            SuperSubSpec::Hunder(sp) => Region::Ahead { speed: self.h_speed(sp) },
        }
    }

    fn h_speed(&self, sp: &LowerHSpec) -> f64 {
        let m = &sp.params;
        2.0 * m.a.sqrt().max((m.d_c * (1.0 + m.s)).sqrt()) + 2.0 * sp.eps
    }

    fn check_point(&self, t: f64, x: f64) -> Result<()> {
        if !(t > 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("constructions are defined for t > 0, got t = {t}")));
        }
        if let Region::Ahead { speed } = self.region() {
            let edge = speed * t;
            if x < edge - 1e-12 * edge.abs().max(1.0) {
                return Err(Error::Domain(format!(
                    "{} is defined only on the leading edge x >= {speed} t; got x = {x} at t = {t}",
                    self.spec.kind_name()
                )));
            }
        }
        Ok(())
    }

    fn upper_c_jet(kind: UpperCKind, sp: &UpperCSpec, t: f64, x: f64) -> (Jet, bool, f64) {
        let m = &sp.params;
        let (slope, speed, farmer_led) = upper_c_shape(kind, m, sp.eps);
        let (jet, k) = capped_exponential(sp.c_amplitude, slope, speed, 1.0 + 2.0 * m.s, t, x);
        let fb = farmer_bound(m, farmer_led, sp.f_amplitude, t, x);
        (jet, k, fb)
    }

    fn h_jet(&self, sp: &LowerHSpec, t: f64, x: f64) -> (Jet, bool) {
        let speed = self.h_speed(sp);
        let l = sp.lambda_h;
        let e = sp.h_amplitude * (-l * (x - speed * t)).exp();
        let jet = if e < 1.0 {
            Jet { v: 1.0 - e, t: -l * speed * e, x: l * e, xx: -l * l * e }
        } else {
            Jet::constant(0.0)
        };
        (jet, kink(1.0 - e, 0.0))
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<SpecValue> {
        self.check_point(t, x)?;
        Ok(match &self.spec {
            SuperSubSpec::Fbar { a, f_amplitude } => {
                let (jet, k) = fbar_jet(*a, *f_amplitude, t, x);
                SpecValue { components: vec![("F", jet)], kink: k }
            }
            SuperSubSpec::Cbar1(sp) => self.c_value(UpperCKind::Bar1, sp, t, x),
            SuperSubSpec::Chat1(sp) => self.c_value(UpperCKind::Hat1, sp, t, x),
            SuperSubSpec::Cbar2(sp) => self.c_value(UpperCKind::Bar2, sp, t, x),
            SuperSubSpec::Chat2(sp) => self.c_value(UpperCKind::Hat2, sp, t, x),
            SuperSubSpec::Hunder(sp) => {
                let (jet, k) = self.h_jet(sp, t, x);
                SpecValue { components: vec![("H", jet)], kink: k }
            }
            SuperSubSpec::SuperPair(sp) => {
                let p = self.super_parts(sp, t, x)?;
                SpecValue { components: vec![("u", p.u_jet()), ("v", p.v_jet(sp.c1))], kink: false }
            }
            SuperSubSpec::SubPair(sp) => {
                let p = self.sub_parts(sp, t, x)?;
                SpecValue { components: vec![("u", p.u_jet()), ("v", p.v_jet(sp.c1, sp.theta))], kink: false }
            }
        })
    }

    fn c_value(&self, kind: UpperCKind, sp: &UpperCSpec, t: f64, x: f64) -> SpecValue {
        let (jet, k, _) = Self::upper_c_jet(kind, sp, t, x);
        SpecValue { components: vec![("C", jet)], kink: k }
    }

    fn c_checks(kind: UpperCKind, sp: &UpperCSpec, t: f64, x: f64) -> PointChecks {
        let m = &sp.params;
        let (c, k, fb) = Self::upper_c_jet(kind, sp, t, x);
        // bilinear in (F, H): the minimum over the box sits at a corner
        let mut worst = f64::INFINITY;
        for f in [0.0, fb] {
            for h in [0.0, 1.0] {
                let r = c.t - m.d_c * c.xx - c.v * (1.0 - c.v - f) - m.s * h * (c.v + f);
                worst = worst.min(r);
            }
        }
        PointChecks { values: vec![("N_C", Sense::Geq, worst)], kink: k }
    }

    /// Residuals of the inequalities each construction must satisfy.
    pub fn checks(&self, t: f64, x: f64) -> Result<PointChecks> {
        self.check_point(t, x)?;
        Ok(match &self.spec {
            SuperSubSpec::Fbar { a, f_amplitude } => {
                let (jet, k) = fbar_jet(*a, *f_amplitude, t, x);
                // worst case C = 0
                let r = residual_n1(&jet, &Jet::default(), *a);
                PointChecks { values: vec![("N1", Sense::Geq, r)], kink: k }
            }
            SuperSubSpec::Cbar1(sp) => Self::c_checks(UpperCKind::Bar1, sp, t, x),
            SuperSubSpec::Chat1(sp) => Self::c_checks(UpperCKind::Hat1, sp, t, x),
            SuperSubSpec::Cbar2(sp) => Self::c_checks(UpperCKind::Bar2, sp, t, x),
            SuperSubSpec::Chat2(sp) => Self::c_checks(UpperCKind::Hat2, sp, t, x),
            SuperSubSpec::Hunder(sp) => {
                let m = &sp.params;
                let (h, k) = self.h_jet(sp, t, x);
                let kind = upper_c_kind_for(m);
                let cs = UpperCSpec { params: *m, f_amplitude: sp.f_amplitude, c_amplitude: sp.c_amplitude, eps: sp.eps };
                let (c, _, fb) = Self::upper_c_jet(kind, &cs, t, x);
                let total = fb + c.v;
                let r = h.t - m.d_h * h.xx - m.b * h.v * (1.0 - h.v - m.g * total);
                PointChecks { values: vec![("N_H", Sense::Leq, r)], kink: k }
            }
            SuperSubSpec::SuperPair(sp) => {
                let p = self.super_parts(sp, t, x)?;
                let w = p.wp.w + p.wm.w;
                let n1 = p.ratio_free - sp.a_coeff * w;
                let ln_scale = ln_add_exp(p.ln_u, ln_add_exp(p.wp.ln_w, p.wm.ln_w));
                let ru = (p.ln_u - ln_scale).exp();
                let rp = (p.wp.ln_w - ln_scale).exp();
                let n2 = 2.0 * rp * p.wm.w + ru * w - ru * p.ratio_dc;
                PointChecks { values: vec![("N1", Sense::Geq, n1), ("N2", Sense::Leq, n2)], kink: false }
            }
            SuperSubSpec::SubPair(sp) => {
                let p = self.sub_parts(sp, t, x)?;
                let eta = p.eta;
                let gap = p.wp.w + p.wm.w - eta;
                // N1 / (beta alpha1 + alpha2)
                let d = p.ln_a2 - p.ln_ba1;
                let (fa, fb) = if d <= 0.0 {
                    let r = d.exp();
                    (1.0 / (1.0 + r), r / (1.0 + r))
                } else {
                    let r = (-d).exp();
                    (r / (1.0 + r), 1.0 / (1.0 + r))
                };
                let n1 = p.beta_log_rate * fa - sp.a_coeff * (fa - fb) * gap;
                let (wp, wm) = (p.wp.w, p.wm.w);
                let big_w = wp + wm;
                let ba1 = p.ln_ba1.exp();
                let a2 = p.ln_a2.exp();
                let u = ba1 - a2;
                let lu = ba1 * (p.beta_log_rate + (1.0 - sp.d_c) * p.xx1) - a2 * (1.0 - sp.d_c) * p.xx2;
                let v = 1.0 - big_w - u + eta;
                let forcing = sp.s * (-sp.gamma_h * t).exp();
                let n2 = eta + 2.0 * wp * wm - 2.0 * big_w * eta + eta * eta + u * gap - lu
                    - (1.0 + sp.theta) * eta / t
                    - forcing * (u + v);
                let side = v - forcing;
                PointChecks {
                    values: vec![("N1", Sense::Leq, n1), ("N2", Sense::Geq, n2), ("side", Sense::Geq, side)],
                    kink: false,
                }
            }
        })
    }

    fn super_parts(&self, sp: &SuperPairSpec, t: f64, x: f64) -> Result<SuperParts> {
        let wave = self.wave.as_ref().expect("pair constructions carry a wave");
        let heat = sp.heat();
        let al = heat.eval(t, x)?;
        let p = sp.exponent();
        let one_minus = -(-sp.tau * t).exp_m1();
        // tau e^{-tau t} / (1 - e^{-tau t})
        let growth = sp.tau / (sp.tau * t).exp_m1();
        let base = p / t + growth;
        let ln_u = p * t.ln() + one_minus.ln() + al.ln_value;
        Ok(SuperParts {
            ln_u,
            x_ratio: al.x_ratio,
            xx_ratio: al.xx_ratio,
            t_ratio: base + al.t_ratio(),
            ratio_free: base + (heat.diffusivity - 1.0) * al.xx_ratio,
            ratio_dc: base + (heat.diffusivity - sp.d_c) * al.xx_ratio,
            wp: wave.eval(x - sp.c1 * t),
            wm: wave.eval(-x - sp.c1 * t),
        })
    }

    fn sub_parts(&self, sp: &SubPairSpec, t: f64, x: f64) -> Result<SubParts> {
        let wave = self.wave.as_ref().expect("pair constructions carry a wave");
        let a1 = indicator_heat(t, x, sp.b2, 1.0)?;
        let a2 = HeatProfileSpec { b1: sp.b3(), q: sp.k(), diffusivity: 1.0 }.eval(t, x)?;
        let ln_beta = sp.b4 / (sp.delta * (1.0 + t).powf(sp.delta));
        Ok(SubParts {
            ln_ba1: ln_beta + a1.ln_value,
            ln_a2: a2.ln_value,
            x1: a1.x_ratio,
            xx1: a1.xx_ratio,
            x2: a2.x_ratio,
            xx2: a2.xx_ratio,
            beta_log_rate: -sp.b4 * (1.0 + t).powf(-(1.0 + sp.delta)),
            eta: sp.b4 * t.powf(-(1.0 + sp.theta)),
            t,
            wp: wave.eval(x - sp.c1 * t - sp.zeta0),
            wm: wave.eval(-x - sp.c1 * t - sp.zeta0),
        })
    }
}

fn fbar_jet(a: f64, amp: f64, t: f64, x: f64) -> (Jet, bool) {
    let ra = a.sqrt();
    let e = amp * (-ra * (x.abs() - 2.0 * ra * t)).exp();
    if e <= 1.0 {
        let sx = if x >= 0.0 { 1.0 } else { -1.0 };
        (Jet { v: e, t: 2.0 * a * e, x: -ra * sx * e, xx: a * e }, kink(e, 1.0) || x == 0.0)
    } else {
        (Jet::constant(1.0), kink(e, 1.0))
    }
}

struct SuperParts {
    ln_u: f64,
    x_ratio: f64,
    xx_ratio: f64,
    /// `u_t / u`
    t_ratio: f64,
    /// `(u_t - u_xx) / u`
    ratio_free: f64,
    /// `(u_t - d_c u_xx) / u`
    ratio_dc: f64,
    wp: crate::waves::WavePoint,
    wm: crate::waves::WavePoint,
}

impl SuperParts {
    fn u_jet(&self) -> Jet {
        let u = self.ln_u.exp();
        Jet { v: u, t: u * self.t_ratio, x: u * self.x_ratio, xx: u * self.xx_ratio }
    }

    fn v_jet(&self, c1: f64) -> Jet {
        let u = self.u_jet();
        let (p, m) = (&self.wp, &self.wm);
        Jet {
            v: (p.v - m.w) - u.v,
            t: -c1 * (p.dv + m.dv) - u.t,
            x: p.dv - m.dv - u.x,
            xx: p.d2v + m.d2v - u.xx,
        }
    }
}

struct SubParts {
    ln_ba1: f64,
    ln_a2: f64,
    x1: f64,
    xx1: f64,
    x2: f64,
    xx2: f64,
    /// `beta' / beta`
    beta_log_rate: f64,
    eta: f64,
    t: f64,
    wp: crate::waves::WavePoint,
    wm: crate::waves::WavePoint,
}

impl SubParts {
    fn u_jet(&self) -> Jet {
        let ba1 = self.ln_ba1.exp();
        let a2 = self.ln_a2.exp();
        Jet {
            v: ba1 - a2,
            t: ba1 * (self.beta_log_rate + self.xx1) - a2 * self.xx2,
            x: ba1 * self.x1 - a2 * self.x2,
            xx: ba1 * self.xx1 - a2 * self.xx2,
        }
    }

    fn v_jet(&self, c1: f64, theta: f64) -> Jet {
        let u = self.u_jet();
        let (p, m) = (&self.wp, &self.wm);
        Jet {
            v: (p.v - m.w) - u.v + self.eta,
            t: -c1 * (p.dv + m.dv) - u.t - (1.0 + theta) * self.eta / self.t,
            x: p.dv - m.dv - u.x,
            xx: p.d2v + m.d2v - u.xx,
        }
    }
}

pub fn eval_spec(spec: &SuperSubSpec, t: f64, x: f64) -> Result<SpecValue> {
    Construction::new(*spec)?.eval(t, x)
}

/// Sampled portion of `{t > T, |x| < c0 t}` up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    #[serde(rename = "T")]
    pub t_start: f64,
    pub c0: f64,
    pub t_max: f64,
    #[serde(default = "default_nt")]
    pub n_t: usize,
    #[serde(default = "default_nx")]
    pub n_x: usize,
}

fn default_nt() -> usize {
    DEFAULT_T_SAMPLES
}
fn default_nx() -> usize {
    DEFAULT_X_SAMPLES
}

impl Wedge {
    pub fn new(t_start: f64, c0: f64, t_max: f64) -> Result<Self> {
        let w = Wedge { t_start, c0, t_max, n_t: DEFAULT_T_SAMPLES, n_x: DEFAULT_X_SAMPLES };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start > 0.0 && self.t_start.is_finite()) {
            return Err(Error::Validation(format!("wedge start must be positive, got {}", self.t_start)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::Validation(format!("wedge opening c0 must be positive, got {}", self.c0)));
        }
        if self.n_t < 1 || self.n_x < 2 {
            return Err(Error::Validation("wedge needs at least 1 time and 2 space samples".into()));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        !(self.t_max > self.t_start)
    }

    pub fn times(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        if self.n_t == 1 {
            return vec![self.t_start];
        }
        let dt = (self.t_max - self.t_start) / (self.n_t - 1) as f64;
        (0..self.n_t).map(|i| self.t_start + i as f64 * dt).collect()
    }

    /// Space samples at time `t`; the symmetric wedge is sampled at cell
    /// midpoints so that `x = +-c0 t` is excluded.
    pub fn positions(&self, region: Region, t: f64) -> Vec<f64> {
        let n = self.n_x;
        match region {
            Region::Symmetric => {
                let w = 2.0 * self.c0 * t / n as f64;
                (0..n).map(|j| -self.c0 * t + (j as f64 + 0.5) * w).collect()
            }
            Region::Ahead { speed } => {
                let w = self.c0 * t / (n - 1) as f64;
                (0..n).map(|j| speed * t + j as f64 * w).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub sense: Sense,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub x: f64,
    pub check: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub kind: String,
    pub spec: SuperSubSpec,
    pub wedge: Wedge,
    pub region: Region,
    pub tolerance: f64,
    pub samples: usize,
    pub kinks_excluded: usize,
    pub checks: Vec<CheckSummary>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
    /// Earlier wedge starts tried before this one, when escalated.
    pub escalated_from: Vec<f64>,
    pub pass: bool,
}

/// Residuals on the wedge lattice, row-major in time.
pub fn residual_field(c: &Construction, wedge: &Wedge) -> Result<Vec<(f64, f64, PointChecks)>> {
    wedge.validate()?;
    let region = c.region();
    let rows: Vec<Result<Vec<(f64, f64, PointChecks)>>> = wedge
        .times()
        .into_par_iter()
        .map(|t| {
            wedge
                .positions(region, t)
                .into_iter()
                .map(|x| c.checks(t, x).map(|pc| (t, x, pc)))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Evaluate the sign conditions of `spec` on the wedge lattice.
pub fn certify_signs(spec: &SuperSubSpec, wedge: &Wedge, tolerance: f64) -> Result<ResidualReport> {
    let c = Construction::new(*spec)?;
    certify_construction(&c, wedge, tolerance)
}

pub fn certify_construction(c: &Construction, wedge: &Wedge, tolerance: f64) -> Result<ResidualReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::Validation(format!("tolerance must be nonnegative, got {tolerance}")));
    }
    if let SuperSubSpec::SuperPair(SuperPairSpec { c0, .. }) | SuperSubSpec::SubPair(SubPairSpec { c0, .. }) = c.spec() {
        if wedge.c0 > *c0 * (1.0 + 1e-12) {
            return Err(Error::Constraint(format!(
                "wedge opening {} exceeds the construction's c0 = {c0}",
                wedge.c0
            )));
        }
    }
    let field = residual_field(c, wedge)?;
    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut violations = Vec::new();
    let mut count = 0;
    let mut kinks = 0;
    for (t, x, pc) in &field {
        if checks.is_empty() {
            checks = pc
                .values
                .iter()
                .map(|(n, s, _)| CheckSummary { name: n.to_string(), sense: *s, min: f64::INFINITY, max: f64::NEG_INFINITY })
                .collect();
        }
        if pc.kink {
            kinks += 1;
        }
        for (cs, (name, sense, v)) in checks.iter_mut().zip(&pc.values) {
            cs.min = cs.min.min(*v);
            cs.max = cs.max.max(*v);
            let bad = match sense {
                Sense::Geq => *v < -tolerance,
                Sense::Leq => *v > tolerance,
            } || v.is_nan();
            if bad && !pc.kink {
                count += 1;
                if violations.len() < MAX_LISTED_VIOLATIONS {
                    violations.push(Violation { t: *t, x: *x, check: name.to_string(), value: *v });
                }
            }
        }
    }
    Ok(ResidualReport {
        kind: c.spec().kind_name().to_string(),
        spec: *c.spec(),
        wedge: *wedge,
        region: c.region(),
        tolerance,
        samples: field.len(),
        kinks_excluded: kinks,
        checks,
        violation_count: count,
        violations,
        escalated_from: Vec::new(),
        pass: count == 0,
    })
}

/// Double the wedge start (keeping its length) until the certificate passes
/// or the start exceeds `cap`. Returns the last report either way.
pub fn certify_escalating(spec: &SuperSubSpec, wedge: &Wedge, tolerance: f64, cap: f64) -> Result<ResidualReport> {
    let c = Construction::new(*spec)?;
    let span = wedge.t_max - wedge.t_start;
    let mut w = *wedge;
    let mut tried = Vec::new();
    loop {
        let mut rep = certify_construction(&c, &w, tolerance)?;
        if rep.pass || 2.0 * w.t_start > cap {
            rep.escalated_from = tried;
            return Ok(rep);
        }
        tried.push(w.t_start);
        w.t_start *= 2.0;
        w.t_max = w.t_start + span;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingSummary {
    pub name: String,
    /// Smallest `upper - lower` over the samples.
    pub min_slack: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingViolation {
    pub t: f64,
    pub x: f64,
    pub comparison: String,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub kind: String,
    pub spec: SuperSubSpec,
    pub wedge: Wedge,
    pub snapshots: usize,
    pub samples: usize,
    pub comparisons: Vec<OrderingSummary>,
    pub violation_count: usize,
    pub violations: Vec<OrderingViolation>,
    pub pass: bool,
}

/// Node-wise comparison of a simulation against a construction on the wedge:
/// `F <= u`, `v <= C` for the super pair, `u <= F`, `C <= v` for the sub pair,
/// `F <= Fbar` for the farmer bound.
pub fn verify_ordering(record: &SimulationRecord, spec: &SuperSubSpec, wedge: &Wedge) -> Result<OrderingReport> {
    wedge.validate()?;
    let c = Construction::new(*spec)?;
    let names: Vec<&'static str> = match spec {
        SuperSubSpec::Fbar { .. } => vec!["F <= Fbar"],
        SuperSubSpec::SuperPair(_) => vec!["F <= u", "v <= C"],
        SuperSubSpec::SubPair(_) => vec!["u <= F", "C <= v"],
        other => {
            return Err(Error::Unsupported(format!(
                "ordering checks cover Fbar and the pair constructions, not {}",
                other.kind_name()
            )))
        }
    };
    let mut comparisons: Vec<OrderingSummary> = names
        .iter()
        .map(|n| OrderingSummary { name: n.to_string(), min_slack: f64::INFINITY, violations: 0 })
        .collect();
    let empty = |comparisons| OrderingReport {
        kind: spec.kind_name().into(),
        spec: *spec,
        wedge: *wedge,
        snapshots: 0,
        samples: 0,
        comparisons,
        violation_count: 0,
        violations: Vec::new(),
        pass: true,
    };
    if wedge.is_empty() {
        return Ok(empty(comparisons));
    }
    let snaps: Vec<_> = record.snapshots_in(wedge.t_start, wedge.t_max).filter(|s| s.t > 0.0).collect();
    let last = record.snapshots.last().map(|s| s.t).unwrap_or(f64::NEG_INFINITY);
    if snaps.is_empty() || last < wedge.t_max - 1e-9 {
        return Err(Error::Coverage(format!(
            "record snapshots end at t = {last}, wedge needs [{}, {}]",
            wedge.t_start, wedge.t_max
        )));
    }
    let reach = wedge.c0 * wedge.t_max;
    if reach > record.grid.x_max.min(-record.grid.x_min) {
        return Err(Error::Coverage(format!(
            "wedge reaches |x| = {reach} but the grid spans [{}, {}]",
            record.grid.x_min, record.grid.x_max
        )));
    }
    let grid = record.grid;
    let rows: Vec<Result<Vec<(f64, f64, usize, f64)>>> = snaps
        .par_iter()
        .map(|s| {
            let mut out = Vec::new();
            for i in grid.indices_within(wedge.c0 * s.t) {
                let x = grid.x(i);
                if x.abs() >= wedge.c0 * s.t {
                    continue;
                }
                let val = c.eval(s.t, x)?;
                match spec {
                    SuperSubSpec::Fbar { .. } => {
                        out.push((s.t, x, 0, val.components[0].1.v - s.f[i]));
                    }
                    SuperSubSpec::SuperPair(_) => {
                        out.push((s.t, x, 0, val.components[0].1.v - s.f[i]));
                        out.push((s.t, x, 1, s.c[i] - val.components[1].1.v));
                    }
                    _ => {
                        out.push((s.t, x, 0, s.f[i] - val.components[0].1.v));
                        out.push((s.t, x, 1, val.components[1].1.v - s.c[i]));
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut violations = Vec::new();
    let mut count = 0;
    let mut samples = 0;
    for row in rows {
        for (t, x, k, slack) in row? {
            samples += 1;
            let cs = &mut comparisons[k];
            cs.min_slack = cs.min_slack.min(slack);
            if slack < 0.0 || slack.is_nan() {
                cs.violations += 1;
                count += 1;
                if violations.len() < MAX_LISTED_VIOLATIONS {
                    violations.push(OrderingViolation { t, x, comparison: cs.name.clone(), slack });
                }
            }
        }
    }
    Ok(OrderingReport {
        samples: samples / names.len(),
        snapshots: snaps.len(),
        violation_count: count,
        violations,
        pass: count == 0,
        ..empty(comparisons)
    })
}

/// Farmer bound amplitude dominating the initial data:
/// `A1 = amplitude e^{sqrt(a)(|center| + radius)}`.
pub fn calibrate_fbar(record: &SimulationRecord) -> SuperSubSpec {
    let a = record.params.a;
    let init = &record.initial;
    SuperSubSpec::Fbar {
        a,
        f_amplitude: init.amplitude.max(f64::MIN_POSITIVE) * (a.sqrt() * (init.center.abs() + init.radius)).exp(),
    }
}

fn snapshot_at<'a>(record: &'a SimulationRecord, t: f64) -> Result<&'a crate::solver::FieldState> {
    let s = record
        .snapshot_near(t)
        .ok_or_else(|| Error::Coverage("record has no snapshots".into()))?;
    if (s.t - t).abs() > 1e-6 {
        return Err(Error::Coverage(format!("no snapshot at t = {t} (nearest {})", s.t)));
    }
    Ok(s)
}

/// Super pair for a record: `q`, `tau` at the given fractions of their upper
/// bounds and `B1 = 4 e^{(q c0 - q^2) T}`.
pub fn calibrate_super_pair(record: &SimulationRecord, wedge: &Wedge, c1: f64, q_frac: f64, tau_frac: f64) -> Result<SuperPairSpec> {
    let m = &record.params;
    let (d_c, c0) = (m.d_c, wedge.c0);
    check_wave_speed(d_c, c0, c1)?;
    let q = q_frac * super_pair_q_bound(d_c, c0, c1);
    let tau = tau_frac * super_pair_tau_bound(d_c, c0, c1);
    let sp = SuperPairSpec {
        d_c,
        c0,
        c1,
        q,
        tau,
        b1: 4.0 * ((q * c0 - q * q) * wedge.t_start).exp(),
        a_coeff: m.a,
    };
    sp.validate()?;
    Ok(sp)
}

/// Sub pair for a record, with `eps1 = inf F` and `eps2 = sup (C - 1)^+` on
/// `|x| <= c0 T` at the wedge start: `zeta0` puts `1 - V(-zeta0)` below
/// `1e-6 eps2`-scale, `B4` satisfies
/// `2 V(-zeta0) - 1 - eps1/2 + B4 T^{-(1+theta)} >= 1 + eps2`, and
/// `B2 = (eps1/4) e^{-B4/(delta (1+T)^delta)}`.
pub fn calibrate_sub_pair(record: &SimulationRecord, wedge: &Wedge, c1: f64) -> Result<SubPairSpec> {
    let m = &record.params;
    let (d_c, c0, t0) = (m.d_c, wedge.c0, wedge.t_start);
    check_wave_speed(d_c, c0, c1)?;
    let snap = snapshot_at(record, t0)?;
    let grid = record.grid;
    let mut eps1 = f64::INFINITY;
    let mut eps2: f64 = 0.0;
    for i in grid.indices_within(c0 * t0) {
        eps1 = eps1.min(snap.f[i]);
        eps2 = eps2.max(snap.c[i] - 1.0);
    }
    if !(eps1 > 0.0) {
        return Err(Error::Domain(format!("F vanishes in the wedge at t = {t0}; no sub pair fits below it")));
    }
    let (delta, theta) = (0.25, 0.45);
    let wave = solve_traveling_wave(d_c, c1, None, DEFAULT_WAVE_TOL)?;
    let target = 1e-3 * (eps1 + eps2).max(1e-12);
    let mut zeta0: f64 = 1.0;
    while wave.eval(-zeta0).w > target {
        zeta0 *= 2.0;
    }
    let need = t0.powf(1.0 + theta) * (2.0 * wave.eval(-zeta0).w + 0.5 * eps1 + eps2);
    let b4 = (1.01 * need).max(1.5);
    let b2 = 0.25 * eps1 * (-b4 / (delta * (1.0 + t0).powf(delta))).exp();
    let sp = SubPairSpec {
        d_c,
        c0,
        c1,
        b2: b2.min(0.5),
        gamma: 0.5,
        b4,
        delta,
        theta,
        zeta0,
        k: None,
        s: m.s,
        gamma_h: 0.1,
        a_coeff: m.a,
    };
    sp.validate()?;
    Ok(sp)
}

/// Which field each component of a construction bounds.
pub fn bounded_fields(spec: &SuperSubSpec) -> Vec<Field> {
    match spec {
        SuperSubSpec::Fbar { .. } => vec![Field::F],
        SuperSubSpec::Cbar1(_) | SuperSubSpec::Chat1(_) | SuperSubSpec::Cbar2(_) | SuperSubSpec::Chat2(_) => vec![Field::C],
        SuperSubSpec::Hunder(_) => vec![Field::H],
        SuperSubSpec::SuperPair(_) | SuperSubSpec::SubPair(_) => vec![Field::F, Field::C],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn super_spec(d_c: f64, c0: f64, c1: f64) -> SuperPairSpec {
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

    fn sub_spec(d_c: f64) -> SubPairSpec {
        SubPairSpec {
            d_c,
            c0: 1.0,
            c1: 2.0 * d_c.sqrt() + 1.0,
            b2: 0.5,
            gamma: 0.5,
            b4: 2.0,
            delta: 0.1,
            theta: 0.3,
            zeta0: 1.0,
            k: None,
            s: 1.0,
            gamma_h: 0.1,
            a_coeff: 1.0,
        }
    }

    #[test]
    fn operators_on_trivial_states() {
        let z = Jet::default();
        assert_eq!(residual_n1(&z, &z, 1.0), 0.0);
        assert_eq!(residual_n2(&z, &z, 0.7, None, 3.0), 0.0);
        let one = Jet::constant(1.0);
        assert_eq!(residual_n1(&one, &z, 1.0), 0.0);
        // with the source, u = v = 0 still gives zero
        assert_eq!(residual_n2(&z, &z, 0.7, Some(Source { s: 1.0, gamma_h: 0.1 }), 3.0), 0.0);
    }

    #[test]
    fn fbar_kink_and_residual() {
        let (a, amp) = (1.5f64, 4.0f64);
        let spec = SuperSubSpec::Fbar { a, f_amplitude: amp };
        let t = 2.0;
        let xk = 2.0 * a.sqrt() * t + amp.ln() / a.sqrt();
        let v = eval_spec(&spec, t, xk).unwrap();
        assert!((v.components[0].1.v - 1.0).abs() < 1e-12 && v.kink);
        // exponential piece: residual = a Fbar^2
        let c = Construction::new(spec).unwrap();
        for &x in &[xk + 0.5, -(xk + 3.0), xk + 10.0] {
            let f = c.eval(t, x).unwrap().components[0].1;
            let r = c.checks(t, x).unwrap().values[0].2;
            assert!((r - a * f.v * f.v).abs() < 1e-14, "{r} {}", a * f.v * f.v);
        }
        // derivatives of the exponential piece: dF/dt = 2a F, F_xx = a F
        let f = c.eval(t, xk + 1.0).unwrap().components[0].1;
        assert!((f.t - 2.0 * a * f.v).abs() < 1e-15 && (f.xx - a * f.v).abs() < 1e-15);
    }

    #[test]
    fn kink_consistency_for_capped_constructions() {
        let m = ModelParams::new(3.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let sp = UpperCSpec { params: m, f_amplitude: 3.0, c_amplitude: 5.0, eps: 0.1 };
        let c = Construction::new(SuperSubSpec::Cbar1(sp)).unwrap();
        let (slope, speed, _) = upper_c_shape(UpperCKind::Bar1, &m, 0.1);
        let t = 10.0;
        let xk = speed * t + (5.0f64 / 3.0).ln() / slope;
        let at = c.eval(t, xk).unwrap().components[0].1.v;
        let left = c.eval(t, xk - 1e-13).unwrap().components[0].1.v;
        let right = c.eval(t, xk + 1e-13).unwrap().components[0].1.v;
        assert!((at - 3.0).abs() < 1e-12 && (left - at).abs() < 1e-12 && (right - at).abs() < 1e-12);
    }

    #[test]
    fn upper_c_region_enforced() {
        let m = ModelParams::new(3.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let sp = UpperCSpec { params: m, f_amplitude: 3.0, c_amplitude: 5.0, eps: 0.1 };
        let err = eval_spec(&SuperSubSpec::Cbar1(sp), 10.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Domain(ref s) if s.contains("leading edge")));
        // wrong case is a constraint failure
        assert!(matches!(
            Construction::new(SuperSubSpec::Cbar2(sp)),
            Err(Error::Constraint(_))
        ));
    }

    #[test]
    fn upper_c_growth_coefficient_matches_closed_form() {
        // exponential piece with worst-case corners F = 0, H = 1 reduces to
        // (l v - d l^2 - (1 + s)) C + C^2 for the C equation with F = 0
        let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 2.0, 1.0).unwrap();
        let sp = UpperCSpec { params: m, f_amplitude: 1.0, c_amplitude: 3.0, eps: 0.2 };
        let c = Construction::new(SuperSubSpec::Cbar2(sp)).unwrap();
        let (l, v, _) = upper_c_shape(UpperCKind::Bar2, &m, 0.2);
        let t = 30.0;
        let x = v * t + 40.0;
        let cv = c.eval(t, x).unwrap().components[0].1.v;
        let fb = farmer_bound(&m, false, 1.0, t, x);
        let r = c.checks(t, x).unwrap().values[0].2;
        let lin = (l * v - m.d_c * l * l - (1.0 + m.s)) * cv;
        let want = (lin + cv * cv).min(lin + cv * cv + cv * fb - m.s * fb);
        assert!((r - want).abs() < 1e-14 * cv.max(1e-300) + 1e-300, "{r} {want}");
        // epsilon sqrt((1+s)/d_c) coefficient
        assert!(((l * v - m.d_c * l * l - (1.0 + m.s)) - 0.2 * l).abs() < 1e-12);
    }

    #[test]
    fn hunder_lambda_bound_rejected() {
        let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let bound = (2.0 * 2f64.sqrt()).min(2f64.sqrt());
        let mk = |lh| LowerHSpec { params: m, f_amplitude: 3.0, c_amplitude: 3.0, h_amplitude: 2.0, eps: 0.1, lambda_h: lh };
        assert!(Construction::new(SuperSubSpec::Hunder(mk(bound))).is_ok());
        assert!(matches!(Construction::new(SuperSubSpec::Hunder(mk(bound * 1.01))), Err(Error::Constraint(_))));
    }

    #[test]
    fn super_pair_constraints() {
        let ok = super_spec(0.5, 2.5, 3.2);
        ok.validate().unwrap();
        let qb = super_pair_q_bound(0.5, 2.5, 3.2);
        let bad = SuperPairSpec { q: qb * 1.001, ..ok };
        assert!(matches!(bad.validate(), Err(Error::Constraint(_))));
        let tb = super_pair_tau_bound(0.5, 2.5, 3.2);
        assert!(matches!(SuperPairSpec { tau: tb, ..ok }.validate(), Err(Error::Constraint(_))));
        assert!(matches!(SuperPairSpec { c1: 1.4, ..ok }.validate(), Err(Error::Constraint(_))));
    }

    #[test]
    fn sub_pair_constraints() {
        sub_spec(1.0).validate().unwrap();
        for bad in [
            SubPairSpec { delta: 0.3, theta: 0.3, ..sub_spec(1.0) },
            SubPairSpec { theta: 0.5, ..sub_spec(1.0) },
            SubPairSpec { gamma: 1.0, ..sub_spec(1.0) },
            SubPairSpec { b4: 1.0, ..sub_spec(1.0) },
            SubPairSpec { b2: 1.0, ..sub_spec(1.0) },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Constraint(_))));
        }
    }

    #[test]
    fn super_pair_unit_diffusivity_reduces() {
        let sp = super_spec(1.0, 1.0, 2.8);
        let c = Construction::new(SuperSubSpec::SuperPair(sp)).unwrap();
        let heat = HeatProfileSpec { b1: sp.b1, q: sp.q, diffusivity: 1.0 };
        for &(t, x) in &[(3.0, 0.5), (20.0, -7.0), (60.0, 30.0)] {
            let u = c.eval(t, x).unwrap().components[0].1.v;
            let want = (1.0 - (-sp.tau * t).exp()) * heat.eval(t, x).unwrap().value();
            assert!((u / want - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pair_residuals_agree_with_generic_operators() {
        // moderate (t, x) where nothing underflows: the rearranged residuals
        // times their scale equal the textbook operators on the jets
        for &d in &[0.5, 1.0, 2.0] {
            let sp = super_spec(d, 1.0, 2.0 * d.sqrt() + 0.8);
            let c = Construction::new(SuperSubSpec::SuperPair(sp)).unwrap();
            for &(t, x) in &[(2.0, 0.3), (4.0, -1.5), (6.0, 2.0)] {
                let val = c.eval(t, x).unwrap();
                let (u, v) = (val.components[0].1, val.components[1].1);
                let pc = c.checks(t, x).unwrap();
                let n1 = residual_n1(&u, &v, sp.a_coeff);
                let n2 = residual_n2(&u, &v, d, None, t);
                let wp = 1.0 - c.wave().unwrap().value(x - sp.c1 * t);
                let wm = 1.0 - c.wave().unwrap().value(-x - sp.c1 * t);
                let scale2 = u.v + wp + wm;
                assert!((pc.values[0].2 * u.v - n1).abs() < 1e-8 * (n1.abs() + u.v), "d={d} N1 {} {n1}", pc.values[0].2 * u.v);
                assert!((pc.values[1].2 * scale2 - n2).abs() < 1e-8 * (n2.abs() + scale2), "d={d} N2");
            }
            let sb = sub_spec(d);
            let c = Construction::new(SuperSubSpec::SubPair(sb)).unwrap();
            for &(t, x) in &[(2.0, 0.3), (5.0, -1.5), (8.0, 2.5)] {
                let val = c.eval(t, x).unwrap();
                let (u, v) = (val.components[0].1, val.components[1].1);
                let pc = c.checks(t, x).unwrap();
                let n1 = residual_n1(&u, &v, sb.a_coeff);
                let src = Source { s: sb.s, gamma_h: sb.gamma_h };
                let n2 = residual_n2(&u, &v, d, Some(src), t);
                let beta = (sb.b4 / (sb.delta * (1.0 + t).powf(sb.delta))).exp();
                let a1 = indicator_heat(t, x, sb.b2, 1.0).unwrap().value();
                let a2 = HeatProfileSpec { b1: sb.b3(), q: sb.k(), diffusivity: 1.0 }.eval(t, x).unwrap().value();
                let scale1 = beta * a1 + a2;
                assert!((pc.values[0].2 * scale1 - n1).abs() < 1e-8 * (n1.abs() + scale1), "d={d} sub N1");
                // the textbook form cancels terms of size u^2
                assert!((pc.values[1].2 - n2).abs() < 1e-8 + 1e-13 * u.v * u.v, "d={d} sub N2 {} {n2}", pc.values[1].2);
            }
        }
    }

    #[test]
    fn pair_jets_match_finite_differences() {
        let sp = super_spec(0.5, 2.5, 3.2);
        let c = Construction::new(SuperSubSpec::SuperPair(sp)).unwrap();
        let sb = sub_spec(2.0);
        let cs = Construction::new(SuperSubSpec::SubPair(sb)).unwrap();
        for con in [&c, &cs] {
            let (t, x) = (3.0, 0.7);
            let (h, k) = (1e-4, 1e-4);
            for idx in 0..2 {
                let f = |t: f64, x: f64| con.eval(t, x).unwrap().components[idx].1.v;
                let j = con.eval(t, x).unwrap().components[idx].1;
                let jt = (f(t + k, x) - f(t - k, x)) / (2.0 * k);
                let jx = (f(t, x + h) - f(t, x - h)) / (2.0 * h);
                let jxx = (f(t, x + h) - 2.0 * f(t, x) + f(t, x - h)) / (h * h);
                let sc = j.v.abs().max(1.0);
                assert!((j.t - jt).abs() < 1e-6 * sc, "t-deriv {idx}: {} {jt}", j.t);
                assert!((j.x - jx).abs() < 1e-6 * sc);
                assert!((j.xx - jxx).abs() < 1e-4 * sc);
            }
        }
    }

    #[test]
    fn constructions_are_even() {
        let m = ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let specs = [
            SuperSubSpec::Fbar { a: 1.0, f_amplitude: 3.0 },
            SuperSubSpec::SuperPair(super_spec(0.5, 2.5, 3.2)),
            SuperSubSpec::SubPair(sub_spec(1.0)),
        ];
        let _ = m;
        for s in specs {
            let c = Construction::new(s).unwrap();
            for &(t, x) in &[(1.0, 0.4), (50.0, 12.0), (300.0, 200.0)] {
                let a = c.eval(t, x).unwrap();
                let b = c.eval(t, -x).unwrap();
                for ((_, ja), (_, jb)) in a.components.iter().zip(&b.components) {
                    assert!((ja.v - jb.v).abs() <= 1e-12 * ja.v.abs().max(1e-300));
                }
            }
        }
    }

    #[test]
    fn empty_wedge_is_vacuous() {
        let w = Wedge { t_start: 50.0, c0: 1.0, t_max: 50.0, n_t: 10, n_x: 10 };
        let rep = certify_signs(&SuperSubSpec::Fbar { a: 1.0, f_amplitude: 1.0 }, &w, 0.0).unwrap();
        assert!(rep.pass && rep.samples == 0);
    }

    #[test]
    fn fbar_certifies_at_zero_tolerance_outside_kinks() {
        let w = Wedge { t_start: 1.0, c0: 3.0, t_max: 20.0, n_t: 40, n_x: 81 };
        let rep = certify_signs(&SuperSubSpec::Fbar { a: 1.0, f_amplitude: 3.0 }, &w, 0.0).unwrap();
        assert!(rep.pass, "{:?}", rep.violations.first());
    }

    #[test]
    fn wedge_wider_than_pair_rejected() {
        let sp = super_spec(1.0, 1.0, 2.8);
        let w = Wedge { t_start: 50.0, c0: 1.5, t_max: 60.0, n_t: 4, n_x: 4 };
        assert!(matches!(certify_signs(&SuperSubSpec::SuperPair(sp), &w, 1e-12), Err(Error::Constraint(_))));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = SuperSubSpec::SubPair(sub_spec(0.5));
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"kind\":\"SubPair\""));
        let back: SuperSubSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
