//! Semi-analytic profiles: the logistic traveling wave, closed-form heat
//! solutions, the heat kernel and the Dirichlet eigenpair on `(-R, R)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf, ln_add_exp, ln_erfc};
use crate::stats::fit_line;

/// Sample spacing of the stored wave profile.
pub const WAVE_STEP: f64 = 0.01;
/// Default half-width of the profile is this many e-folds of the slower tail.
pub const WAVE_TAIL_EFOLDS: f64 = 40.0;
pub const DEFAULT_WAVE_TOL: f64 = 1e-8;

/// Amplitude of `1 - V` where integration leaves the unstable manifold.
const MANIFOLD_START: f64 = 1e-6;
const MAX_REFINE: u32 = 6;

/// Decay rate of `1 - V` at `-inf`: positive root of `d l^2 + c l - 1 = 0`.
pub fn wave_rate_minus(d_c: f64, c1: f64) -> f64 {
    // rationalized form avoids cancellation for large c1
    2.0 / (c1 + (c1 * c1 + 4.0 * d_c).sqrt())
}

/// Decay rate of `V` at `+inf`: smaller root of `d l^2 - c l + 1 = 0`.
pub fn wave_rate_plus(d_c: f64, c1: f64) -> f64 {
    let disc = (c1 * c1 - 4.0 * d_c).max(0.0);
    2.0 / (c1 + disc.sqrt())
}

/// Value and derivatives of the wave at one point. `w = 1 - V` is carried
/// separately so that tiny deficits keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePoint {
    pub v: f64,
    pub w: f64,
    /// `ln w`, finite even where `w` underflows.
    pub ln_w: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// Monotone front of `d_c V'' + c1 V' + V(1 - V) = 0`, `V(-inf) = 1`, `V(+inf) = 0`,
/// pinned by `V(0) = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelingWave {
    pub d_c: f64,
    pub c1: f64,
    pub lambda1: f64,
    pub lambda_plus: f64,
    pub xi_min: f64,
    pub step: f64,
    v: Vec<f64>,
    w: Vec<f64>,
    dv: Vec<f64>,
    /// Prefactor of `1 - V ~ M1 e^{lambda1 xi}` under the phase convention.
    pub m1: f64,
    /// Prefactor of `V ~ M+ e^{-lambda_plus xi}`.
    pub m_plus: f64,
    /// Largest finite-difference residual over interior samples.
    pub residual: f64,
}

/// Header fields for the wave output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct WaveSummary {
    pub c1: f64,
    pub d_c: f64,
    pub lambda1: f64,
    pub lambda_plus: f64,
    pub m1: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub step: f64,
    pub residual: f64,
    pub fitted_rate_minus: f64,
    pub fitted_rate_plus: f64,
}

pub fn solve_traveling_wave(d_c: f64, c1: f64, xi_range: Option<(f64, f64)>, tol: f64) -> Result<TravelingWave> {
    if !(d_c > 0.0 && d_c.is_finite()) {
        return Err(Error::Validation(format!("d_c must be positive, got {d_c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive, got {tol}")));
    }
    let c_min = 2.0 * d_c.sqrt();
    if !(c1 > c_min) || !c1.is_finite() {
        return Err(Error::Unsupported(format!(
            "wave speed {c1} must exceed the minimal speed 2 sqrt(d_c) = {c_min}"
        )));
    }
    let lambda1 = wave_rate_minus(d_c, c1);
    let lambda_plus = wave_rate_plus(d_c, c1);
    let (lo, hi) = match xi_range {
        Some(r) => r,
        None => {
            let l = WAVE_TAIL_EFOLDS / lambda1.min(lambda_plus);
            (-l, l)
        }
    };
    if !(lo < -1.0 && hi > 1.0) {
        return Err(Error::Validation(format!(
            "xi range ({lo}, {hi}) must contain a neighborhood of 0"
        )));
    }
    // snap to a lattice through 0
    let h = WAVE_STEP;
    let i0 = (-lo / h).ceil() as usize;
    let n = i0 + (hi / h).floor() as usize + 1;
    let xi_min = -(i0 as f64) * h;

    let mut sub = 1u32;
    loop {
        let wave = build(d_c, c1, lambda1, lambda_plus, xi_min, h, n, sub)?;
        if wave.residual < tol {
            return Ok(wave);
        }
        if sub >= 1 << MAX_REFINE {
            return Err(Error::Domain(format!(
                "wave residual {:e} above tolerance {tol:e} after refinement",
                wave.residual
            )));
        }
        sub *= 2;
    }
}

#[derive(Clone, Copy)]
enum Var {
    /// (w, w') with w = 1 - V
    Deficit,
    /// (V, V')
    Value,
}

fn rhs(var: Var, d_c: f64, c1: f64, y: [f64; 2]) -> [f64; 2] {
    match var {
        // d w'' + c w' - w(1 - w) = 0
        Var::Deficit => [y[1], (y[0] * (1.0 - y[0]) - c1 * y[1]) / d_c],
        // d V'' + c V' + V(1 - V) = 0
        Var::Value => [y[1], (-y[0] * (1.0 - y[0]) - c1 * y[1]) / d_c],
    }
}

fn rk4(var: Var, d_c: f64, c1: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = rhs(var, d_c, c1, y);
    let k2 = rhs(var, d_c, c1, add(y, k1, 0.5 * h));
    let k3 = rhs(var, d_c, c1, add(y, k2, 0.5 * h));
    let k4 = rhs(var, d_c, c1, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Second-order unstable manifold at `V = 1`: `w = A + kappa A^2` with `A = M e^{l xi}`.
fn manifold(amp: f64, lambda1: f64, c1: f64) -> (f64, f64) {
    let kappa = -1.0 / (3.0 - 2.0 * c1 * lambda1);
    let w = amp + kappa * amp * amp;
    let dw = lambda1 * amp + 2.0 * lambda1 * kappa * amp * amp;
    (w, dw)
}

struct Track {
    v: Vec<f64>,
    w: Vec<f64>,
    dv: Vec<f64>,
}

/// Integrate from node `start` (where the manifold amplitude is `amp_at_start`)
/// to the end of the lattice; nodes before `start` come from the manifold.
fn integrate(
    d_c: f64,
    c1: f64,
    lambda1: f64,
    xi_min: f64,
    h: f64,
    n: usize,
    start_xi: f64,
    sub: u32,
) -> Track {
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut dv = vec![0.0; n];
    let start = (((start_xi - xi_min) / h).ceil().max(0.0) as usize).min(n - 1);
    for i in 0..=start {
        let xi = xi_min + i as f64 * h;
        let amp = MANIFOLD_START * (lambda1 * (xi - start_xi)).exp();
        let (wi, dwi) = manifold(amp, lambda1, c1);
        w[i] = wi;
        v[i] = 1.0 - wi;
        dv[i] = -dwi;
    }
    let hs = h / sub as f64;
    let mut var = Var::Deficit;
    let mut y = [w[start], -dv[start]];
    for i in start + 1..n {
        for _ in 0..sub {
            y = rk4(var, d_c, c1, y, hs);
        }
        match var {
            Var::Deficit => {
                w[i] = y[0];
                v[i] = 1.0 - y[0];
                dv[i] = -y[1];
                if y[0] >= 0.5 {
                    var = Var::Value;
                    y = [v[i], dv[i]];
                }
            }
            Var::Value => {
                v[i] = y[0];
                w[i] = 1.0 - y[0];
                dv[i] = y[1];
            }
        }
    }
    Track { v, w, dv }
}

/// Location of `V = 1/2` by Hermite interpolation and bisection.
fn half_crossing(tr: &Track, xi_min: f64, h: f64) -> Option<f64> {
    let i = tr.v.windows(2).position(|p| p[0] >= 0.5 && p[1] < 0.5)?;
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let val = hermite(tr.v[i], tr.v[i + 1], h * tr.dv[i], h * tr.dv[i + 1], m);
        if val >= 0.5 {
            a = m;
        } else {
            b = m;
        }
    }
    Some(xi_min + (i as f64 + 0.5 * (a + b)) * h)
}

fn hermite(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
}

fn hermite_slope(y0: f64, y1: f64, m0: f64, m1: f64, s: f64) -> f64 {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1
}

#[allow(clippy::too_many_arguments)]
fn build(
    d_c: f64,
    c1: f64,
    lambda1: f64,
    lambda_plus: f64,
    xi_min: f64,
    h: f64,
    n: usize,
    sub: u32,
) -> Result<TravelingWave> {
    // Pass 1 on a local lattice locates the half crossing relative to the manifold start.
    let local_n = ((60.0 / lambda1.min(lambda_plus) + 40.0 / lambda1) / h) as usize + 8;
    let mut shift = {
        let tr = integrate(d_c, c1, lambda1, 0.0, h, local_n, 0.0, sub);
        half_crossing(&tr, 0.0, h).ok_or_else(|| Error::Domain("wave never reached V = 1/2".into()))?
    };
    let mut tr = integrate(d_c, c1, lambda1, xi_min, h, n, -shift, sub);
    for _ in 0..3 {
        let xc = half_crossing(&tr, xi_min, h).ok_or_else(|| Error::Domain("wave never reached V = 1/2".into()))?;
        if xc.abs() < 1e-13 {
            break;
        }
        shift += xc;
        tr = integrate(d_c, c1, lambda1, xi_min, h, n, -shift, sub);
    }
    let Track { v, w, dv } = tr;
    if v.iter().any(|&x| !(x.is_finite())) {
        return Err(Error::Domain("wave integration diverged".into()));
    }
    let m1 = {
        let kappa = -1.0 / (3.0 - 2.0 * c1 * lambda1);
        // invert w0 = A + kappa A^2 at the first node
        let amp = w[0] * (1.0 - kappa * w[0]);
        amp * (-lambda1 * xi_min).exp()
    };
    let xi_max = xi_min + (n - 1) as f64 * h;
    let m_plus = v[n - 1] * (lambda_plus * xi_max).exp();
    let mut wave = TravelingWave {
        d_c,
        c1,
        lambda1,
        lambda_plus,
        xi_min,
        step: h,
        v,
        w,
        dv,
        m1,
        m_plus,
        residual: 0.0,
    };
    wave.residual = wave.fd_residual();
    Ok(wave)
}

// sixth-order central difference weights
const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

impl TravelingWave {
    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_min + (self.len() - 1) as f64 * self.step
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.xi_min + i as f64 * self.step
    }

    /// Stored samples `(xi, V, V')`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).map(move |i| (self.xi(i), self.v[i], self.dv[i]))
    }

    pub fn deficits(&self) -> &[f64] {
        &self.w
    }

    fn second(&self, v: f64, w: f64, dv: f64) -> f64 {
        (-self.c1 * dv - v * w) / self.d_c
    }

    /// Largest ODE residual at interior samples, with derivatives taken by
    /// sixth-order central differences of the stored profile.
    fn fd_residual(&self) -> f64 {
        let h = self.step;
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 3..n.saturating_sub(3) {
            // difference whichever of V, 1 - V is smaller
            let use_w = self.w[i] < 0.5;
            let y = |j: usize| if use_w { self.w[j] } else { self.v[j] };
            let mut d1 = 0.0;
            let mut d2 = D2[0] * y(i);
            for k in 1..=3 {
                d1 += D1[k - 1] * (y(i + k) - y(i - k));
                d2 += D2[k] * (y(i + k) + y(i - k));
            }
            d1 /= h;
            d2 /= h * h;
            let r = self.d_c * d2 + self.c1 * d1 + if use_w { -1.0 } else { 1.0 } * self.v[i] * self.w[i];
            worst = worst.max(r.abs());
        }
        worst
    }

    pub fn eval(&self, xi: f64) -> WavePoint {
        let n = self.len();
        let h = self.step;
        if xi <= self.xi_min {
            let kappa = -1.0 / (3.0 - 2.0 * self.c1 * self.lambda1);
            let ln_amp = self.m1.ln() + self.lambda1 * xi;
            let amp = ln_amp.exp();
            let w = amp + kappa * amp * amp;
            let ln_w = ln_amp + (kappa * amp).ln_1p();
            let v = 1.0 - w;
            let dv = -(self.lambda1 * amp + 2.0 * self.lambda1 * kappa * amp * amp);
            return WavePoint { v, w, ln_w, dv, d2v: self.second(v, w, dv) };
        }
        if xi >= self.xi_max() {
            let v = self.m_plus * (-self.lambda_plus * xi).exp();
            let w = 1.0 - v;
            let dv = -self.lambda_plus * v;
            return WavePoint { v, w, ln_w: (-v).ln_1p(), dv, d2v: self.second(v, w, dv) };
        }
        let pos = (xi - self.xi_min) / h;
        let i = (pos.floor() as usize).min(n - 2);
        let s = pos - i as f64;
        let dd = |j: usize| self.second(self.v[j], self.w[j], self.dv[j]);
        let dv = hermite(self.dv[i], self.dv[i + 1], h * dd(i), h * dd(i + 1), s);
        let (v, w) = if self.w[i] < 0.5 {
            let w = hermite(self.w[i], self.w[i + 1], -h * self.dv[i], -h * self.dv[i + 1], s);
            (1.0 - w, w)
        } else {
            let v = hermite(self.v[i], self.v[i + 1], h * self.dv[i], h * self.dv[i + 1], s);
            (v, 1.0 - v)
        };
        WavePoint { v, w, ln_w: w.ln(), dv, d2v: self.second(v, w, dv) }
    }

    /// Interpolated slope of the stored `V` (independent of the stored `V'` field
    /// only through the Hermite basis).
    pub fn hermite_slope(&self, xi: f64) -> f64 {
        let h = self.step;
        let pos = ((xi - self.xi_min) / h).clamp(0.0, (self.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.len() - 2);
        hermite_slope(self.v[i], self.v[i + 1], h * self.dv[i], h * self.dv[i + 1], pos - i as f64) / h
    }

    pub fn value(&self, xi: f64) -> f64 {
        self.eval(xi).v
    }

    /// Log-slope regressions on the two tails: `(rate at -inf, rate at +inf)`.
    pub fn fitted_tail_rates(&self) -> Result<(f64, f64)> {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        let mut rx = Vec::new();
        let mut ry = Vec::new();
        for i in 0..self.len() {
            let (w, v) = (self.w[i], self.v[i]);
            if (1e-12..1e-4).contains(&w) && self.xi(i) < 0.0 {
                lx.push(self.xi(i));
                ly.push(w.ln());
            }
            if (1e-14..1e-6).contains(&v) && self.xi(i) > 0.0 {
                rx.push(self.xi(i));
                ry.push(v.ln());
            }
        }
        let left = fit_line(&lx, &ly)?;
        let right = fit_line(&rx, &ry)?;
        Ok((left.slope, -right.slope))
    }

    pub fn summary(&self) -> Result<WaveSummary> {
        let (fm, fp) = self.fitted_tail_rates()?;
        Ok(WaveSummary {
            c1: self.c1,
            d_c: self.d_c,
            lambda1: self.lambda1,
            lambda_plus: self.lambda_plus,
            m1: self.m1,
            xi_min: self.xi_min,
            xi_max: self.xi_max(),
            step: self.step,
            residual: self.residual,
            fitted_rate_minus: fm,
            fitted_rate_plus: fp,
        })
    }
}

/// `G(t, x) = exp(-x^2/4t) / sqrt(4 pi t)`.
pub fn heat_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok((-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt())
}

/// Heat flow started from `b1 e^{-q|x|}` with the given diffusivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatProfileSpec {
    #[serde(rename = "B1")]
    pub b1: f64,
    pub q: f64,
    pub diffusivity: f64,
}

/// A positive heat solution in log form plus its logarithmic derivatives,
/// so that ratios stay finite where the value itself underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatEval {
    pub ln_value: f64,
    /// `u_x / u`
    pub x_ratio: f64,
    /// `u_xx / u`
    pub xx_ratio: f64,
    pub diffusivity: f64,
}

impl HeatEval {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
    pub fn dx(&self) -> f64 {
        self.value() * self.x_ratio
    }
    pub fn dxx(&self) -> f64 {
        self.value() * self.xx_ratio
    }
    pub fn dt(&self) -> f64 {
        self.diffusivity * self.dxx()
    }
    /// `u_t / u`
    pub fn t_ratio(&self) -> f64 {
        self.diffusivity * self.xx_ratio
    }
}

impl HeatProfileSpec {
    pub fn new(b1: f64, q: f64, diffusivity: f64) -> Result<Self> {
        let s = Self { b1, q, diffusivity };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b1 > 0.0 && self.b1.is_finite()) {
            return Err(Error::Validation(format!("B1 must be positive, got {}", self.b1)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::Validation(format!("q must be positive, got {}", self.q)));
        }
        if !(self.diffusivity > 0.0 && self.diffusivity.is_finite()) {
            return Err(Error::Validation(format!("diffusivity must be positive, got {}", self.diffusivity)));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<HeatEval> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("heat solution needs t > 0, got {t}")));
        }
        let q = self.q;
        let s = self.diffusivity * t;
        let rs = s.sqrt();
        // alpha = (B1/2)(P + M)
        let ln_p = q * q * s - q * x + ln_erfc((2.0 * q * s - x) / (2.0 * rs));
        let ln_m = q * q * s + q * x + ln_erfc((2.0 * q * s + x) / (2.0 * rs));
        let ln_sum = ln_add_exp(ln_p, ln_m);
        // alpha_xx = (B1/2)(q^2 (P + M) - 2 q g),  g = e^{-x^2/4s}/sqrt(pi s)
        let ln_g = -x * x / (4.0 * s) - 0.5 * (PI * s).ln();
        Ok(HeatEval {
            ln_value: (0.5 * self.b1).ln() + ln_sum,
            x_ratio: q * (0.5 * (ln_m - ln_p)).tanh(),
            xx_ratio: q * q - 2.0 * q * (ln_g - ln_sum).exp(),
            diffusivity: self.diffusivity,
        })
    }
}

pub fn heat_solution_alpha(t: f64, x: f64, spec: &HeatProfileSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.eval(t, x)?.value())
}

/// Heat flow started from `amplitude * 1_(-1,1)`.
pub fn indicator_heat(t: f64, x: f64, amplitude: f64, diffusivity: f64) -> Result<HeatEval> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("heat solution needs t > 0, got {t}")));
    }
    if !(amplitude > 0.0) {
        return Err(Error::Validation(format!("amplitude must be positive, got {amplitude}")));
    }
    let s = diffusivity * t;
    let r = 2.0 * s.sqrt();
    let xa = x.abs();
    let (zm, zp) = ((xa - 1.0) / r, (xa + 1.0) / r);
    // value = (A/2)(erfc(zm) - erfc(zp))
    let ln_diff = if zm <= 0.0 {
        (erf(zp) - erf(zm)).ln()
    } else {
        let (a, b) = (ln_erfc(zm), ln_erfc(zp));
        a + (-(b - a).exp_m1()).ln()
    };
    let ln_value = (0.5 * amplitude).ln() + ln_diff;
    let ln_pref = (0.5 * amplitude).ln() - 0.5 * (PI * s).ln();
    let gp = (ln_pref - (xa + 1.0).powi(2) / (4.0 * s) - ln_value).exp();
    let gm = (ln_pref - (xa - 1.0).powi(2) / (4.0 * s) - ln_value).exp();
    let x_ratio = (gp - gm) * x.signum();
    let xx_ratio = (-(xa + 1.0) * gp + (xa - 1.0) * gm) / (2.0 * s);
    Ok(HeatEval { ln_value, x_ratio, xx_ratio, diffusivity })
}

/// `cos(pi x / 2R)` on `[-R, R]`, zero outside. `R` must be positive.
pub fn eigenfunction_phi(r: f64, x: f64) -> f64 {
    if x.abs() <= r {
        (PI * x / (2.0 * r)).cos()
    } else {
        0.0
    }
}

/// Principal Dirichlet eigenvalue of `-d^2/dx^2` on `(-R, R)`.
pub fn eigenvalue_mu(r: f64) -> f64 {
    PI * PI / (4.0 * r * r)
}
