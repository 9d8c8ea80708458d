//! Parameters, derived constants, steady states, reaction terms, the kinetic
//! ODE for (C, H) and its Lyapunov functional.
//!
//! The dimensionless system is
//!
//! ```text
//! F_t = F_xx       + a F (1 - F - C)
//! C_t = d_c C_xx   + C (1 - F - C) + s H (F + C)
//! H_t = d_h H_xx   + b H (1 - H - g (F + C))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to flag the excluded critical cases
/// `a = d_c (1 + s)` and `g = 1`.
pub const CRITICAL_TOL: f64 = 1e-9;

/// The nine dimensional parameters of the original system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginalParams {
    #[serde(rename = "D_f")]
    pub d_f: f64,
    #[serde(rename = "D_c")]
    pub d_c: f64,
    #[serde(rename = "D_h")]
    pub d_h: f64,
    pub r_f: f64,
    pub r_c: f64,
    pub r_h: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub e: f64,
}

impl OriginalParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("D_f", self.d_f),
            ("D_c", self.d_c),
            ("D_h", self.d_h),
            ("r_f", self.r_f),
            ("r_c", self.r_c),
            ("r_h", self.r_h),
            ("K", self.k),
            ("L", self.l),
            ("e", self.e),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// The six dimensionless parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub g: f64,
    pub d_c: f64,
    pub d_h: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, s: f64, g: f64, d_c: f64, d_h: f64) -> Result<Self> {
        let m = ModelParams { a, b, s, g, d_c, d_h };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `(name, value)` pairs in canonical key order.
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("a", self.a),
            ("b", self.b),
            ("s", self.s),
            ("g", self.g),
            ("d_c", self.d_c),
            ("d_h", self.d_h),
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.named().iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "a" => &mut self.a,
            "b" => &mut self.b,
            "s" => &mut self.s,
            "g" => &mut self.g,
            "d_c" => &mut self.d_c,
            "d_h" => &mut self.d_h,
            other => return Err(Error::Validation(format!("unknown model parameter `{other}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// True when either excluded critical case holds within [`CRITICAL_TOL`].
    pub fn is_critical(&self) -> bool {
        classify_regime(self, CRITICAL_TOL).is_critical()
    }
}

/// `a = r_f/r_c`, `b = r_h/r_c`, `s = eL/r_c`, `g = eK/r_h`,
/// `d_c = D_c/D_f`, `d_h = D_h/D_f`.
pub fn nondimensionalize(p: &OriginalParams) -> Result<ModelParams> {
    p.validate()?;
    ModelParams::new(
        p.r_f / p.r_c,
        p.r_h / p.r_c,
        p.e * p.l / p.r_c,
        p.e * p.k / p.r_h,
        p.d_c / p.d_f,
        p.d_h / p.d_f,
    )
}

/// Positive equilibrium `(0, C*, H*)`, present only for `g < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coexistence {
    pub c: f64,
    pub h: f64,
}

impl Coexistence {
    pub fn of(m: &ModelParams) -> Option<Self> {
        if m.g < 1.0 {
            let den = 1.0 + m.s * m.g;
            Some(Coexistence {
                c: (1.0 + m.s) / den,
                h: (1.0 - m.g) / den,
            })
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Farmer speed `2 sqrt(a)`.
    pub c_f: f64,
    /// Converted-farmer speed `2 sqrt(d_c (1 + s))`.
    pub c_c: f64,
    pub c_star: f64,
    #[serde(rename = "C_star")]
    pub c_eq: Option<f64>,
    #[serde(rename = "H_star")]
    pub h_eq: Option<f64>,
    /// Temporal exponent of the bump lower envelope.
    pub k_star: f64,
    /// Gaussian diffusivity of the bump upper envelope.
    pub d_star: f64,
    /// Lyapunov decay rate `min(C*, b H*)`.
    pub nu: Option<f64>,
}

pub fn derived_constants(m: &ModelParams) -> Result<DerivedConstants> {
    m.validate()?;
    let c_f = 2.0 * m.a.sqrt();
    let c_c = 2.0 * (m.d_c * (1.0 + m.s)).sqrt();
    let eq = Coexistence::of(m);
    Ok(DerivedConstants {
        c_f,
        c_c,
        c_star: c_f.max(c_c),
        c_eq: eq.map(|e| e.c),
        h_eq: eq.map(|e| e.h),
        k_star: (1.0 / (2.0 * m.d_c)).min(m.d_c / 2.0),
        d_star: m.d_c.max(1.0),
        nu: eq.map(|e| e.c.min(m.b * e.h)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Conversion {
    /// `g >= 1`
    High,
    /// `g < 1`
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpeedOrder {
    /// `a > d_c (1 + s)`
    FarmerLed,
    /// `a < d_c (1 + s)`
    ConvertLed,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub conversion: Conversion,
    pub speed_order: SpeedOrder,
    /// `|g - 1|` below tolerance.
    pub conversion_critical: bool,
}

impl RegimeLabel {
    pub fn is_critical(&self) -> bool {
        self.conversion_critical || self.speed_order == SpeedOrder::Critical
    }

    /// Figure number (1-4) of the matching spreading behaviour, if non-critical.
    pub fn figure(&self) -> Option<u8> {
        if self.is_critical() {
            return None;
        }
        Some(match (self.conversion, self.speed_order) {
            (Conversion::High, SpeedOrder::FarmerLed) => 1,
            (Conversion::High, SpeedOrder::ConvertLed) => 2,
            (Conversion::Low, SpeedOrder::FarmerLed) => 3,
            (Conversion::Low, SpeedOrder::ConvertLed) => 4,
            _ => unreachable!(),
        })
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}/{:?}", self.conversion, self.speed_order)?;
        if self.conversion_critical {
            write!(f, " (g critical)")?;
        }
        Ok(())
    }
}

/// `tol` is relative for the speed comparison and absolute for `g - 1`.
pub fn classify_regime(m: &ModelParams, tol: f64) -> RegimeLabel {
    let cc = m.d_c * (1.0 + m.s);
    let diff = m.a - cc;
    let speed_order = if diff.abs() < tol * m.a.max(cc) {
        SpeedOrder::Critical
    } else if diff > 0.0 {
        SpeedOrder::FarmerLed
    } else {
        SpeedOrder::ConvertLed
    };
    RegimeLabel {
        conversion: if m.g >= 1.0 { Conversion::High } else { Conversion::Low },
        speed_order,
        conversion_critical: (m.g - 1.0).abs() < tol,
    }
}

/// Reaction terms `(dF, dC, dH)` of the three-component system.
#[inline]
pub fn reaction_rhs(f: f64, c: f64, h: f64, m: &ModelParams) -> (f64, f64, f64) {
    let fc = f + c;
    (
        m.a * f * (1.0 - fc),
        c * (1.0 - fc) + m.s * h * fc,
        m.b * h * (1.0 - h - m.g * fc),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SteadyState {
    /// `(0, 0, 0)`
    Extinction,
    /// `(0, 0, 1)`
    HunterOnly,
    /// Line of neutral equilibria `(F, 1 - F, 0)`, `0 <= F <= 1`, stored by its endpoints.
    FarmerSegment {
        start: (f64, f64, f64),
        end: (f64, f64, f64),
    },
    /// `(0, C*, H*)`
    Coexistence { c: f64, h: f64 },
}

impl SteadyState {
    /// Point at parameter `theta` in `[0, 1]`; isolated states ignore `theta`.
    pub fn point(&self, theta: f64) -> (f64, f64, f64) {
        match *self {
            SteadyState::Extinction => (0.0, 0.0, 0.0),
            SteadyState::HunterOnly => (0.0, 0.0, 1.0),
            SteadyState::FarmerSegment { start, end } => (
                start.0 + theta * (end.0 - start.0),
                start.1 + theta * (end.1 - start.1),
                start.2 + theta * (end.2 - start.2),
            ),
            SteadyState::Coexistence { c, h } => (0.0, c, h),
        }
    }
}

pub fn steady_states(m: &ModelParams) -> Result<Vec<SteadyState>> {
    m.validate()?;
    let mut out = vec![
        SteadyState::Extinction,
        SteadyState::HunterOnly,
        SteadyState::FarmerSegment {
            start: (1.0, 0.0, 0.0),
            end: (0.0, 1.0, 0.0),
        },
    ];
    if let Some(eq) = Coexistence::of(m) {
        out.push(SteadyState::Coexistence { c: eq.c, h: eq.h });
    }
    Ok(out)
}

/// Rates of the kinetic `(C, H)` system. Unlike [`ModelParams`] this allows
/// `s = 0` and `g = 0`, where the two equations decouple into logistic laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    pub b: f64,
    pub s: f64,
    pub g: f64,
}

impl From<&ModelParams> for KineticParams {
    fn from(m: &ModelParams) -> Self {
        KineticParams { b: m.b, s: m.s, g: m.g }
    }
}

impl From<ModelParams> for KineticParams {
    fn from(m: ModelParams) -> Self {
        KineticParams::from(&m)
    }
}

impl KineticParams {
    fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::Validation(format!("b must be positive, got {}", self.b)));
        }
        if !(self.s.is_finite() && self.s >= 0.0) || !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::Validation("s and g must be non-negative".into()));
        }
        Ok(())
    }

    pub fn equilibrium(&self) -> Result<(f64, f64)> {
        if self.g >= 1.0 {
            return Err(Error::Unsupported(format!(
                "C*, H* are undefined for g = {} >= 1",
                self.g
            )));
        }
        let den = 1.0 + self.s * self.g;
        Ok(((1.0 + self.s) / den, (1.0 - self.g) / den))
    }

    #[inline]
    fn rhs(&self, c: f64, h: f64) -> (f64, f64) {
        (c * (1.0 - c + self.s * h), self.b * h * (1.0 - h - self.g * c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSample {
    pub t: f64,
    pub c: f64,
    pub h: f64,
}

pub const DEFAULT_ODE_DT: f64 = 1e-3;

/// Classical RK4 integration of `C' = C(1 - C) + sCH`, `H' = bH(1 - H - gC)`,
/// returning every step (including the initial point).
///
/// Starting points are accepted in `0 < C0 <= 1 + s`, `0 < H0 <= 1`; the flow
/// enters the open box `Sigma` immediately from its upper faces.
pub fn ode_trajectory(
    c0: f64,
    h0: f64,
    k: impl Into<KineticParams>,
    dt: f64,
    t_end: f64,
) -> Result<Vec<OdeSample>> {
    let k = k.into();
    k.validate()?;
    if !(c0 > 0.0 && c0 <= 1.0 + k.s && h0 > 0.0 && h0 <= 1.0) {
        return Err(Error::Domain(format!(
            "initial point ({c0}, {h0}) outside (0, 1+s] x (0, 1] with s = {}",
            k.s
        )));
    }
    if !(dt > 0.0 && dt <= 0.01) {
        return Err(Error::Validation(format!("dt must lie in (0, 0.01], got {dt}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Validation(format!("T must be positive, got {t_end}")));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let h = t_end / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut c, mut hh) = (c0, h0);
    out.push(OdeSample { t: 0.0, c, h: hh });
    for i in 1..=steps {
        let (k1c, k1h) = k.rhs(c, hh);
        let (k2c, k2h) = k.rhs(c + 0.5 * h * k1c, hh + 0.5 * h * k1h);
        let (k3c, k3h) = k.rhs(c + 0.5 * h * k2c, hh + 0.5 * h * k2h);
        let (k4c, k4h) = k.rhs(c + h * k3c, hh + h * k3h);
        c += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        hh += h / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h);
        if !(c > 0.0 && c < 1.0 + k.s && hh > 0.0 && hh < 1.0) && !(k.s == 0.0 && c == 1.0) {
            return Err(Error::Domain(format!(
                "trajectory left Sigma at t = {}: ({c}, {hh})",
                i as f64 * h
            )));
        }
        out.push(OdeSample {
            t: i as f64 * h,
            c,
            h: hh,
        });
    }
    Ok(out)
}

/// `y - ln(1 + y)` without cancellation for small `y`.
fn x_minus_log1p(y: f64) -> f64 {
    if y.abs() < 0.1 {
        // y^2/2 - y^3/3 + y^4/4 - ...
        let mut sum = 0.0;
        let mut pow = y * y;
        for n in 2..40 {
            let term = pow / n as f64;
            sum += if n % 2 == 0 { term } else { -term };
            pow *= y;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        y - y.ln_1p()
    }
}

/// `int_{x*}^{x} (eta - x*)/eta d eta = x - x* - x* ln(x/x*)`.
pub(crate) fn entropy_integral(x: f64, x_star: f64) -> f64 {
    x_star * x_minus_log1p((x - x_star) / x_star)
}

fn lyapunov_inputs(c: f64, h: f64, k: &KineticParams) -> Result<(f64, f64)> {
    k.validate()?;
    let eq = k.equilibrium()?;
    if !(c > 0.0 && h > 0.0) {
        return Err(Error::Domain(format!("Lyapunov functional needs C, H > 0, got ({c}, {h})")));
    }
    Ok(eq)
}

/// Strict Lyapunov functional of the kinetic system, closed form of
/// `bg int_{C*}^C (eta-C*)/eta + s int_{H*}^H (xi-H*)/xi`.
pub fn lyapunov(c: f64, h: f64, k: impl Into<KineticParams>) -> Result<f64> {
    let k = k.into();
    let (cs, hs) = lyapunov_inputs(c, h, &k)?;
    Ok(k.b * k.g * entropy_integral(c, cs) + k.s * entropy_integral(h, hs))
}

/// Time derivative of [`lyapunov`] along the kinetic flow:
/// `-bg (C - C*)^2 - bs (H - H*)^2`.
pub fn lyapunov_dissipation(c: f64, h: f64, k: impl Into<KineticParams>) -> Result<f64> {
    let k = k.into();
    let (cs, hs) = lyapunov_inputs(c, h, &k)?;
    Ok(-k.b * k.g * (c - cs).powi(2) - k.b * k.s * (h - hs).powi(2))
}
