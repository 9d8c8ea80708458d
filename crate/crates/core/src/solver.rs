//! Finite-difference integration of the three-component system on a
//! truncated interval with zero-flux ends.
//!
//! Default scheme is Lie splitting: an explicit Euler reaction step followed
//! by backward-Euler diffusion, solved per field with a pre-factorized
//! tridiagonal (Thomas) solve. The diffusion matrix is an M-matrix, so it
//! preserves nonnegativity and the bound `H <= 1`, and with the ghost-node
//! Neumann closure it conserves trapezoidal mass exactly.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{front_position, Field, FrontSeries};
use crate::error::{Error, Result};
use crate::model::{derived_constants, reaction_rhs, ModelParams};

/// Magnitude below which bound violations are treated as roundoff.
pub const CLAMP_EPS: f64 = 1e-14;

/// Magnitudes below this are flushed to zero inside the tridiagonal sweeps and
/// after every step. Subnormals do not decay under the sweep (rounding pins
/// them at the smallest subnormal), are slow, and the reaction term would grow
/// that floor into a spurious invasion far ahead of the front.
pub const FLUSH_BELOW: f64 = 1e-300;

/// Fronts must stay this fraction of the half-width away from each end.
pub const BOUNDARY_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    /// Node count.
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Grid1D { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[center - half_width, center + half_width]` with spacing as
    /// close to `dx` as the node count allows.
    pub fn centered(center: f64, half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && half_width > 0.0) {
            return Err(Error::Config("grid half-width and dx must be positive".into()));
        }
        let cells = (2.0 * half_width / dx).round() as usize;
        Grid1D::new(center - half_width, center + half_width, cells + 1)
    }

    /// Smallest centered grid at spacing `dx` whose boundary guard admits a
    /// front moving at `speed` from the support of `spec` up to `t_end`.
    pub fn sized_for(spec: &InitialSpec, speed: f64, t_end: f64, dx: f64) -> Result<Self> {
        let reach = spec.center.abs() + spec.radius + speed * t_end;
        let half = (reach / (1.0 - BOUNDARY_MARGIN) + 2.0 * dx).max(8.0 * dx);
        let half = (half / dx).ceil() * dx;
        Grid1D::centered(0.0, half, dx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::Config(format!(
                "grid needs x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n < 16 {
            return Err(Error::Config(format!("grid needs at least 16 nodes, got {}", self.n)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    /// Node `i`, placed symmetrically about the midpoint so mirrored nodes
    /// have exactly opposite offsets.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.x_min + self.x_max);
        mid + (i as f64 - 0.5 * (self.n - 1) as f64) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.x_max - self.x_min)
    }

    /// Index range of nodes with `|x| <= r`.
    pub fn indices_within(&self, r: f64) -> std::ops::Range<usize> {
        let slack = 1e-9 * self.dx();
        let lo = (0..self.n).find(|&i| self.x(i) >= -r - slack);
        match lo {
            Some(lo) => {
                let hi = (lo..self.n).rev().find(|&i| self.x(i) <= r + slack);
                match hi {
                    Some(hi) if hi >= lo => lo..hi + 1,
                    _ => lo..lo,
                }
            }
            None => 0..0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    #[serde(rename = "F")]
    pub f: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
}

impl FieldState {
    pub fn uniform(n: usize, f: f64, c: f64, h: f64) -> Self {
        FieldState {
            t: 0.0,
            f: vec![f; n],
            c: vec![c; n],
            h: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// First violation of `F, C >= 0`, `0 <= H <= 1`, as `(field, node, value)`.
    pub fn first_violation(&self) -> Option<(&'static str, usize, f64)> {
        for (i, &v) in self.f.iter().enumerate() {
            if !(v >= 0.0) {
                return Some(("F", i, v));
            }
        }
        for (i, &v) in self.c.iter().enumerate() {
            if !(v >= 0.0) {
                return Some(("C", i, v));
            }
        }
        for (i, &v) in self.h.iter().enumerate() {
            if !((0.0..=1.0).contains(&v)) {
                return Some(("H", i, v));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Indicator,
    SmoothBump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSpec {
    pub shape: Shape,
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            shape: Shape::Indicator,
            center: 0.0,
            radius: 1.0,
            amplitude: 1.0,
        }
    }
}

impl InitialSpec {
    fn validate(&self, grid: &Grid1D, allow_zero: bool) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!("radius must be positive, got {}", self.radius)));
        }
        let amp_ok = if allow_zero {
            (0.0..=1.0).contains(&self.amplitude)
        } else {
            self.amplitude > 0.0 && self.amplitude <= 1.0
        };
        if !amp_ok {
            return Err(Error::Config(format!(
                "amplitude must lie in (0, 1], got {}",
                self.amplitude
            )));
        }
        if !(self.center - self.radius > grid.x_min && self.center + self.radius < grid.x_max) {
            return Err(Error::Config(format!(
                "initial support [{}, {}] not inside ({}, {})",
                self.center - self.radius,
                self.center + self.radius,
                grid.x_min,
                grid.x_max
            )));
        }
        Ok(())
    }

    pub fn profile(&self, x: f64) -> f64 {
        let rho = (x - self.center) / self.radius;
        match self.shape {
            Shape::Indicator => {
                if rho.abs() <= 1.0 + 1e-12 {
                    self.amplitude
                } else {
                    0.0
                }
            }
            Shape::SmoothBump => {
                if rho.abs() < 1.0 {
                    self.amplitude * (1.0 - 1.0 / (1.0 - rho * rho)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.n).map(|i| self.profile(grid.x(i))).collect()
    }
}

/// Farmers from `spec`, no converted farmers, hunter-gatherers at capacity.
pub fn init_state(grid: &Grid1D, spec: &InitialSpec) -> Result<FieldState> {
    grid.validate()?;
    spec.validate(grid, false)?;
    Ok(FieldState {
        t: 0.0,
        f: spec.sample(grid),
        c: vec![0.0; grid.n],
        h: vec![1.0; grid.n],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Imex,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    ZeroFlux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Sorted times in `[0, t_end]`; each is rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
    pub front_interval: f64,
    pub front_levels: Vec<(Field, f64)>,
    pub boundary: Boundary,
    /// Test hook: `false` integrates pure diffusion.
    pub reaction: bool,
}

pub const DEFAULT_DT: f64 = 0.02;
pub const DEFAULT_DX: f64 = 0.1;
pub const DEFAULT_SNAPSHOT_INTERVAL: f64 = 5.0;

pub fn default_front_levels() -> Vec<(Field, f64)> {
    vec![
        (Field::F, 0.5),
        (Field::C, 0.5),
        (Field::FPlusC, 0.5),
        (Field::H, 0.5),
    ]
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: DEFAULT_DT,
            t_end: 0.0,
            scheme: Scheme::Imex,
            snapshot_times: vec![0.0],
            front_interval: 0.5,
            front_levels: default_front_levels(),
            boundary: Boundary::ZeroFlux,
            reaction: true,
        }
    }
}

impl SolverConfig {
    /// Config running to `t_end` with snapshots every `interval` (and at `t_end`).
    pub fn with_snapshot_every(t_end: f64, interval: f64) -> Self {
        SolverConfig {
            t_end,
            snapshot_times: snapshot_grid(t_end, interval),
            ..SolverConfig::default()
        }
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be non-negative, got {}", self.t_end)));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::Config(format!(
                "T = {} is not a whole number of steps dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, m: &ModelParams, grid: &Grid1D) -> Result<()> {
        self.steps()?;
        let dx = grid.dx();
        match self.scheme {
            Scheme::Imex => {
                if self.dt > 0.25 {
                    return Err(Error::Config(format!("imex requires dt <= 0.25, got {}", self.dt)));
                }
            }
            Scheme::Explicit => {
                let dmax = 1f64.max(m.d_c).max(m.d_h);
                let lim = dx * dx / (2.0 * dmax);
                if self.dt > lim {
                    return Err(Error::Config(format!(
                        "explicit scheme requires dt <= dx^2/(2 max D) = {lim}, got {}",
                        self.dt
                    )));
                }
            }
        }
        if self.reaction {
            // Explicit Euler on the reaction keeps the invariant box only if
            // the per-step growth factors stay positive and the H update is
            // monotone (dt b <= 1).
            let rate = (m.a * m.s).max(m.s).max(m.b * m.g * (1.0 + m.s));
            if self.dt * rate >= 1.0 || self.dt * m.b > 1.0 {
                return Err(Error::Config(format!(
                    "dt = {} too large for positivity of the reaction step",
                    self.dt
                )));
            }
        }
        if !(self.front_interval > 0.0) {
            return Err(Error::Config("front interval must be positive".into()));
        }
        for &(_, lvl) in &self.front_levels {
            if !(lvl > 0.0 && lvl < 1.0) {
                return Err(Error::Config(format!("front level must lie in (0, 1), got {lvl}")));
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end + 1e-9) || t < prev {
                return Err(Error::Config(format!(
                    "snapshot times must be sorted within [0, {}]",
                    self.t_end
                )));
            }
            prev = t;
        }
        Ok(())
    }
}

/// `0, interval, 2 interval, ..., t_end`.
pub fn snapshot_grid(t_end: f64, interval: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if t_end <= 0.0 || interval <= 0.0 {
        return out;
    }
    let k = (t_end / interval + 1e-9).floor() as usize;
    out.extend((1..=k).map(|i| i as f64 * interval));
    if t_end - out.last().copied().unwrap_or(0.0) > 1e-9 {
        out.push(t_end);
    }
    out
}

/// Pre-factorized tridiagonal system `(I - r K) u = rhs`, `K` the Neumann
/// second-difference matrix with ghost-node closure.
#[derive(Debug, Clone)]
struct Tridiag {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiag {
    fn neumann(n: usize, r: f64) -> Self {
        let mut lower = vec![-r; n];
        let mut upper = vec![-r; n];
        let diag = vec![1.0 + 2.0 * r; n];
        lower[0] = 0.0;
        upper[0] = -2.0 * r;
        lower[n - 1] = -2.0 * r;
        upper[n - 1] = 0.0;
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let piv = diag[i] - lower[i] * prev;
            inv_pivot[i] = 1.0 / piv;
            upper_mod[i] = upper[i] / piv;
            prev = upper_mod[i];
        }
        Tridiag {
            lower,
            upper_mod,
            inv_pivot,
        }
    }

    fn solve_in_place(&self, u: &mut [f64]) {
        let n = u.len();
        let mut prev = 0.0;
        for i in 0..n {
            let v = flush((u[i] - self.lower[i] * prev) * self.inv_pivot[i]);
            u[i] = v;
            prev = v;
        }
        for i in (0..n - 1).rev() {
            u[i] = flush(u[i] - self.upper_mod[i] * u[i + 1]);
        }
    }
}

/// Solve three independent systems in one pass so their dependency chains
/// overlap.
fn solve_three(ops: &[Tridiag; 3], f: &mut [f64], c: &mut [f64], h: &mut [f64]) {
    let n = f.len();
    let [a, b, d] = ops;
    let (mut pf, mut pc, mut ph) = (0.0, 0.0, 0.0);
    for i in 0..n {
        pf = flush((f[i] - a.lower[i] * pf) * a.inv_pivot[i]);
        pc = flush((c[i] - b.lower[i] * pc) * b.inv_pivot[i]);
        ph = flush((h[i] - d.lower[i] * ph) * d.inv_pivot[i]);
        f[i] = pf;
        c[i] = pc;
        h[i] = ph;
    }
    for i in (0..n - 1).rev() {
        f[i] = flush(f[i] - a.upper_mod[i] * f[i + 1]);
        c[i] = flush(c[i] - b.upper_mod[i] * c[i + 1]);
        h[i] = flush(h[i] - d.upper_mod[i] * h[i + 1]);
    }
}

#[inline(always)]
fn flush(v: f64) -> f64 {
    if v.abs() < FLUSH_BELOW {
        0.0
    } else {
        v
    }
}

/// Explicit Neumann second difference times `coef`, added into `out`.
fn add_laplacian(u: &[f64], coef: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] += coef * 2.0 * (u[1] - u[0]);
    for i in 1..n - 1 {
        out[i] += coef * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
    }
    out[n - 1] += coef * 2.0 * (u[n - 2] - u[n - 1]);
}

/// Clamp roundoff-level bound violations; report anything larger.
fn enforce_bounds(field: &'static str, u: &mut [f64], upper: Option<f64>, t: f64) -> Result<usize> {
    let mut clamped = 0;
    for (i, v) in u.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NumericalInstability { field, node: i, value: *v, t });
        }
        if v.abs() < FLUSH_BELOW {
            *v = 0.0;
            continue;
        }
        if *v < 0.0 {
            if *v > -CLAMP_EPS {
                *v = 0.0;
                clamped += 1;
            } else {
                return Err(Error::NumericalInstability { field, node: i, value: *v, t });
            }
        }
        if let Some(hi) = upper {
            if *v > hi {
                if *v - hi < CLAMP_EPS {
                    *v = hi;
                    clamped += 1;
                } else {
                    return Err(Error::NumericalInstability { field, node: i, value: *v, t });
                }
            }
        }
    }
    Ok(clamped)
}

/// Reusable time stepper holding the factorized diffusion operators.
#[derive(Debug, Clone)]
pub struct Stepper {
    m: ModelParams,
    dx: f64,
    dt: f64,
    scheme: Scheme,
    reaction: bool,
    ops: Option<[Tridiag; 3]>,
    scratch: [Vec<f64>; 3],
    steps_taken: u64,
    pub clamped: usize,
}

impl Stepper {
    pub fn new(m: &ModelParams, grid: &Grid1D, cfg: &SolverConfig) -> Result<Self> {
        m.validate()?;
        grid.validate()?;
        cfg.validate(m, grid)?;
        let dx = grid.dx();
        let n = grid.n;
        let ops = match cfg.scheme {
            Scheme::Imex => {
                let r = cfg.dt / (dx * dx);
                Some([
                    Tridiag::neumann(n, r),
                    Tridiag::neumann(n, r * m.d_c),
                    Tridiag::neumann(n, r * m.d_h),
                ])
            }
            Scheme::Explicit => None,
        };
        Ok(Stepper {
            m: *m,
            dx,
            dt: cfg.dt,
            scheme: cfg.scheme,
            reaction: cfg.reaction,
            ops,
            scratch: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            steps_taken: 0,
            clamped: 0,
        })
    }

    /// Advance `state` by one step of `dt`. The new time is `t0 + k dt`
    /// computed from the step count, not by accumulation.
    pub fn step(&mut self, state: &mut FieldState) -> Result<()> {
        let n = state.len();
        let dt = self.dt;
        let t0 = state.t;
        let [df, dc, dh] = &mut self.scratch;
        if self.reaction {
            for i in 0..n {
                let (rf, rc, rh) = reaction_rhs(state.f[i], state.c[i], state.h[i], &self.m);
                df[i] = dt * rf;
                dc[i] = dt * rc;
                dh[i] = dt * rh;
            }
        } else {
            df.fill(0.0);
            dc.fill(0.0);
            dh.fill(0.0);
        }
        match (&self.ops, self.scheme) {
            (Some(ops), Scheme::Imex) => {
                for i in 0..n {
                    state.f[i] += df[i];
                    state.c[i] += dc[i];
                    state.h[i] += dh[i];
                }
                solve_three(ops, &mut state.f, &mut state.c, &mut state.h);
            }
            _ => {
                let k = dt / (self.dx * self.dx);
                add_laplacian(&state.f, k, df);
                add_laplacian(&state.c, k * self.m.d_c, dc);
                add_laplacian(&state.h, k * self.m.d_h, dh);
                for i in 0..n {
                    state.f[i] += df[i];
                    state.c[i] += dc[i];
                    state.h[i] += dh[i];
                }
            }
        }
        let t = t0 + dt;
        self.clamped += enforce_bounds("F", &mut state.f, None, t)?;
        self.clamped += enforce_bounds("C", &mut state.c, None, t)?;
        self.clamped += enforce_bounds("H", &mut state.h, Some(1.0), t)?;
        self.steps_taken += 1;
        state.t = t;
        Ok(())
    }
}

/// One step from `state` (convenience wrapper; repeated stepping should reuse
/// a [`Stepper`]).
pub fn step(state: &FieldState, m: &ModelParams, grid: &Grid1D, cfg: &SolverConfig) -> Result<FieldState> {
    if state.len() != grid.n || state.c.len() != grid.n || state.h.len() != grid.n {
        return Err(Error::Config("state length does not match grid".into()));
    }
    let mut s = Stepper::new(m, grid, cfg)?;
    let mut out = state.clone();
    s.step(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub min_f: f64,
    pub min_c: f64,
    pub min_h: f64,
    pub max_h: f64,
    /// Values moved onto a bound because they missed it by less than the clamp threshold.
    pub clamped: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub params: ModelParams,
    pub grid: Grid1D,
    pub initial: InitialSpec,
    pub config: SolverConfig,
    pub snapshots: Vec<FieldState>,
    pub fronts: Vec<FrontSeries>,
    pub invariants: InvariantSummary,
}

impl SimulationRecord {
    pub fn final_state(&self) -> Option<&FieldState> {
        self.snapshots.last()
    }

    pub fn front(&self, field: Field, level: f64) -> Option<&FrontSeries> {
        self.fronts
            .iter()
            .find(|fs| fs.field == field && (fs.level - level).abs() < 1e-12)
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<&FieldState> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }

    pub fn snapshots_in(&self, t1: f64, t2: f64) -> impl Iterator<Item = &FieldState> {
        self.snapshots
            .iter()
            .filter(move |s| s.t >= t1 - 1e-9 && s.t <= t2 + 1e-9)
    }

    /// Copy of the record restricted to `t <= t_end`.
    pub fn truncated(&self, t_end: f64) -> SimulationRecord {
        let mut r = self.clone();
        r.snapshots.retain(|s| s.t <= t_end + 1e-9);
        for fs in &mut r.fronts {
            fs.samples.retain(|(t, _)| *t <= t_end + 1e-9);
        }
        r.config.t_end = t_end;
        r
    }
}

/// Refuse configurations whose fronts could come within the boundary margin
/// by the final time.
pub fn check_boundary_guard(grid: &Grid1D, spec: &InitialSpec, speed: f64, t_end: f64) -> Result<()> {
    let margin = BOUNDARY_MARGIN * grid.half_width();
    let reach = spec.radius + speed * t_end;
    let lo = spec.center - reach;
    let hi = spec.center + reach;
    if lo < grid.x_min + margin || hi > grid.x_max - margin {
        return Err(Error::Config(format!(
            "fronts may reach [{lo:.3}, {hi:.3}] by T = {t_end}, closer than {margin:.3} to the ends of [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    Ok(())
}

fn record_fronts(state: &FieldState, grid: &Grid1D, fronts: &mut [FrontSeries]) {
    for fs in fronts.iter_mut() {
        let x = front_position(state, grid, fs.field, fs.level);
        fs.samples.push((state.t, x));
    }
}

fn state_summary(state: &FieldState, acc: &mut InvariantSummary) {
    for &v in &state.f {
        acc.min_f = acc.min_f.min(v);
    }
    for &v in &state.c {
        acc.min_c = acc.min_c.min(v);
    }
    for &v in &state.h {
        acc.min_h = acc.min_h.min(v);
        acc.max_h = acc.max_h.max(v);
    }
}

/// Integrate from the initial data of `spec` up to `cfg.t_end`.
pub fn run(m: &ModelParams, grid: &Grid1D, spec: &InitialSpec, cfg: &SolverConfig) -> Result<SimulationRecord> {
    m.validate()?;
    let mut stepper = Stepper::new(m, grid, cfg)?;
    let steps = cfg.steps()?;
    let speed = derived_constants(m)?.c_star;
    check_boundary_guard(grid, spec, speed, cfg.t_end)?;
    let mut state = init_state(grid, spec)?;

    let snap_steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .map(|t| (t / cfg.dt).round() as usize)
        .collect();
    let front_stride = ((cfg.front_interval / cfg.dt).round() as usize).max(1);
    let mut fronts: Vec<FrontSeries> = cfg
        .front_levels
        .iter()
        .map(|&(field, level)| FrontSeries::new(field, level))
        .collect();
    let mut summary = InvariantSummary {
        min_f: f64::INFINITY,
        min_c: f64::INFINITY,
        min_h: f64::INFINITY,
        max_h: f64::NEG_INFINITY,
        clamped: 0,
        holds: true,
    };
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut next_snap = 0;
    let mut capture = |k: usize, st: &FieldState, snaps: &mut Vec<FieldState>, summary: &mut InvariantSummary| {
        while next_snap < snap_steps.len() && snap_steps[next_snap] == k {
            if snaps.last().map(|s: &FieldState| s.t) != Some(st.t) {
                state_summary(st, summary);
                snaps.push(st.clone());
            }
            next_snap += 1;
        }
    };

    capture(0, &state, &mut snapshots, &mut summary);
    record_fronts(&state, grid, &mut fronts);
    for k in 1..=steps {
        stepper.step(&mut state)?;
        state.t = k as f64 * cfg.dt;
        if k % front_stride == 0 {
            record_fronts(&state, grid, &mut fronts);
        }
        capture(k, &state, &mut snapshots, &mut summary);
    }
    summary.clamped = stepper.clamped;
    summary.holds = summary.min_f >= 0.0 && summary.min_c >= 0.0 && summary.min_h >= 0.0 && summary.max_h <= 1.0;
    Ok(SimulationRecord {
        params: *m,
        grid: *grid,
        initial: *spec,
        config: cfg.clone(),
        snapshots,
        fronts,
        invariants: summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KppOutcome {
    /// Least-squares front speed over the second half of the run; `None`
    /// when the front is absent.
    pub speed: Option<crate::stats::LineFit>,
    pub front: FrontSeries,
}

/// Integrate `u_t = d u_xx + r u (1 - u)` and measure the speed of the
/// rightmost `u = 1/2` crossing.
pub fn scalar_kpp_run(d: f64, r: f64, grid: &Grid1D, spec: &InitialSpec, cfg: &SolverConfig) -> Result<KppOutcome> {
    if !(d > 0.0 && r > 0.0) {
        return Err(Error::Validation(format!("d and r must be positive, got ({d}, {r})")));
    }
    grid.validate()?;
    spec.validate(grid, true)?;
    let steps = cfg.steps()?;
    if cfg.dt > 0.25 || cfg.dt * r >= 1.0 {
        return Err(Error::Config(format!("dt = {} too large for r = {r}", cfg.dt)));
    }
    check_boundary_guard(grid, spec, 2.0 * (d * r).sqrt(), cfg.t_end)?;
    let dx = grid.dx();
    let op = Tridiag::neumann(grid.n, d * cfg.dt / (dx * dx));
    let mut st = FieldState {
        t: 0.0,
        f: spec.sample(grid),
        c: vec![0.0; grid.n],
        h: vec![1.0; grid.n],
    };
    let level = 0.5;
    let mut front = FrontSeries::new(Field::F, level);
    let stride = ((cfg.front_interval / cfg.dt).round() as usize).max(1);
    front.samples.push((0.0, front_position(&st, grid, Field::F, level)));
    for k in 1..=steps {
        for u in st.f.iter_mut() {
            *u += cfg.dt * r * *u * (1.0 - *u);
        }
        op.solve_in_place(&mut st.f);
        st.t = k as f64 * cfg.dt;
        enforce_bounds("F", &mut st.f, None, st.t)?;
        if k % stride == 0 {
            front.samples.push((st.t, front_position(&st, grid, Field::F, level)));
        }
    }
    let speed = if front.samples.iter().all(|(_, x)| x.is_none()) {
        None
    } else {
        Some(crate::diagnostics::estimate_speed(&front, 0.5 * cfg.t_end, cfg.t_end)?)
    };
    Ok(KppOutcome { speed, front })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn params() -> ModelParams {
        ModelParams::new(1.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_nodes_are_symmetric() {
        let g = Grid1D::centered(0.0, 10.0, 0.5).unwrap();
        assert_eq!(g.n, 41);
        for i in 0..g.n {
            assert_eq!(g.x(i), -g.x(g.n - 1 - i));
        }
        assert_eq!(g.x(20), 0.0);
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
        assert!(Grid1D::new(1.0, 0.0, 32).is_err());
    }

    #[test]
    fn indicator_initial_data() {
        let g = Grid1D::centered(0.0, 10.0, 0.5).unwrap();
        let st = init_state(&g, &InitialSpec::default()).unwrap();
        for i in 0..g.n {
            let want = if g.x(i).abs() <= 1.0 { 1.0 } else { 0.0 };
            assert_eq!(st.f[i], want, "x = {}", g.x(i));
            assert_eq!(st.c[i], 0.0);
            assert_eq!(st.h[i], 1.0);
        }
        assert_eq!(st.t, 0.0);
    }

    #[test]
    fn smooth_bump_peaks_at_center() {
        let g = Grid1D::centered(0.0, 10.0, 0.1).unwrap();
        let spec = InitialSpec {
            shape: Shape::SmoothBump,
            amplitude: 0.7,
            radius: 2.0,
            ..InitialSpec::default()
        };
        let st = init_state(&g, &spec).unwrap();
        let max = st.f.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, 0.7);
        assert_eq!(st.f[g.n / 2], 0.7);
    }

    #[test]
    fn support_touching_boundary_rejected() {
        let g = Grid1D::centered(0.0, 10.0, 0.5).unwrap();
        let spec = InitialSpec { center: 9.5, ..InitialSpec::default() };
        assert!(matches!(init_state(&g, &spec), Err(Error::Config(_))));
    }

    #[test]
    fn hunter_only_state_is_fixed() {
        let g = Grid1D::centered(0.0, 20.0, 0.1).unwrap();
        let cfg = SolverConfig { t_end: 1.0, ..SolverConfig::default() };
        let st = FieldState::uniform(g.n, 0.0, 0.0, 1.0);
        let next = step(&st, &params(), &g, &cfg).unwrap();
        assert_eq!(next.f, st.f);
        assert_eq!(next.c, st.c);
        assert_eq!(next.h, st.h);
        assert!((next.t - 0.02).abs() < 1e-15);
    }

    #[test]
    fn pure_diffusion_conserves_trapezoid_mass() {
        let g = Grid1D::centered(0.0, 10.0, 0.1).unwrap();
        let cfg = SolverConfig { t_end: 10.0, reaction: false, ..SolverConfig::default() };
        let mut st = init_state(&g, &InitialSpec { center: 7.0, ..InitialSpec::default() }).unwrap();
        let mass = |u: &[f64]| {
            let n = u.len();
            u.iter().sum::<f64>() - 0.5 * (u[0] + u[n - 1])
        };
        let m0 = mass(&st.f);
        let mut s = Stepper::new(&params(), &g, &cfg).unwrap();
        for _ in 0..500 {
            let before = mass(&st.f);
            s.step(&mut st).unwrap();
            assert!((mass(&st.f) - before).abs() <= 1e-12 * m0);
        }
        // Mass has reached the boundary by now, so the closure matters.
        assert!(st.f[g.n - 1] > 1e-3);
    }

    #[test]
    fn explicit_scheme_stability_guard() {
        let g = Grid1D::centered(0.0, 10.0, 0.1).unwrap();
        let cfg = SolverConfig { scheme: Scheme::Explicit, t_end: 1.0, ..SolverConfig::default() };
        assert!(matches!(Stepper::new(&params(), &g, &cfg), Err(Error::Config(_))));
        let ok = SolverConfig { dt: 0.005, ..cfg };
        assert!(Stepper::new(&params(), &g, &ok).is_ok());
    }

    #[test]
    fn imex_dt_cap() {
        let g = Grid1D::centered(0.0, 10.0, 0.1).unwrap();
        let cfg = SolverConfig { dt: 0.5, t_end: 1.0, reaction: false, ..SolverConfig::default() };
        assert!(Stepper::new(&params(), &g, &cfg).is_err());
    }

    #[test]
    fn large_violation_is_reported() {
        let mut u = vec![0.5, -1e-10, 0.2];
        let e = enforce_bounds("C", &mut u, None, 3.0).unwrap_err();
        assert_eq!(e, Error::NumericalInstability { field: "C", node: 1, value: -1e-10, t: 3.0 });
        let mut u = vec![0.5, -1e-16, 1.0 + 4.0 * f64::EPSILON];
        assert_eq!(enforce_bounds("H", &mut u, Some(1.0), 0.0).unwrap(), 2);
        assert_eq!(u, vec![0.5, 0.0, 1.0]);
    }

    #[test]
    fn zero_horizon_keeps_only_initial_snapshot() {
        let g = Grid1D::centered(0.0, 10.0, 0.1).unwrap();
        let cfg = SolverConfig::default();
        let rec = run(&params(), &g, &InitialSpec::default(), &cfg).unwrap();
        assert_eq!(rec.snapshots.len(), 1);
        assert_eq!(rec.snapshots[0].t, 0.0);
    }

    #[test]
    fn boundary_guard_refuses_small_domain() {
        let g = Grid1D::centered(0.0, 50.0, 0.1).unwrap();
        let cfg = SolverConfig::with_snapshot_every(100.0, 10.0);
        assert!(matches!(run(&params(), &g, &InitialSpec::default(), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn sized_grid_passes_guard() {
        let spec = InitialSpec::default();
        let g = Grid1D::sized_for(&spec, 2.0 * 2f64.sqrt(), 150.0, 0.1).unwrap();
        check_boundary_guard(&g, &spec, 2.0 * 2f64.sqrt(), 150.0).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn snapshot_grid_includes_end() {
        assert_eq!(snapshot_grid(12.0, 5.0), vec![0.0, 5.0, 10.0, 12.0]);
        assert_eq!(snapshot_grid(10.0, 5.0), vec![0.0, 5.0, 10.0]);
        assert_eq!(snapshot_grid(0.0, 5.0), vec![0.0]);
    }

    #[test]
    fn kpp_with_zero_data_has_no_front() {
        let g = Grid1D::centered(0.0, 40.0, 0.1).unwrap();
        let spec = InitialSpec { amplitude: 0.0, ..InitialSpec::default() };
        let cfg = SolverConfig { t_end: 10.0, ..SolverConfig::default() };
        let out = scalar_kpp_run(1.0, 1.0, &g, &spec, &cfg).unwrap();
        assert!(out.speed.is_none());
    }

    #[test]
    fn short_run_keeps_invariants_and_is_deterministic() {
        let m = ModelParams::new(3.0, 1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let spec = InitialSpec::default();
        let g = Grid1D::sized_for(&spec, 2.0 * 3f64.sqrt(), 20.0, 0.1).unwrap();
        let cfg = SolverConfig::with_snapshot_every(20.0, 5.0);
        let a = run(&m, &g, &spec, &cfg).unwrap();
        let b = run(&m, &g, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.invariants.holds);
        assert_eq!(a.snapshots.len(), 5);
        for s in &a.snapshots {
            assert!(s.first_violation().is_none());
        }
    }
}
