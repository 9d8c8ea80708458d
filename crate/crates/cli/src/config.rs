//! Experiment configuration: a flat TOML file, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use neolith::model::{derived_constants, nondimensionalize, OriginalParams};
use neolith::solver::{check_boundary_guard, snapshot_grid, Grid1D, InitialSpec, Scheme, SolverConfig};
use neolith::ModelParams;

use crate::error::{CliError, CliResult};

pub const OUT_ENV: &str = "NEOLITH_OUT";
pub const DEFAULT_OUT: &str = "neolith-out";
pub const DEFAULT_SWEEP_CAP: usize = 512;

/// Either the six dimensionless parameters or the nine original ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub s: Option<f64>,
    pub g: Option<f64>,
    pub d_c: Option<f64>,
    pub d_h: Option<f64>,
    pub original: Option<OriginalParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dx: f64,
    /// Omitted: the smallest domain the boundary guard accepts.
    pub half_width: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { dx: neolith::solver::DEFAULT_DX, half_width: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub snapshot_interval: f64,
    pub front_interval: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: neolith::solver::DEFAULT_DT,
            t_end: 300.0,
            scheme: Scheme::Imex,
            snapshot_interval: neolith::solver::DEFAULT_SNAPSHOT_INTERVAL,
            front_interval: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Final zone is `|x| <= zone_fraction * c_star * t`.
    pub zone_fraction: f64,
    pub tolerance: f64,
    /// Late windows start at these fractions of `t_end`.
    pub final_window_start: f64,
    pub bump_window_start: f64,
    pub log_window_start: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            zone_fraction: 0.5,
            tolerance: 0.05,
            final_window_start: 2.0 / 3.0,
            bump_window_start: 0.25,
            log_window_start: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub root: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub initial: InitialSpec,
    pub diagnostics: DiagnosticsSection,
    pub output: OutputSection,
}

/// A configuration with every choice made, ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub grid: Grid1D,
    pub solver: SolverConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn model_params(&self) -> CliResult<ModelParams> {
        let m = &self.model;
        let given = [m.a, m.b, m.s, m.g, m.d_c, m.d_h];
        if let Some(orig) = &m.original {
            if given.iter().any(Option::is_some) {
                return Err(CliError::Config(
                    "give either the dimensionless parameters or [model.original], not both".into(),
                ));
            }
            return Ok(nondimensionalize(orig)?);
        }
        let d = default_params();
        Ok(ModelParams::new(
            m.a.unwrap_or(d.a),
            m.b.unwrap_or(d.b),
            m.s.unwrap_or(d.s),
            m.g.unwrap_or(d.g),
            m.d_c.unwrap_or(d.d_c),
            m.d_h.unwrap_or(d.d_h),
        )?)
    }

    /// Validate and fill in everything derived: parameters, grid, snapshot
    /// times. Fails before any computation if the domain is too small.
    pub fn resolve(&self) -> CliResult<Resolved> {
        let params = self.model_params()?;
        let dc = derived_constants(&params)?;
        let t_end = self.solver.t_end;
        let grid = match self.grid.half_width {
            None => Grid1D::sized_for(&self.initial, dc.c_star, t_end, self.grid.dx)?,
            Some(hw) => {
                let g = Grid1D::centered(0.0, hw, self.grid.dx)?;
                check_boundary_guard(&g, &self.initial, dc.c_star, t_end)?;
                g
            }
        };
        let diag = &self.diagnostics;
        if !(diag.zone_fraction > 0.0 && diag.zone_fraction < 1.0) {
            return Err(CliError::Config(format!("zone_fraction must lie in (0, 1), got {}", diag.zone_fraction)));
        }
        if !(diag.tolerance > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {}", diag.tolerance)));
        }
        for (name, v) in [
            ("final_window_start", diag.final_window_start),
            ("bump_window_start", diag.bump_window_start),
            ("log_window_start", diag.log_window_start),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(CliError::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if !(self.solver.snapshot_interval > 0.0) {
            return Err(CliError::Config("snapshot_interval must be positive".into()));
        }
        let solver = SolverConfig {
            dt: self.solver.dt,
            t_end,
            scheme: self.solver.scheme,
            snapshot_times: snapshot_grid(t_end, self.solver.snapshot_interval),
            front_interval: self.solver.front_interval,
            ..SolverConfig::default()
        };
        solver.validate(&params, &grid)?;
        let mut config = self.clone();
        if config.model.original.is_none() {
            config.model = ModelSection {
                a: Some(params.a),
                b: Some(params.b),
                s: Some(params.s),
                g: Some(params.g),
                d_c: Some(params.d_c),
                d_h: Some(params.d_h),
                original: None,
            };
        }
        config.grid.half_width = Some(grid.half_width());
        Ok(Resolved { config, params, grid, solver })
    }
}

pub fn default_params() -> ModelParams {
    ModelParams { a: 1.0, b: 1.0, s: 1.0, g: 2.0, d_c: 1.0, d_h: 1.0 }
}

impl Resolved {
    /// Everything that determines the computation, as JSON (output root excluded).
    pub fn echo(&self) -> serde_json::Value {
        let mut c = self.config.clone();
        c.output = OutputSection::default();
        serde_json::to_value(&c).expect("config serializes")
    }

    /// [`Resolved::echo`] plus the output root actually used; stored in the manifest.
    pub fn manifest_echo(&self) -> serde_json::Value {
        let mut v = self.echo();
        let root = out_root(self.config.output.root.as_deref());
        v["output"]["root"] = serde_json::Value::String(root.display().to_string());
        v
    }

    /// Short content hash naming the run directory.
    pub fn hash(&self) -> String {
        content_hash(&self.echo())
    }

    pub fn run_dir(&self) -> PathBuf {
        out_root(self.config.output.root.as_deref()).join(format!("run-{}", self.hash()))
    }
}

pub fn content_hash(v: &serde_json::Value) -> String {
    let digest = Sha256::digest(v.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `$NEOLITH_OUT`, else the configured root, else `neolith-out`.
pub fn out_root(configured: Option<&str>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(configured.unwrap_or(DEFAULT_OUT)),
    }
}

/// The default configuration, every key spelled out.
pub fn defaults_toml() -> String {
    let mut c = ExperimentConfig::default();
    let d = default_params();
    c.model = ModelSection {
        a: Some(d.a),
        b: Some(d.b),
        s: Some(d.s),
        g: Some(d.g),
        d_c: Some(d.d_c),
        d_h: Some(d.d_h),
        original: None,
    };
    c.output.root = Some(DEFAULT_OUT.into());
    let body = toml::to_string_pretty(&c).expect("defaults serialize");
    format!(
        "# neolith experiment configuration (all keys optional)\n\
         # [model] may instead hold an [model.original] table with D_f, D_c, D_h, r_f, r_c, r_h, K, L, e.\n\
         # [grid] half_width: omit to size the domain from c* and t_end.\n\
         # ${OUT_ENV} overrides [output] root.\n\n{body}"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let text = defaults_toml();
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.model_params().unwrap(), default_params());
        assert_eq!(c.solver, SolverSection::default());
    }

    #[test]
    fn empty_file_is_the_default() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExperimentConfig::from_toml("[model]\nalpha = 1.0\n").is_err());
    }

    #[test]
    fn original_parameters_resolve() {
        let c = ExperimentConfig::from_toml(
            "[model.original]\nD_f = 2\nD_c = 1\nD_h = 4\nr_f = 3\nr_c = 1\nr_h = 2\nK = 1\nL = 1\ne = 1\n",
        )
        .unwrap();
        let m = c.model_params().unwrap();
        assert_eq!((m.a, m.b, m.s, m.g, m.d_c, m.d_h), (3.0, 2.0, 1.0, 0.5, 0.5, 2.0));
        let mixed = ExperimentConfig::from_toml("[model]\na = 1\n[model.original]\nD_f = 2\nD_c = 1\nD_h = 4\nr_f = 3\nr_c = 1\nr_h = 2\nK = 1\nL = 1\ne = 1\n").unwrap();
        assert!(matches!(mixed.model_params(), Err(CliError::Config(_))));
    }

    #[test]
    fn small_domain_fails_before_compute() {
        let c = ExperimentConfig::from_toml("[grid]\nhalf_width = 50\n[solver]\nt_end = 300\n").unwrap();
        let err = c.resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn hash_ignores_output_root_and_tracks_content() {
        let a = ExperimentConfig::from_toml("[solver]\nt_end = 10\n").unwrap().resolve().unwrap();
        let b = ExperimentConfig::from_toml("[solver]\nt_end = 10\n[output]\nroot = \"elsewhere\"\n")
            .unwrap()
            .resolve()
            .unwrap();
        let c = ExperimentConfig::from_toml("[solver]\nt_end = 20\n").unwrap().resolve().unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn resolved_echo_spells_out_defaults() {
        let r = ExperimentConfig::default().resolve().unwrap();
        let e = r.echo();
        assert_eq!(e["model"]["g"], 2.0);
        assert!(e["grid"]["half_width"].as_f64().unwrap() > 0.0);
        assert_eq!(e["solver"]["t_end"], 300.0);
    }
}
