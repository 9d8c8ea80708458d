use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use neolith::model::KineticParams;
use neolith_cli::commands::{self, Axis, SweepSpec, VerifyInput, DEFAULT_QUADRUPLE};
use neolith_cli::config::{defaults_toml, ExperimentConfig};
use neolith_cli::{CliError, CliResult};

/// Farmer / convert / hunter-gatherer reaction-diffusion experiments.
#[derive(Parser)]
#[command(name = "neolith", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one configuration and save snapshots, fronts and manifest.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run four parameter sets, one per spreading regime, and tabulate verdicts.
    Regimes {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `a,s,d_c,g`; give four times to replace the default sets.
        #[arg(long = "set", value_name = "A,S,D_C,G")]
        sets: Vec<String>,
    },
    /// Cartesian sweep over model parameters.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `name=v1,v2,...`, repeatable.
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long)]
        max_parallel: Option<usize>,
    },
    /// Check a super- or sub-solution construction on a wedge.
    Verify {
        /// TOML or JSON file with `spec`, `wedge`, `tolerance`, `escalate_cap`.
        #[arg(long)]
        spec: PathBuf,
        /// Run directory to check the ordering against.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Also write the residual field as CSV.
        #[arg(long)]
        residuals: bool,
    },
    /// Traveling wave profile of the convert equation.
    Wave {
        #[arg(long, default_value_t = 1.0)]
        d_c: f64,
        #[arg(long)]
        c1: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        range: Option<Vec<f64>>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Kinetic (C, H) trajectory behind the front.
    Ode {
        #[arg(long)]
        c0: f64,
        #[arg(long)]
        h0: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = 0.5)]
        g: f64,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
    },
    /// Diagnostics and verdicts for a saved run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Scalar Fisher-KPP speed check.
    Kpp {
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = 0.1)]
        dx: f64,
        /// Relative tolerance on the speed.
        #[arg(long, default_value_t = 0.03)]
        band: f64,
    },
    /// Print the default configuration as TOML.
    PrintDefaults,
}

fn load(path: Option<&PathBuf>) -> CliResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn parse_set(text: &str) -> CliResult<(f64, f64, f64, f64)> {
    let v: Vec<f64> = text
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad number in set `{text}`"))))
        .collect::<CliResult<_>>()?;
    match v[..] {
        [a, s, d_c, g] => Ok((a, s, d_c, g)),
        _ => Err(CliError::Config(format!("set `{text}` needs four values a,s,d_c,g"))),
    }
}

fn dispatch(cmd: Cmd) -> CliResult<Option<PathBuf>> {
    let dir = match cmd {
        Cmd::Run { config } => commands::cmd_run(&load(config.as_ref())?)?,
        Cmd::Regimes { config, sets } => {
            let base = load(config.as_ref())?;
            let sets = if sets.is_empty() {
                DEFAULT_QUADRUPLE.to_vec()
            } else {
                sets.iter().map(|s| parse_set(s)).collect::<CliResult<_>>()?
            };
            commands::cmd_regimes(&base, &sets)?
        }
        Cmd::Sweep { config, axes, max_parallel } => {
            let base = load(config.as_ref())?;
            let axes = axes.iter().map(|a| Axis::parse(a)).collect::<CliResult<_>>()?;
            commands::cmd_sweep(&base, &SweepSpec::new(axes, max_parallel))?
        }
        Cmd::Verify { spec, record, residuals } => {
            let input = VerifyInput::load(&spec)?;
            commands::cmd_verify(&input, record.as_deref(), residuals, None)?
        }
        Cmd::Wave { d_c, c1, range, tol } => {
            let range = range.map(|r| (r[0], r[1]));
            commands::cmd_wave(d_c, c1, range, tol, None)?
        }
        Cmd::Ode { c0, h0, b, s, g, dt, t_end } => {
            commands::cmd_ode((c0, h0), KineticParams { b, s, g }, dt, t_end, None)?
        }
        Cmd::Report { dir } => commands::cmd_report(&dir)?,
        Cmd::Kpp { d, r, t_end, dx, band } => commands::cmd_kpp(d, r, t_end, dx, band, None)?,
        Cmd::PrintDefaults => {
            print!("{}", defaults_toml());
            return Ok(None);
        }
    };
    Ok(Some(dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(Some(dir)) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
