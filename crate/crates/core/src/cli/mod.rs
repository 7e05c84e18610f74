//! The `mesodrop` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 numeric failure, 4 a `--check` comparison out of tolerance.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::shortscale::Coupling;
use config::{validate_epsilons, Format, RunConfig};
use report::Writer;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("acceptance comparison failed: {0}")]
    Acceptance(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Acceptance(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidInput(m) => CliError::Config(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mesodrop", version, about = "Smoothed potentials and mean-field droplets for He-4")]
pub struct Cli {
    /// JSON run configuration; every section is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo seed (overrides seeds.mc_seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the bare pair potential and analyse its well.
    Potential {
        #[arg(long, allow_hyphen_values = true)]
        rmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        rmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tabulate the smoothed potential for one ξ and N.
    Smooth(XiN),
    /// Smoothed-well positions and depths against the published table.
    Table1(Check),
    /// The three smoothed profiles of the figure.
    Fig1,
    /// Solve the Hartree problem for one droplet.
    Scf {
        #[command(flatten)]
        target: XiN,
        #[arg(long, allow_hyphen_values = true)]
        mixing: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Scan ξ and report the lowest Hartree energy.
    Xiscan {
        #[arg(long)]
        n: Option<u64>,
        /// `start:stop:step` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        xi_list: Option<String>,
    },
    /// Pair short-scale response and the C correction.
    Shortscale {
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        #[arg(long = "R", allow_hyphen_values = true)]
        r: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        smax: Option<f64>,
        #[arg(long)]
        intervals: Option<usize>,
    },
    /// Amplitude scaling of the response with ε.
    Scaling {
        #[arg(long, default_value = "weak")]
        coupling: Coupling,
        /// Comma-separated ε values.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<String>,
    },
    /// Quadrature against Monte Carlo at the configured (ξ, R) points.
    Oracle {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every command with one configuration.
    All(Check),
}

#[derive(Debug, Args)]
pub struct XiN {
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Check {
    /// Exit with code 4 when a published comparison is out of tolerance.
    #[arg(long)]
    pub check: bool,
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

/// `a:b:step` (inclusive of b up to rounding) or `a,b,c`.
pub fn parse_xi_list(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => parse_list(text),
        3 => {
            let v = parse_list(&parts.join(","))?;
            let (a, b, step) = (v[0], v[1], v[2]);
            if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                return Err(CliError::Config(format!("bad range {text:?}")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(CliError::Config(format!("bad xi list {text:?}"))),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Folds command-line overrides into the configuration.
pub fn apply_overrides(cfg: &mut RunConfig, cli: &Cli) -> Result<(), CliError> {
    if let Some(out) = &cli.out {
        cfg.output.directory = out.to_string_lossy().into_owned();
    }
    set(&mut cfg.seeds.mc_seed, cli.seed);
    match &cli.command {
        Command::Potential { rmin, rmax, samples } => {
            set(&mut cfg.profiles.r_min_angstrom, *rmin);
            set(&mut cfg.profiles.r_max_angstrom, *rmax);
            set(&mut cfg.profiles.n_points, *samples);
        }
        Command::Smooth(t) => {
            set(&mut cfg.kernel.xi, t.xi);
            set(&mut cfg.droplet.n, t.n);
        }
        Command::Scf {
            target,
            mixing,
            tol,
            max_iter,
        } => {
            set(&mut cfg.kernel.xi, target.xi);
            set(&mut cfg.droplet.n, target.n);
            set(&mut cfg.scf.mixing, *mixing);
            set(&mut cfg.scf.tol, *tol);
            set(&mut cfg.scf.max_iter, *max_iter);
        }
        Command::Xiscan { n, xi_list } => {
            set(&mut cfg.droplet.n, *n);
            if let Some(t) = xi_list {
                cfg.xiscan.xi_values = parse_xi_list(t)?;
            }
        }
        Command::Shortscale { xi, r, smax, intervals } => {
            set(&mut cfg.kernel.xi, *xi);
            set(&mut cfg.shortscale.r_context_angstrom, *r);
            if smax.is_some() {
                cfg.shortscale.s_max_angstrom = *smax;
            }
            set(&mut cfg.shortscale.intervals, *intervals);
        }
        Command::Scaling { eps, .. } => {
            if let Some(t) = eps {
                let v = parse_list(t)?;
                validate_epsilons(&v)?;
                cfg.shortscale.epsilons = v;
            }
        }
        Command::Oracle { samples } => set(&mut cfg.oracle.samples, *samples),
        Command::Table1(_) | Command::Fig1 | Command::All(_) => {}
    }
    cfg.validate()
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MESODROP_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("MESODROP_THREADS must be a positive integer, got {v:?}")))?;
        // A pool built earlier in the process (tests) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    apply_overrides(&mut cfg, &cli)?;
    let dir = PathBuf::from(&cfg.output.directory);
    let ctx = commands::Ctx::new(cfg);
    let mut w = Writer::new(
        &dir,
        ctx.hash.clone(),
        ctx.cfg.wants(Format::Json),
        ctx.cfg.wants(Format::Csv),
    )?;
    log::info!("config hash {}", ctx.hash);
    let started = std::time::Instant::now();
    let result = match &cli.command {
        Command::Potential { .. } => commands::potential(&ctx, &mut w),
        Command::Smooth(_) => commands::smooth(&ctx, &mut w),
        Command::Table1(c) => {
            let ok = commands::table1(&ctx, &mut w)?;
            if c.check && !ok {
                Err(CliError::Acceptance("table1 values outside tolerance".into()))
            } else {
                Ok(())
            }
        }
        Command::Fig1 => commands::fig1(&ctx, &mut w),
        Command::Scf { .. } => commands::scf(&ctx, &mut w),
        Command::Xiscan { .. } => commands::xiscan(&ctx, &mut w),
        Command::Shortscale { .. } => commands::shortscale(&ctx, &mut w),
        Command::Scaling { coupling, .. } => commands::scaling(&ctx, &mut w, *coupling),
        Command::Oracle { .. } => commands::oracle(&ctx, &mut w),
        Command::All(c) => {
            let ok = commands::all(&ctx, &mut w)?;
            if !ok {
                Err(CliError::Numeric("one or more steps failed; see all.json".into()))
            } else if c.check && !commands::table1_passed(&dir)? {
                Err(CliError::Acceptance("table1 values outside tolerance".into()))
            } else {
                Ok(())
            }
        }
    };
    log::info!("finished in {:.2?}", started.elapsed());
    result
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main_entry() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mesodrop: {e}");
            e.exit_code()
        }
    }
}
