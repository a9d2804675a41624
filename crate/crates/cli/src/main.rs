//! `sframes`: builds models, lattices, cubature rules and frames from a JSON
//! run configuration, checks them and writes `report.json` plus CSV data.
//!
//! Exit codes: 0 when every certificate passes, 1 when one fails or a
//! computation errors, 2 for configuration problems (nothing is written).

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};
use report::Output;
use run::{FrameChoice, Session};

#[derive(Parser)]
#[command(name = "sframes", version, about = "Spectral frames, cubature and Besov norms")]
struct Cli {
    /// JSON run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies the numerical tolerances.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Filters(FiltersCmd),
    #[command(subcommand)]
    Lattice(LatticeCmd),
    #[command(subcommand)]
    Cubature(CubatureCmd),
    #[command(subcommand)]
    Frame(FrameCmd),
    #[command(subcommand)]
    Kernel(KernelCmd),
    #[command(subcommand)]
    Lp(LpCmd),
    #[command(subcommand)]
    Besov(BesovCmd),
    #[command(subcommand)]
    Pw1d(Pw1dCmd),
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Subcommand)]
enum FiltersCmd {
    /// CSV of every `G_j` and their sum on `[0, 2^(J-1)]`.
    Dump {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    Build {
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Subcommand)]
enum CubatureCmd {
    /// Calibrated positive rule exact up to `band`.
    Solve {
        #[arg(long)]
        band: Option<f64>,
    },
}

#[derive(Subcommand)]
enum FrameCmd {
    Build {
        #[arg(long, value_enum)]
        kind: FrameChoice,
    },
    /// Bounds, dual reconstruction and product bandwidth.
    Validate {
        #[arg(long, value_enum, default_value = "parseval")]
        kind: FrameChoice,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    Decay,
    Lpnorm,
}

#[derive(Subcommand)]
enum LpCmd {
    Check,
}

#[derive(Subcommand)]
enum BesovCmd {
    Compute,
    Equiv,
}

#[derive(Subcommand)]
enum Pw1dCmd {
    Irregular,
    Shannon,
    Cubature,
}

#[derive(Subcommand)]
enum SuiteCmd {
    All,
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Filters(_) => "filters dump",
            Command::Lattice(_) => "lattice build",
            Command::Cubature(_) => "cubature solve",
            Command::Frame(FrameCmd::Build { .. }) => "frame build",
            Command::Frame(FrameCmd::Validate { .. }) => "frame validate",
            Command::Kernel(KernelCmd::Decay) => "kernel decay",
            Command::Kernel(KernelCmd::Lpnorm) => "kernel lpnorm",
            Command::Lp(_) => "lp check",
            Command::Besov(BesovCmd::Compute) => "besov compute",
            Command::Besov(BesovCmd::Equiv) => "besov equiv",
            Command::Pw1d(Pw1dCmd::Irregular) => "pw1d irregular",
            Command::Pw1d(Pw1dCmd::Shannon) => "pw1d shannon",
            Command::Pw1d(Pw1dCmd::Cubature) => "pw1d cubature",
            Command::Suite(_) => "suite all",
        }
    }
}

fn execute(cfg: &RunConfig, command: &Command, threads: usize, out: &mut Output) -> Result<()> {
    let session = || Session::new(cfg, cfg.model.clone());
    match command {
        Command::Filters(FiltersCmd::Dump { levels, points }) => {
            run::filters_dump(cfg, levels.unwrap_or(cfg.levels), *points, out)
        }
        Command::Lattice(LatticeCmd::Build { radius }) => run::lattice_build(&session()?, *radius, out),
        Command::Cubature(CubatureCmd::Solve { band }) => run::cubature_solve(&session()?, *band, out),
        Command::Frame(FrameCmd::Build { kind }) => run::frame_build(&mut session()?, *kind, out),
        Command::Frame(FrameCmd::Validate { kind }) => run::frame_validate(&mut session()?, *kind, out),
        Command::Kernel(KernelCmd::Decay) => run::kernel_decay(&session()?, out),
        Command::Kernel(KernelCmd::Lpnorm) => run::kernel_lpnorm(&session()?, out),
        Command::Lp(LpCmd::Check) => run::lp_check(&session()?, out),
        Command::Besov(BesovCmd::Compute) => run::besov_compute(&session()?, out),
        Command::Besov(BesovCmd::Equiv) => run::besov_equiv(&mut session()?, out),
        Command::Pw1d(Pw1dCmd::Irregular) => run::pw1d_irregular(cfg, out),
        Command::Pw1d(Pw1dCmd::Shannon) => run::pw1d_shannon(cfg, out),
        Command::Pw1d(Pw1dCmd::Cubature) => run::pw1d_cubature(cfg, out),
        Command::Suite(SuiteCmd::All) => run::suite_all(cfg, threads, out),
    }
}

fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<ConfigError>().is_some()
            || matches!(c.downcast_ref::<spectral_frames::Error>(), Some(spectral_frames::Error::Config(_)))
    })
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol_scale {
        cfg.tol_scale = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Worker count for independent suites from `FRAMES_THREADS`. Dense linear
/// algebra stays sequential so reports do not depend on it.
fn threads_from_env() -> Result<usize> {
    spectral_frames::linalg::set_threads(1);
    match std::env::var("FRAMES_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config::config_error(format!("FRAMES_THREADS = '{v}' is not a count"))),
        Err(_) => Ok(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|threads| {
        let cfg = load(&cli)?;
        let mut out = Output::default();
        execute(&cfg, &cli.command, threads, &mut out)?;
        Ok((cfg, out))
    });
    let (cfg, out) = match result {
        Ok(v) => v,
        Err(e) if is_config_error(&e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    for c in &out.certificates {
        println!("{}", c.line());
    }
    if let Err(e) = report::write(&cli.out, cli.command.label(), &cfg.hash(), cfg.seed, cfg.tol_scale, &out) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let failed: Vec<&str> = out.certificates.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed: {}", failed.join(", "));
        ExitCode::from(1)
    }
}
