//! Command-line front end: argument model, subcommand dispatch and output rendering.

pub mod commands;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tfim_wasserstein::scaling::SIZE_LADDER;
use tfim_wasserstein::store::{CACHE_DIR_ENV, DEFAULT_CACHE_DIR};
use tfim_wasserstein::Error;

pub use output::{Format, Report};

#[derive(Debug, Parser)]
#[command(name = "tfimw", version, about, propagate_version = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Worker threads (default: one per core)
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallelism: Option<u16>,
    /// Absolute tolerance of every kernel integral
    #[arg(long, default_value_t = 1e-12, global = true, value_parser = positive)]
    pub quad_tol: f64,
    /// Correlator table cache
    #[arg(long, env = CACHE_DIR_ENV, default_value = DEFAULT_CACHE_DIR, global = true)]
    pub cache_dir: PathBuf,
    /// Compute every table from scratch and write nothing to disk
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Write to this file instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infinite-chain correlator C(n) = <sx_0 sx_n>, n = 1..=n_max
    Correlator {
        #[arg(long, value_parser = non_negative)]
        g: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n_max: u32,
    },
    /// <Mx> and <Mx^2> on a ring of L sites
    Observables {
        #[arg(long, value_parser = non_negative)]
        g: f64,
        #[arg(long = "L", value_parser = ring_size)]
        l: usize,
    },
    /// Squared Wasserstein distance between two ground states
    Distance {
        #[arg(long, value_parser = non_negative)]
        g_rho: f64,
        #[arg(long, value_parser = non_negative)]
        g_sigma: f64,
        #[arg(long = "L", value_parser = ring_size)]
        l: usize,
    },
    /// Quantum Fisher information 4 Var(Mx)
    Qfi {
        #[arg(long, value_parser = non_negative)]
        g: f64,
        #[arg(long = "L", value_parser = ring_size)]
        l: usize,
    },
    /// Exact diagonalization of a small chain (L <= 14)
    Oracle {
        #[arg(long, value_parser = non_negative)]
        g: f64,
        #[arg(long = "L", value_parser = oracle_size)]
        l: usize,
        #[arg(long, value_enum, default_value = "periodic")]
        boundary: BoundaryArg,
    },
    /// Sweep and fit one critical exponent
    Fit(FitArgs),
    /// Data behind one figure of the scaling study
    Reproduce {
        #[command(subcommand)]
        figure: Figure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMode {
    /// F_Q(g = 1) against L
    Qfi,
    /// D^2 against L at fixed couplings
    D2,
    /// (D^2/L^2 - 1/2) L at g_rho = 0 against g_sigma - 1
    Subleading,
    /// D^2/L^2 minus its offset against 1 - g_rho
    Leading,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub mode: FitMode,
    /// Ring sizes (qfi, d2)
    #[arg(long, value_delimiter = ',', value_parser = ring_size)]
    pub sizes: Option<Vec<usize>>,
    /// Fixed g_rho (d2)
    #[arg(long, value_parser = non_negative)]
    pub g_rho: Option<f64>,
    /// Fixed g_sigma (d2, leading; leading defaults to 10)
    #[arg(long, value_parser = non_negative)]
    pub g_sigma: Option<f64>,
    /// Ring size (subleading defaults to 700, leading to 500)
    #[arg(long = "L", value_parser = ring_size)]
    pub l: Option<usize>,
    /// Smallest |g - 1| of the log grid (subleading 0.02, leading 0.003)
    #[arg(long, value_parser = positive)]
    pub gt_min: Option<f64>,
    /// Largest |g - 1| of the log grid (subleading 0.2, leading 0.03)
    #[arg(long, value_parser = positive)]
    pub gt_max: Option<f64>,
    /// Grid points
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(3..))]
    pub points: u32,
}

#[derive(Debug, Subcommand)]
pub enum Figure {
    /// D^2/L^2 against g_sigma for several g_rho
    Fig1 {
        #[arg(long = "L", default_value_t = 500, value_parser = ring_size)]
        l: usize,
        /// g_rho curves. The default set is a free choice spanning both phases.
        #[arg(long, value_delimiter = ',', default_value = "0,0.4,0.8,1.0", value_parser = non_negative)]
        g_rho: Vec<f64>,
        #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
        g_sigma_min: f64,
        #[arg(long, default_value_t = 2.0, value_parser = non_negative)]
        g_sigma_max: f64,
        #[arg(long, default_value_t = 81, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
    },
    /// F_Q/L^(7/4) against g for each size, with the size fit at g = 1
    Fig2a {
        #[arg(long, value_delimiter = ',', default_values_t = SIZE_LADDER.to_vec(), value_parser = ring_size)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.8, value_parser = non_negative)]
        g_min: f64,
        #[arg(long, default_value_t = 1.2, value_parser = non_negative)]
        g_max: f64,
        #[arg(long, default_value_t = 41, value_parser = clap::value_parser!(u32).range(2..))]
        points: u32,
    },
    /// D^2 against L at g_rho = 1 - gt, g_sigma = 1 + gt, one fit per gt
    Fig2b {
        #[arg(long, value_delimiter = ',', default_values_t = SIZE_LADDER.to_vec(), value_parser = ring_size)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1e-5,1e-4,1e-3,1e-2,1e-1", value_parser = positive)]
        gt: Vec<f64>,
    },
    /// Subleading term at g_rho = 0 against g_sigma - 1, one fit per size
    Fig3a {
        #[arg(long = "L", value_delimiter = ',', default_value = "700", value_parser = ring_size)]
        l: Vec<usize>,
        #[arg(long, default_value_t = 0.02, value_parser = positive)]
        gt_min: f64,
        #[arg(long, default_value_t = 0.2, value_parser = positive)]
        gt_max: f64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(3..))]
        points: u32,
    },
    /// Leading term against 1 - g_rho with sigma deep in the disordered phase
    Fig3b {
        #[arg(long = "L", default_value_t = 500, value_parser = ring_size)]
        l: usize,
        #[arg(long, default_value_t = 10.0, value_parser = positive)]
        g_sigma: f64,
        #[arg(long, default_value_t = 3e-3, value_parser = positive)]
        gt_min: f64,
        #[arg(long, default_value_t = 3e-2, value_parser = positive)]
        gt_max: f64,
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(3..))]
        points: u32,
    },
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !v.is_finite() {
        return Err(format!("{s} is not finite"));
    }
    Ok(v)
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be positive"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{s} must be non-negative"))
    }
}

fn ring_size(s: &str) -> Result<usize, String> {
    let l: usize = s.parse().map_err(|e| format!("{e}"))?;
    if l < 2 {
        return Err(format!("ring size must be at least 2, got {l}"));
    }
    Ok(l)
}

fn oracle_size(s: &str) -> Result<usize, String> {
    let l = ring_size(s)?;
    if l > tfim_wasserstein::ed::MAX_SITES {
        return Err(format!(
            "exact diagonalization is limited to L <= {}",
            tfim_wasserstein::ed::MAX_SITES
        ));
    }
    Ok(l)
}

/// Exit status for a failed run: 2 for rejected input, 3 for numerical failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_)
        | Error::InsufficientPoints(_)
        | Error::DimensionTooLarge { .. }
        | Error::SizeMismatch(..) => 2,
        _ => 3,
    }
}

/// Runs one parsed command on a worker pool of `parallelism` threads (default: one per core).
pub fn execute(cli: &Cli) -> Result<String, Error> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.parallelism {
        pool = pool.num_threads(n as usize);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| commands::run(cli))?;
    Ok(report.render(cli.global.format))
}
