//! `phlab` — command-line front end of the laboratory.
//!
//! Every subcommand prints one JSON document to stdout. `sweep` also writes
//! CSV/JSON/plot files into the configured output directory (overridable
//! with `PHLAB_OUTPUT_DIR`). Exit codes: 0 success, 1 usage or invalid
//! parameters, 2 a search or bisection that correctly found nothing,
//! 3 I/O failure.

use clap::{Parser, Subcommand};
use phlab_cli::config::{
    ConfigError, ExperimentConfig, DEFAULT_MASTER_SEED, DEFAULT_N_ITERS, DEFAULT_N_SEEDS,
    DEFAULT_WARMUP,
};
use phlab_cli::emit::{self, EmitError};
use phlab_cli::sweep::{self, BisectionError, SearchError};
use phlab_core::conefield::epsilon_terms;
use phlab_core::{
    certify_perturbed, cone_constants, integral_of_log_hu, lyapunov_mc, solve_spectrum,
    AdaptedChart, BumpMap, GridSpec, LocalizedBump, PerturbedDiffeo, QuadratureSpec, SpectralData,
    TorusPoint, Vec3,
};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phlab",
    version,
    about = "Numerical laboratory for a family of partially hyperbolic torus maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, eigenvectors, and adapted-basis data for one family member
    Spectrum {
        #[arg(long)]
        k: i64,
    },
    /// Cone apertures, contraction rates, and the certified C¹ budget for one family member
    Constants {
        #[arg(long)]
        k: i64,
    },
    /// Quadrature of I(h), the bump's mean log dampening of the unstable stretch
    Ih {
        #[arg(long)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        /// Midpoint cells per axis
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Cone-field certificate for one perturbed map
    Certify {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        amplitude: f64,
        #[arg(long)]
        radius: f64,
        /// Ball center on the torus, comma-separated
        #[arg(long, value_delimiter = ',', num_args = 3)]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = phlab_cli::config::DEFAULT_CERT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = phlab_cli::config::DEFAULT_CERT_DIRS)]
        dirs: usize,
    },
    /// Monte-Carlo Lyapunov spectrum for one perturbed map
    Lyapunov {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        amplitude: f64,
        #[arg(long)]
        radius: f64,
        #[arg(long, value_delimiter = ',', num_args = 3)]
        center: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_N_SEEDS)]
        seeds: usize,
        #[arg(long, default_value_t = DEFAULT_N_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
        #[arg(long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
    },
    /// One table row per k: spectrum, constants, certificate, estimates, bound
    Sweep {
        /// TOML experiment file; omitted means the built-in defaults
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Smallest-k parameter triple whose central exponent is positive with confidence
    FindPositive {
        /// TOML experiment file; omitted means the built-in defaults
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Bisect the ball radius until the central exponent's CI straddles zero
    FindR0 {
        #[arg(long)]
        k: i64,
        #[arg(long)]
        amplitude: f64,
        /// Upper bracket radius; its exponent must measure strictly positive
        #[arg(long)]
        rhi: f64,
        /// TOML experiment file; omitted means the built-in defaults
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// A failed run: what to print and what to exit with.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
    fn not_found(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
    fn io(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Unreadable { .. } | ConfigError::Unwritable { .. } => {
                Failure::io(err.to_string())
            }
            ConfigError::Parse(_) | ConfigError::Invalid { .. } => Failure::usage(err.to_string()),
        }
    }
}

impl From<EmitError> for Failure {
    fn from(err: EmitError) -> Self {
        Failure::io(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version arrive here too; they are not failures.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("reports serialize")
    );
}

fn spectrum_for(k: i64) -> Result<SpectralData, Failure> {
    solve_spectrum(k).map_err(|e| Failure::usage(format!("spectrum: {e}")))
}

fn load_or_default(path: Option<&std::path::Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => Ok(ExperimentConfig::load(p)?),
        None => Ok(ExperimentConfig::default()),
    }
}

/// Build the perturbed map a one-shot subcommand asks for.
fn diffeo_from_flags(
    spectral: &SpectralData,
    amplitude: f64,
    radius: f64,
    center: &Option<Vec<f64>>,
) -> Result<PerturbedDiffeo, Failure> {
    let defaults = ExperimentConfig::default();
    let bump = BumpMap::new(amplitude, defaults.bump.margin)
        .map_err(|e| Failure::usage(format!("bump: {e}")))?;
    let c = match center {
        Some(c) => [c[0], c[1], c[2]],
        None => defaults.ball.center,
    };
    let chart = AdaptedChart::new(spectral, TorusPoint::new(c[0], c[1], c[2]), radius)
        .map_err(|e| Failure::usage(format!("chart: {e}")))?;
    Ok(PerturbedDiffeo::with_bump(LocalizedBump::new(bump, chart)))
}

#[derive(Serialize)]
struct SpectrumReport {
    k: i64,
    lambda_s: f64,
    lambda_c: f64,
    lambda_u: f64,
    log_lambda_s: f64,
    log_lambda_c: f64,
    log_lambda_u: f64,
    theta: f64,
    e_s: Vec3,
    e_c: Vec3,
    e_u: Vec3,
}

#[derive(Serialize)]
struct ConstantsReport {
    constants: phlab_core::ConeConstants,
    /// The four admissibility terms whose minimum is the budget ε.
    epsilon_terms: [f64; 4],
}

#[derive(Serialize)]
struct SweepReport {
    rows: usize,
    rows_with_errors: usize,
    files: Vec<PathBuf>,
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Spectrum { k } => {
            let sd = spectrum_for(k)?;
            print_json(&SpectrumReport {
                k,
                lambda_s: sd.lambda_s,
                lambda_c: sd.lambda_c,
                lambda_u: sd.lambda_u,
                log_lambda_s: sd.lambda_s.ln(),
                log_lambda_c: sd.lambda_c.ln(),
                log_lambda_u: sd.lambda_u.ln(),
                theta: sd.theta,
                e_s: sd.e_s,
                e_c: sd.e_c,
                e_u: sd.e_u,
            });
            Ok(())
        }
        Command::Constants { k } => {
            let sd = spectrum_for(k)?;
            let constants = cone_constants(&sd);
            print_json(&ConstantsReport {
                constants,
                epsilon_terms: epsilon_terms(&constants),
            });
            Ok(())
        }
        Command::Ih { amplitude, margin, grid } => {
            let bump = BumpMap::new(amplitude, margin)
                .map_err(|e| Failure::usage(format!("bump: {e}")))?;
            let est = integral_of_log_hu(&bump, QuadratureSpec::Midpoint { cells_per_axis: grid })
                .map_err(|e| Failure::usage(format!("quadrature: {e}")))?;
            print_json(&est);
            Ok(())
        }
        Command::Certify { k, amplitude, radius, center, points, dirs } => {
            let sd = spectrum_for(k)?;
            let f = diffeo_from_flags(&sd, amplitude, radius, &center)?;
            let cert = certify_perturbed(&f, &cone_constants(&sd), GridSpec {
                n_points: points,
                n_dirs: dirs,
            });
            print_json(&cert);
            Ok(())
        }
        Command::Lyapunov { k, amplitude, radius, center, seeds, iters, warmup, seed } => {
            if seeds < 2 {
                return Err(Failure::usage("--seeds must be at least 2"));
            }
            if iters == 0 {
                return Err(Failure::usage("--iters must be at least 1"));
            }
            let sd = spectrum_for(k)?;
            let f = diffeo_from_flags(&sd, amplitude, radius, &center)?;
            let est = lyapunov_mc(&f, seeds, iters, warmup, seed);
            print_json(&est);
            Ok(())
        }
        Command::Sweep { config } => {
            let config = load_or_default(config.as_deref())?;
            let rows = sweep::sweep_k(&config);
            let files = emit::emit_sweep(&config.output_dir(), &rows)?;
            print_json(&SweepReport {
                rows: rows.len(),
                rows_with_errors: rows.iter().filter(|r| r.error.is_some()).count(),
                files,
            });
            Ok(())
        }
        Command::FindPositive { config } => {
            let config = load_or_default(config.as_deref())?;
            match sweep::find_positive_example(&config) {
                Ok(example) => {
                    print_json(&example);
                    Ok(())
                }
                Err(SearchError::NotFound { trace }) => {
                    eprintln!(
                        "{}",
                        serde_json::to_string_pretty(&trace).expect("trace serializes")
                    );
                    Err(Failure::not_found(
                        "no candidate separated its central exponent from zero \
                         (search trace above)",
                    ))
                }
            }
        }
        Command::FindR0 { k, amplitude, rhi, config } => {
            let config = load_or_default(config.as_deref())?;
            match sweep::find_r0(k, amplitude, rhi, &config) {
                Ok(result) => {
                    print_json(&result);
                    Ok(())
                }
                Err(err @ (BisectionError::BracketInvalid(_) | BisectionError::Unresolved(_))) => {
                    Err(Failure::not_found(err.to_string()))
                }
                Err(BisectionError::Setup(reason)) => Err(Failure::usage(reason)),
            }
        }
    }
}
