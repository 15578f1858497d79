//! `smeargas`: transmittance of ultra-diluted gas from the command line.
//!
//! Subcommands mirror the harness operations: `transmit` evaluates one
//! scenario, `sweep` emits the detector-size table, `ratio` runs the
//! paired-detector comparison, `mft` prints the kinetic helpers, and
//! `cloud` dumps sampled particle positions. Exit codes: 0 success,
//! 2 configuration error, 3 numeric error (underflow, non-convergence),
//! 1 I/O failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use smeared_gas::gascloud::{mean_free_time, sample_cloud};
use smeared_gas::harness::{load_config, parse_config, run_ratio, run_scenario, run_sweep, ScenarioConfig};
use smeared_gas::scattering::ScatterMethod;
use smeared_gas::wavepacket::{expected_sigma, SpreadMode, WavePacketSpec};
use smeared_gas::Error as ModelError;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "smeargas",
    version,
    about = "Optical transmittance of ultra-diluted gas with wave-packet spreading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario configuration file; every key has a default, so the flag
    /// may be omitted entirely
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the seed (cloud seed, or base seed for sweep/ratio)
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scattering method
    #[arg(long, value_parser = ["eq3", "exact-square", "quadrature"])]
    method: Option<String>,
    /// Override the repeat count (sweep and ratio)
    #[arg(long)]
    repeats: Option<u32>,
    /// Write the result to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Small detector size (circumscribed half-side or disk radius), m
    #[arg(long)]
    small: Option<f64>,
    /// Large detector size, m
    #[arg(long)]
    large: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario and print its transmittance
    Transmit(CommonArgs),
    /// Detector-size sweep: per-repeat rows plus per-size aggregates as CSV
    Sweep(CommonArgs),
    /// Paired-detector transmittance ratio with seed statistics
    Ratio(RatioArgs),
    /// Kinetic helpers: mean free time and effective spread of the gas
    Mft(CommonArgs),
    /// Sample the scenario cloud and dump particle positions as CSV
    Cloud(CommonArgs),
}

enum CliError {
    Io(std::io::Error),
    Config(String),
    Model(ModelError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

/// Numeric failures exit 3; everything else about a bad scenario exits 2.
fn model_error_code(e: &ModelError) -> u8 {
    match e {
        ModelError::QuadratureDidNotConverge { .. } | ModelError::RatioUndefined { .. } => {
            EXIT_NUMERIC
        }
        ModelError::Particle { source, .. }
        | ModelError::SweepPoint { source, .. }
        | ModelError::SweepRepeat { source, .. } => model_error_code(source),
        ModelError::Domain(_) | ModelError::CloudTooLarge { .. } => EXIT_CONFIG,
    }
}

fn load(common: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let config = match &common.config {
        Some(path) => load_config(path).map_err(|e| CliError::Config(e.to_string()))?,
        None => parse_config("").map_err(|e| CliError::Config(e.to_string()))?,
    };
    Ok(config)
}

fn apply_method(config: &mut ScenarioConfig, method: &Option<String>) {
    if let Some(m) = method {
        config.method = match m.as_str() {
            "eq3" => ScatterMethod::Eq3Bound,
            "quadrature" => {
                // keep a configured tolerance if the file set one
                match config.method {
                    ScatterMethod::Quadrature { abs_tol } => ScatterMethod::Quadrature { abs_tol },
                    _ => ScatterMethod::Quadrature { abs_tol: 1e-10 },
                }
            }
            _ => ScatterMethod::ExactSquare,
        };
    }
}

/// Writes `text` to `--out` when given, otherwise to stdout.
fn deliver(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn cmd_transmit(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = load(args)?;
    if let Some(seed) = args.seed {
        config.cloud.seed = seed;
    }
    apply_method(&mut config, &args.method);
    let outcome = run_scenario(&config)?;
    let mut text = String::new();
    text.push_str(&format!("method = {}\n", outcome.result.method));
    text.push_str(&format!("rng = {}\n", smeared_gas::gascloud::RNG_ALGORITHM));
    text.push_str(&format!("seed = {}\n", outcome.seed));
    if let Some(t) = outcome.spread.t_bar_s {
        text.push_str(&format!("t_bar_s = {t}\n"));
    }
    text.push_str(&format!("sigma_m = {}\n", outcome.spread.sigma_m));
    text.push_str(&format!("n_particles = {}\n", outcome.result.n_particles));
    text.push_str(&format!(
        "n_inside_tunnel = {}\n",
        outcome.result.n_inside_tunnel
    ));
    text.push_str(&format!("underflow = {}\n", outcome.result.underflow));
    text.push_str(&format!("tr = {}\n", outcome.result.tr));
    deliver(&args.out, &text)
}

fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = load(args)?;
    apply_method(&mut config, &args.method);
    let mut sweep = config.sweep.clone();
    if let Some(seed) = args.seed {
        sweep.base_seed = seed;
    }
    if let Some(repeats) = args.repeats {
        sweep.repeats = repeats;
    }
    let table = run_sweep(&config, &sweep)?;
    deliver(&args.out, &table.to_csv_string())
}

fn cmd_ratio(args: &RatioArgs) -> Result<(), CliError> {
    let mut config = load(&args.common)?;
    apply_method(&mut config, &args.common.method);
    let small = args.small.unwrap_or(config.ratio.small_m);
    let large = args.large.unwrap_or(config.ratio.large_m);
    let repeats = args.common.repeats.unwrap_or(config.ratio.repeats);
    let base_seed = args.common.seed.unwrap_or(config.sweep.base_seed);
    let report = run_ratio(&config, small, large, repeats, base_seed)?;
    println!("{}", report.summary());
    if let Some(path) = &args.common.out {
        write_file(path, &report.to_csv_string())?;
    }
    Ok(())
}

fn cmd_mft(args: &CommonArgs) -> Result<(), CliError> {
    let config = load(args)?;
    let species = &config.cloud.species;
    let t_bar = mean_free_time(species, config.cloud.pressure_pa, config.cloud.temperature_k)?;
    let packet = WavePacketSpec::new(species.mass_kg, species.sigma0_m)?;
    let at_mean = expected_sigma(&packet, t_bar, SpreadMode::AtMeanTime)?;
    let expected = expected_sigma(&packet, t_bar, SpreadMode::ExpectedOverExponential)?;
    let mut text = String::new();
    text.push_str(&format!("species = {}\n", species.name));
    text.push_str(&format!("pressure_pa = {}\n", config.cloud.pressure_pa));
    text.push_str(&format!("temperature_k = {}\n", config.cloud.temperature_k));
    text.push_str(&format!("t_bar_s = {t_bar}\n"));
    text.push_str(&format!("sigma_at_t_bar_m = {at_mean}\n"));
    text.push_str(&format!("sigma_expected_m = {expected}\n"));
    deliver(&args.out, &text)
}

fn cmd_cloud(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = load(args)?;
    if let Some(seed) = args.seed {
        config.cloud.seed = seed;
    }
    let cloud = sample_cloud(&config.cloud)?;
    let mut buf = Vec::new();
    cloud
        .write_positions_csv(&mut buf, Some(config.cloud.seed))
        .map_err(CliError::Io)?;
    let text = String::from_utf8(buf).expect("CSV output is ASCII");
    deliver(&args.out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Transmit(args) => cmd_transmit(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Ratio(args) => cmd_ratio(args),
        Command::Mft(args) => cmd_mft(args),
        Command::Cloud(args) => cmd_cloud(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("smeargas: i/o error: {e}");
            ExitCode::from(EXIT_IO)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("smeargas: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(CliError::Model(e)) => {
            eprintln!("smeargas: {e}");
            ExitCode::from(model_error_code(&e))
        }
    }
}
