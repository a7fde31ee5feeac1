//! The `rilab` batch front-end.
//!
//! Each subcommand resolves a [`RunConfig`], runs one experiment on a rayon
//! pool of `--threads` workers and writes into `--out`:
//!
//! - `results.csv`, with a fixed header per subcommand (see [`csv_header`]);
//! - `summary.json`, holding the tool version, config hash, seed, wall-clock
//!   time, every check with its threshold and the effective configuration;
//! - `plot.gp` (with `--plot`), a gnuplot script reading `results.csv`.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails or too many
//! paths blow up, 1 on usage or configuration errors.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{Check, Outcome};
pub use config::{load_config, parse_real, parse_reals, Command, ConfigFile, RunConfig};
pub use output::{csv_header, SUMMARY_SCHEMA_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{}", format_config_error(.line, .key, .message))]
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Run(#[from] crate::Error),
}

fn format_config_error(line: &Option<usize>, key: &Option<String>, message: &str) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!("config line {l}, key `{k}`: {message}"),
        (Some(l), None) => format!("config line {l}: {message}"),
        (None, Some(k)) => format!("key `{k}`: {message}"),
        (None, None) => message.to_string(),
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(crate::Error::ExperimentInvalid { .. } | crate::Error::Blowup { .. }) => EXIT_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rilab",
    version,
    about = "Convergence experiments for repeated-interaction schemes",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Strong sup-error against an oracle, with log-log rate fits.
    Converge(Flags),
    /// Distance between the exact and interpolated shift of sampled paths.
    Shift(Flags),
    /// Stationary covariance of the damped oscillator.
    Stationary(Flags),
    /// Growth of the mean system energy of the harmonic pair.
    Energy(Flags),
    /// Increment moments of the limit process and interpolation-gap moments.
    Scaling(Flags),
    /// Sampling checks of the Lipschitz and remainder bounds.
    Validate(Flags),
    /// Closed-form flow of the harmonic pair.
    #[command(name = "flow-demo")]
    FlowDemo(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "rilab-out")]
    out: PathBuf,
    /// Also write a gnuplot script.
    #[arg(long)]
    plot: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,

    /// charged, harmonic or damped.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    charge: Option<String>,
    #[arg(long)]
    mass: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rest_length: Option<String>,
    #[arg(long)]
    friction: Option<String>,
    #[arg(long)]
    temperature: Option<String>,
    #[arg(long)]
    seed: Option<String>,

    /// Horizon of the sup-error.
    #[arg(long)]
    tau: Option<String>,
    /// Step sizes, e.g. `2^-4..2^-9` or `0.1,0.05`.
    #[arg(long = "h")]
    h_list: Option<String>,
    /// Number of Monte Carlo paths or chains.
    #[arg(long)]
    paths: Option<String>,
    /// Moment exponents, e.g. `2,4`.
    #[arg(long = "p")]
    p_list: Option<String>,
    /// Minimum ratio between the largest h and the oracle step.
    #[arg(long = "refinement")]
    oracle_refinement: Option<String>,
    #[arg(long)]
    oracle_step: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    slope_min: Option<String>,
    #[arg(long)]
    slope_max: Option<String>,
    #[arg(long)]
    r2_min: Option<String>,

    /// Shift times.
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    n_terms: Option<String>,
    /// Grid step of sampled paths or chains.
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    burn_in: Option<String>,
    /// Base time of the increment pairs.
    #[arg(long)]
    s: Option<String>,
    /// Time lags of the increment pairs.
    #[arg(long)]
    lags: Option<String>,
    /// Sampled points per hypothesis check.
    #[arg(long)]
    samples: Option<String>,
    /// Initial `(Q1, P1, Q2, P2)` of the closed-form flow.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let fields: [(&'static str, &Option<String>); 26] = [
            ("model", &self.model),
            ("charge", &self.charge),
            ("mass", &self.mass),
            ("rest_length", &self.rest_length),
            ("friction", &self.friction),
            ("temperature", &self.temperature),
            ("seed", &self.seed),
            ("tau", &self.tau),
            ("h_list", &self.h_list),
            ("paths", &self.paths),
            ("p_list", &self.p_list),
            ("oracle_refinement", &self.oracle_refinement),
            ("oracle_step", &self.oracle_step),
            ("x0", &self.x0),
            ("slope_min", &self.slope_min),
            ("slope_max", &self.slope_max),
            ("r2_min", &self.r2_min),
            ("t", &self.t),
            ("n_terms", &self.n_terms),
            ("step", &self.step),
            ("t_end", &self.t_end),
            ("burn_in", &self.burn_in),
            ("s", &self.s),
            ("lags", &self.lags),
            ("samples", &self.samples),
            ("state", &self.state),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

fn split(sub: Sub) -> (Command, Flags) {
    match sub {
        Sub::Converge(f) => (Command::Converge, f),
        Sub::Shift(f) => (Command::Shift, f),
        Sub::Stationary(f) => (Command::Stationary, f),
        Sub::Energy(f) => (Command::Energy, f),
        Sub::Scaling(f) => (Command::Scaling, f),
        Sub::Validate(f) => (Command::Validate, f),
        Sub::FlowDemo(f) => (Command::FlowDemo, f),
    }
}

/// Builds the run configuration from parsed flags.
fn configure(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
    let file = flags.config.as_deref().map(load_config).transpose()?;
    if flags.threads == Some(0) {
        return Err(CliError::Config {
            line: None,
            key: Some("threads".into()),
            message: "`threads` must be positive".into(),
        });
    }
    RunConfig::resolve(
        command,
        file.as_ref(),
        &flags.overrides(),
        flags.out.clone(),
        flags.plot,
        flags.threads,
    )
}

/// Runs the configured experiment and writes its outputs.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let outcome = pool.install(|| commands::dispatch(config))?;
    let elapsed = start.elapsed().as_secs_f64();
    output::write_all(config, &outcome, elapsed)?;
    Ok(outcome)
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    let (command, flags) = split(cli.command);
    let result = configure(command, &flags).and_then(|config| execute(&config).map(|o| (config, o)));
    match result {
        Ok((config, outcome)) => {
            for check in &outcome.checks {
                println!(
                    "{} {}: {} (threshold {})",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.value,
                    check.threshold
                );
            }
            println!("wrote {}", config.out.display());
            if outcome.passed() {
                EXIT_PASS
            } else {
                EXIT_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
