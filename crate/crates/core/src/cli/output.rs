use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::commands::Outcome;
use super::config::{Command, RunConfig};
use super::CliError;

/// Version of the `summary.json` layout.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Header line of `results.csv` for each subcommand.
pub fn csv_header(command: Command) -> &'static str {
    match command {
        Command::Converge => "h,p,error,ci_low,ci_high,n_paths,n_blowups",
        Command::Shift => "path,t,h,distance",
        Command::Stationary => "quantity,empirical,reference,std_error",
        Command::Energy => "t,mean_energy",
        Command::Scaling => "kind,x,moment",
        Command::Validate => "check,h,estimate,declared,violated",
        Command::FlowDemo => "t,q1,p1,q2,p2,energy",
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// JSON cannot hold NaN or infinities; they become strings.
fn finite_or_text(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

pub(super) fn summary(config: &RunConfig, outcome: &Outcome, elapsed: f64) -> Value {
    let checks: Vec<Value> = outcome
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "value": finite_or_text(c.value),
                "threshold": c.threshold,
                "passed": c.passed,
            })
        })
        .collect();
    json!({
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "tool": "rilab",
        "version": crate::VERSION,
        "subcommand": config.command.name(),
        "config_hash": config.hash(),
        "master_seed": config.seed(),
        "wall_clock_seconds": elapsed,
        "threads": config.threads.unwrap_or_else(rayon::current_num_threads),
        "passed": outcome.passed(),
        "checks": checks,
        "results": outcome.results,
        "effective_config": config.values,
    })
}

pub(super) fn write_all(config: &RunConfig, outcome: &Outcome, elapsed: f64) -> Result<(), CliError> {
    let dir = &config.out;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(&dir.join("results.csv"), &outcome.csv)?;
    let text = serde_json::to_string_pretty(&summary(config, outcome, elapsed))
        .map_err(|e| CliError::Io(format!("summary.json: {e}")))?;
    write(&dir.join("summary.json"), &(text + "\n"))?;
    if config.plot {
        write(&dir.join("plot.gp"), &outcome.plot)?;
    }
    Ok(())
}
