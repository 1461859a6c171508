//! `nlmetro` front end: strict JSON scenario configs in, CSV rows and JSON
//! summaries out.

// `!(x >= 0.0)` is the validation idiom: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use nlmetro_core::verify::DEFAULT_SEED;
use nlmetro_core::Param;

pub use commands::{Options, SlopeAssertion};
pub use config::ScenarioConfig;
pub use error::{CliError, Result};
use output::Destinations;

#[derive(Debug, Parser)]
#[command(
    name = "nlmetro",
    version,
    about = "Noisy quantum metrology of diagonal spin-chain models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON scenario config.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// CSV destination; the JSON summary goes next to it with a .json
    /// extension. Without it the CSV is printed to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Cross-check `qfi` rows against the dense master-equation oracle.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, value_name = "INT")]
    pub threads: Option<usize>,

    /// Hex seed, e.g. 5eed or 0x5eed.
    #[arg(long, global = true, value_name = "HEX", value_parser = parse_seed)]
    pub seed: Option<u64>,

    /// Fail with exit code 1 unless the fitted slope lies within tol of s.
    #[arg(long, global = true, value_name = "S:TOL", allow_hyphen_values = true)]
    pub assert_slope: Option<SlopeAssertion>,

    /// Which coupling's slope `--assert-slope` checks.
    #[arg(long, global = true, value_enum, default_value_t = SlopeParam::X1)]
    pub slope_param: SlopeParam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// QFI of both couplings with bounds, fidelity and purity over time.
    Qfi,
    /// Sensitivity bounds over n_range with fitted scaling exponents.
    Sweep,
    /// Run the verification suites (default corpus without a config).
    Verify,
    /// Zeno and decoherence times per register size.
    Timescales,
    /// Long-range Ising seminorms, timescales and bounds.
    Ising,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SlopeParam {
    X1,
    X2,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let digits = s.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| format!("`{s}` is not a hex u64: {e}"))
}

/// Runs one invocation; `Ok(false)` means a check or assertion failed.
pub fn run(cli: &Cli) -> Result<bool> {
    if cli.oracle && cli.command != Command::Qfi {
        return Err(CliError::Usage("--oracle only applies to `qfi`".into()));
    }
    if cli.assert_slope.is_some() && !matches!(cli.command, Command::Sweep | Command::Ising) {
        return Err(CliError::Usage(
            "--assert-slope only applies to `sweep` and `ising`".into(),
        ));
    }
    let cfg = match (&cli.config, cli.command) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Command::Verify) => ScenarioConfig::default(),
        (None, cmd) => {
            return Err(CliError::Usage(format!(
                "`{}` needs --config <path>",
                format!("{cmd:?}").to_lowercase()
            )))
        }
    };
    let opts = Options {
        oracle: cli.oracle,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        assert_slope: cli.assert_slope,
        slope_param: match cli.slope_param {
            SlopeParam::X1 => Param::X1,
            SlopeParam::X2 => Param::X2,
        },
    };
    let pool = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t),
        None => rayon::ThreadPoolBuilder::new(),
    }
    .build()
    .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| match cli.command {
        Command::Qfi => commands::qfi(&cfg, &opts),
        Command::Sweep => commands::sweep(&cfg, &opts),
        Command::Verify => commands::verify(&cfg, &opts),
        Command::Timescales => commands::timescales(&cfg, &opts),
        Command::Ising => commands::ising(&cfg, &opts),
    })?;
    let dest = match (&cli.out, &cfg.output) {
        (Some(out), _) => Destinations::from_out(out),
        (None, Some(o)) => Destinations {
            csv: o.csv.clone(),
            json: o.json.clone(),
        },
        (None, None) => Destinations::default(),
    };
    output::emit(&report, &dest)?;
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_accept_both_hex_spellings() {
        assert_eq!(parse_seed("5eed").unwrap(), 0x5eed);
        assert_eq!(parse_seed("0x5EED").unwrap(), 0x5eed);
        assert!(parse_seed("xyz").is_err());
    }

    #[test]
    fn negative_slopes_parse_as_values() {
        let cli = Cli::try_parse_from([
            "nlmetro",
            "sweep",
            "--config",
            "c.json",
            "--assert-slope",
            "-1.5:0.05",
        ])
        .unwrap();
        assert_eq!(cli.assert_slope.unwrap().expected, -1.5);
    }
}
