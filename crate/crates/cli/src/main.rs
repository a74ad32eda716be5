use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zoo_opt_cli::{execute, Command, ExperimentConfig, RunOptions, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "zoo-opt", version, about = "Zeroth-order Newton optimizer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; falls back to ZOO_OPT_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the two-stage optimizer for each trial.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Record per-trial wall time (output is then not reproducible).
        #[arg(long)]
        record_timing: bool,
    },
    /// Run a verification suite: bias, variance, concentration, noise-tail, prop13, newton.
    Verify {
        check: String,
        #[command(flatten)]
        common: Common,
        /// Multiply the bias bound by this factor.
        #[arg(long, default_value_t = 1.0)]
        bound_scale: f64,
    },
    /// Measure mean regret over a grid of budgets and fit the exponent.
    RegretSweep {
        #[command(flatten)]
        common: Common,
        /// Fit injected c T^(-2/3) regrets instead of running the optimizer.
        #[arg(long)]
        synthetic_fit: bool,
    },
    /// Audit the lower-bound hard instances on a dense grid.
    AuditLowerBound {
        #[command(flatten)]
        common: Common,
    },
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("ZOO_OPT_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("ZOO_OPT_THREADS={v} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, opts) = match cli.command {
        Sub::Optimize { common, record_timing } => {
            (Command::Optimize, common, RunOptions { record_timing, ..RunOptions::default() })
        }
        Sub::Verify { check, common, bound_scale } => {
            (Command::Verify, common, RunOptions { check: Some(check), bound_scale, ..RunOptions::default() })
        }
        Sub::RegretSweep { common, synthetic_fit } => {
            (Command::RegretSweep, common, RunOptions { synthetic_fit, ..RunOptions::default() })
        }
        Sub::AuditLowerBound { common } => (Command::AuditLowerBound, common, RunOptions::default()),
    };
    let opts = RunOptions { out: common.out.clone(), seed: common.seed, ..opts };

    match threads(common.threads) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("zoo-opt: cannot configure {n} threads: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("zoo-opt: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }

    let config = match common.config.as_deref().map(ExperimentConfig::load).transpose() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("zoo-opt: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    match execute(config, command, &opts) {
        Ok(done) => {
            println!("{}", done.csv.display());
            println!("{}", done.json.display());
            if done.pass {
                ExitCode::from(EXIT_PASS as u8)
            } else {
                eprintln!("zoo-opt: one or more checks failed");
                ExitCode::from(EXIT_CHECK_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("zoo-opt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
