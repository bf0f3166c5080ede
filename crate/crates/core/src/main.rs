use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frontfix::cli::{self, Options, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "frontfix", version, about = "Front-fixing solver and regularity probes for a parabolic free boundary problem")]
struct Cli {
    /// Experiment configuration (flat key = value file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Solve even when the compatibility conditions fail.
    #[arg(long, global = true)]
    waive_compat: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the corner compatibility conditions of the data.
    Check,
    /// Run the solver and write front.csv, snapshots and summary.json.
    Solve,
    /// Manufactured-solution convergence study.
    Mms,
    /// Solve, then probe the front for derivative jumps and Hoelder regularity.
    Probe,
    /// Steady front for a constant boundary value.
    Equilibrium {
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        sigma: f64,
    },
}

fn load(cli: &Cli) -> frontfix::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| frontfix::Error::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> frontfix::Result<i32> {
    let opts = Options {
        waive_compat: cli.waive_compat,
    };
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Check => cli::cmd_check(&load(cli)?, &mut stdout),
        Command::Solve => cli::cmd_solve(&load(cli)?, opts, &mut stdout),
        Command::Mms => cli::cmd_mms(&load(cli)?, &mut stdout),
        Command::Probe => cli::cmd_probe(&load(cli)?, opts, &mut stdout),
        Command::Equilibrium { c, lambda, sigma } => cli::cmd_equilibrium(*c, *lambda, *sigma, &mut stdout),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
