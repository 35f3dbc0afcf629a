use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sselab::load_target;
use sselab::presets::PRESETS;
use sselab::runner::{run, Overrides};
use sselab_core::Execution;

/// Qubit fidelity under stochastic Schrödinger equations: closed-form laws
/// checked against Monte-Carlo paths.
#[derive(Parser)]
#[command(name = "sselab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a named preset.
    Run {
        /// Preset name, TOML config, or a previous run.json.
        target: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        /// Exit with status 2 if any acceptance threshold is breached.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value = "sselab-out")]
        out: PathBuf,
    },
    /// List the built-in presets.
    Presets {
        /// Print the full configuration of each preset.
        #[arg(long)]
        verbose: bool,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_CHECK: u8 = 2;

fn init_threads() {
    let Ok(raw) = std::env::var("SSELAB_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring SSELAB_THREADS={raw:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Presets { verbose } => {
            for p in PRESETS {
                println!("{:<6}  {}", p.name, p.summary);
                if verbose {
                    println!("{}", p.toml.trim());
                    println!();
                }
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            target,
            seed,
            paths,
            check,
            out,
        } => {
            init_threads();
            let mut cfg = match load_target(&target) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Err(e) = (Overrides { seed, paths }).apply(&mut cfg) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            let report = match run(&cfg, &out, Execution::Parallel) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            for s in &report.scenarios {
                for c in &s.checks {
                    let tag = if c.passed { "ok  " } else { "FAIL" };
                    println!("{tag} {}/{}: {:.4e} (limit {:.4e})", s.name, c.name, c.value, c.limit);
                }
            }
            if check && !report.passed() {
                return ExitCode::from(EXIT_CHECK);
            }
            ExitCode::SUCCESS
        }
    }
}
