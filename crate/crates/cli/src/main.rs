use clap::Parser;
use laplab::app::{self, RunRequest, EXIT_USAGE};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical checks of limiting absorption, radiation conditions and Rellich-type
/// statements for one-body Schrodinger operators.
#[derive(Parser, Debug)]
#[command(name = "laplab", version)]
struct Cli {
    /// Suite to run (see --list), or `report` to aggregate verdicts under --out.
    command: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set grid.extent=512 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output base directory; run directories are created beneath it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel solves.
    #[arg(long)]
    workers: Option<usize>,
    /// List the available commands and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for c in app::commands() {
            println!("{c}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no command given; available: {}", app::commands().join(", "));
        return ExitCode::from(EXIT_USAGE as u8);
    };
    let req = RunRequest { command, config_path: cli.config, overrides: cli.set, out: cli.out, seed: cli.seed, workers: cli.workers };
    match app::run(&req) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            if let Some(dir) = &outcome.run_dir {
                println!("artifacts: {}", dir.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
