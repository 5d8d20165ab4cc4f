use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use elasto_bem::config::Config;
use elasto_bem::tasks::{run, Task};

/// Assemble elastic boundary operators and run verification campaigns.
#[derive(Parser, Debug)]
#[command(name = "elasto-bem", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    task: Task,
    /// Output directory, created if missing.
    #[arg(long, env = "ELASTO_BEM_OUT")]
    out: PathBuf,
    /// Worker threads for assembly (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Config::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                elasto_bem::config::ConfigError::Io { .. } => 3,
                _ => 2,
            };
            return ExitCode::from(code);
        }
    };
    match run(&cfg, cli.task, &cli.out, cli.threads) {
        Ok(report) => {
            let mut failed = false;
            for c in report.failures() {
                eprintln!("check failed: {} ({})", c.name, c.detail);
                failed = true;
            }
            if failed {
                ExitCode::from(1)
            } else {
                println!("{}: {} checks passed", cli.task.name(), report.checks.len());
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
