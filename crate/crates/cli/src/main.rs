use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use pqelab_cli::config::{ExperimentConfig, Format};
use pqelab_cli::report::{render, ReportKind};
use pqelab_cli::run::run;

#[derive(Debug, Parser)]
#[command(name = "pqelab", version, about = "Projective quantum eigensolver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, short, global = true, default_value = "pqelab.toml")]
    config: PathBuf,
    /// Output directory, overriding `output.path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tabular format, overriding `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Base seed of the noisy protocol, overriding `protocol.base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the configured system(s) and write manifest and traces.
    Run,
    /// Print a report to stdout.
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
    },
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    cfg.apply_overrides(cli.out, cli.format, cli.seed);
    match cli.command {
        Command::Run => {
            let out = run(&cfg)?;
            for s in &out.systems {
                let std = s.final_std.map_or_else(String::new, |v| format!(" ± {v:.6}"));
                println!(
                    "{}: {} after {} iterations, E = {:.10}{std} (HF {:.10})",
                    s.label, s.status, s.iterations, s.final_energy, s.hf_energy
                );
            }
            println!("artifacts written to {}", out.dir.display());
        }
        Command::Report { kind } => print!("{}", render(&cfg, kind, cfg.output.format)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
