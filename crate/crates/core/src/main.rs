use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use poincare::config::load_config;
use poincare::pipeline::{Exit, Pipeline, PipelineError, Stage};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Characteristic roots and H1.
    Roots,
    /// Omega table of the reduced equation.
    Reduce,
    /// Hypothesis report per root.
    Check,
    /// Picard solves, one z CSV and certificate per root.
    Solve,
    /// Solve, then run every diagnostic and write diagnostics.csv.
    Verify,
    /// All stages in order.
    All,
}

impl From<Command> for Stage {
    fn from(c: Command) -> Self {
        match c {
            Command::Roots => Stage::Roots,
            Command::Reduce => Stage::Reduce,
            Command::Check => Stage::Check,
            Command::Solve => Stage::Solve,
            Command::Verify => Stage::Verify,
            Command::All => Stage::All,
        }
    }
}

/// Nonoscillatory solutions of Poincare-type linear ODEs by order reduction
/// and Picard iteration.
#[derive(Debug, Parser)]
#[command(name = "poincare", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
    /// Print nothing but errors.
    #[arg(short, long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                Exit::Usage.code()
            } else {
                0
            };
            return ExitCode::from(code as u8);
        }
    };
    let mut config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Exit::Usage.code() as u8);
        }
    };
    if let Some(dir) = cli.output_dir {
        config.output_dir = dir;
    }
    match Pipeline::new(config).run(cli.command.into()) {
        Ok(outcome) => {
            if !cli.quiet {
                print!("{}", outcome.log);
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            ExitCode::from(outcome.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                PipelineError::Stage { .. } => Exit::Failure,
                PipelineError::Io { .. } => Exit::Usage,
            };
            ExitCode::from(code.code() as u8)
        }
    }
}
