use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jellium_cli::{config, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "jellium", version = jellium_cli::run::VERSION, about = "Seeded experiments on the one-dimensional jellium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run { config: PathBuf },
    /// Check a config and estimate its cost without running it.
    Validate { config: PathBuf },
    /// Print the JSON schema of the config document.
    Schema,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ExperimentConfig::parse(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => load(&config).and_then(|c| jellium_cli::run(&c)).map(|m| {
            println!(
                "{} finished in {:.3} s; artifacts in {}",
                serde_json::to_string(&m.experiment).unwrap_or_default(),
                m.wall_time_s,
                m.config.resolved_output_dir().display()
            );
        }),
        Command::Validate { config } => load(&config).and_then(|c| jellium_cli::validate(&c)).map(|d| {
            println!("{}", serde_json::to_string_pretty(&d).expect("diagnostics serialize"));
        }),
        Command::Schema => {
            let text = serde_json::to_string_pretty(&config::schema()).expect("schema serializes");
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
