use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noslip_cyl::{run_scenario, validate, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(name = "noslip-cyl", about = "No-slip billiards and rolling in cylinders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its output files.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario config without running it.
    Validate { config: PathBuf },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Version => {
            println!("noslip-cyl {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Command::Validate { config } => ScenarioConfig::load(&config).and_then(|c| validate(&c)).map(|plan| {
            println!("ok: {:?}", plan.scenario);
        }),
        Command::Run { config, out } => ScenarioConfig::load(&config).and_then(|c| {
            let dir = out.or_else(|| c.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
            let summary = run_scenario(&c, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?);
            Ok::<_, CliError>(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("noslip-cyl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
