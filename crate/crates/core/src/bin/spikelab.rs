use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spikelab::cli::{self, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "spikelab", version, about = "Spike-layer solutions on conformally flat tori")]
struct Args {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check a configuration and print the exponent data.
    Validate { config: PathBuf },
    /// Run the continuation series and checks of a configuration.
    Run { config: PathBuf },
    /// Solve or load the entire ground state of a configuration.
    Entire { config: PathBuf },
    /// Re-render the summary of a finished run directory.
    Report { dir: PathBuf },
}

fn main() -> ExitCode {
    let code = match Args::parse().verb {
        Verb::Validate { config } => cli::load_config(&config).map(|c| {
            let r = cli::validate(&c);
            print!("{}", r.render());
            if r.ok() { EXIT_OK } else { EXIT_CONFIG }
        }),
        Verb::Run { config } => cli::load_config(&config).and_then(|c| cli::run(&c)).map(|o| {
            print!("{}", std::fs::read_to_string(o.dir.join("summary.txt")).unwrap_or_default());
            o.summary.exit_code
        }),
        Verb::Entire { config } => cli::load_config(&config).and_then(|c| cli::entire(&c)).map(|(_, path, text)| {
            print!("{text}");
            println!("written to {}", path.display());
            EXIT_OK
        }),
        Verb::Report { dir } => cli::report(&dir).map(|text| {
            print!("{text}");
            if text.contains("[FAIL]") { EXIT_ASSERTION } else { EXIT_OK }
        }),
    };
    match code {
        Ok(c) => ExitCode::from(c as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
