use std::process::ExitCode;

use clap::Parser;
use esd_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for failure in &outcome.failures {
                eprintln!("esdsim: failed: {failure}");
            }
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("esdsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
