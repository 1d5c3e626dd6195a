use std::process::ExitCode;

use clap::Parser;
use queue_regret::cli::{error_line, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{}", serde_json::json!({ "error": "check_failed", "message": "one or more checks failed" }));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(2)
        }
    }
}
