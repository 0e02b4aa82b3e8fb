use std::process::ExitCode;

use clap::Parser;
use fene_fps::run::{diagnostic_json, run_cli, Cli};
use fene_fps::FeneError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let err = FeneError::InvalidParameter {
                field: "arguments".into(),
                reason: e.kind().to_string(),
            };
            eprint!("{e}");
            eprintln!("{}", diagnostic_json(&err));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    ExitCode::from(run_cli(&cli))
}
