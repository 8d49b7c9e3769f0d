//! Runs every acceptance criterion with the default configuration and prints
//! one line per criterion.

use std::process::ExitCode;

use wavprod::selfcheck::{run_selfcheck_with, SelfcheckConfig};

fn main() -> ExitCode {
    let cfg = SelfcheckConfig::default();
    let summary = match run_selfcheck_with(&cfg, |result| println!("{}", result.line())) {
        Ok(summary) => summary,
        Err(e) => {
            eprintln!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    let passed = summary.criteria.iter().filter(|c| c.passed).count();
    println!(
        "acceptance: {passed}/{} criteria passed",
        summary.criteria.len()
    );
    match summary.first_failure {
        None => ExitCode::SUCCESS,
        Some(name) => {
            eprintln!("first failure: {name}");
            ExitCode::FAILURE
        }
    }
}
