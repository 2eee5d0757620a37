//! Command-line front end for the Clark-measure library: construction with
//! certificates, the identity verification suite, and parameter scans, all
//! emitting machine-readable reports.

pub mod commands;
pub mod config;
pub mod report;

use commands::{cmd_construct, cmd_scan, cmd_verify};
use config::{parse_args, Command, USAGE};

/// Entry point shared by the binary and the integration tests.
/// Exit codes: 0 success, 1 verification/construction failure, 2 usage error.
pub fn run_cli(args: &[String]) -> i32 {
    let cfg = match parse_args(args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            if msg.is_empty() {
                println!("{USAGE}");
                return 0;
            }
            eprintln!("error: {msg}");
            eprintln!("{USAGE}");
            return 2;
        }
    };
    let result = match cfg.command {
        Command::Construct => cmd_construct(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Scan => cmd_scan(&cfg),
    };
    match result {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            if report.checks.iter().all(|c| c.pass) {
                0
            } else {
                1
            }
        }
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
