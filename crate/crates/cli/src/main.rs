use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use posprod_cli::{run, wants_json, Cli, Exit};

fn main() -> ExitCode {
    // Clap exits with 2 on usage errors, which is reserved for negative verdicts.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Exit::Error.code())
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let exit = match run(&cli, &mut out) {
        Ok(exit) => exit,
        Err(e) => {
            eprintln!("error: {e}");
            if wants_json(&cli) {
                let doc = serde_json::json!({ "status": "error", "message": e.to_string() });
                let _ = writeln!(out, "{doc}");
            }
            Exit::Error
        }
    };
    let _ = out.flush();
    ExitCode::from(exit.code())
}
