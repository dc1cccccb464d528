mod args;
mod document;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, Format};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (result, format, json) = match &cli.command {
        Command::Verify(a) => (run::verify(a), a.format, a.json.clone()),
        Command::Cumulants(a) => (run::cumulants(a), a.format, a.json.clone()),
        Command::Steady(a) => (run::steady(a), Format::Json, None),
        Command::Export(a) => (run::export(a), Format::Json, None),
    };
    let doc = match result.and_then(|doc| run::emit(&doc, format, &json, started).map(|_| doc)) {
        Ok(doc) => doc,
        Err(run::Failure(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if doc.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
