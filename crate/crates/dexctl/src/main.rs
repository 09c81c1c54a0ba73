use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use dexctl::{execute, Cli, CommandOutput, Output};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Requested help/version goes to stdout and succeeds; every
            // other parse problem is a usage error on stderr, keeping
            // stdout clean for --json consumers.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprint!("{}", e.render());
            return ExitCode::from(2);
        }
    };
    let json = cli.json;
    let quiet = cli.quiet;

    match execute(cli.command) {
        Ok(CommandOutput::Done(output)) => emit(&output, json, quiet),
        Ok(CommandOutput::Serving { output, handle }) => {
            let code = emit(&output, json, quiet);
            if code != ExitCode::SUCCESS {
                return code;
            }
            // Scripts wait for the URL line before connecting.
            let _ = std::io::stdout().flush();
            handle.wait();
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn emit(output: &Output, json: bool, quiet: bool) -> ExitCode {
    if json {
        match dexdata::to_canonical_json(&output.document) {
            Ok(text) => println!("{text}"),
            Err(e) => {
                eprintln!("error: rendering json: {e}");
                return ExitCode::from(3);
            }
        }
    } else if !quiet {
        println!("{}", output.human);
    }
    ExitCode::SUCCESS
}
