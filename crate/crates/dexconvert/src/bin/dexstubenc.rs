//! Stub encoder binary, shaped like a real encoder invocation:
//!
//! ```text
//! dexstubenc <input_list> <fps> <output> [--limit-frames N]
//! ```
//!
//! `input_list` is a text file with one image path per line.
//! `--limit-frames` drops trailing frames, for fault-injection tests.

use std::path::PathBuf;
use std::process::ExitCode;

fn usage() -> ExitCode {
    eprintln!("usage: dexstubenc <input_list> <fps> <output> [--limit-frames N]");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 3 && args.len() != 5 {
        return usage();
    }
    let Ok(fps) = args[1].parse::<u32>() else {
        return usage();
    };
    let limit = if args.len() == 5 {
        if args[3] != "--limit-frames" {
            return usage();
        }
        match args[4].parse::<u64>() {
            Ok(n) => Some(n),
            Err(_) => return usage(),
        }
    } else {
        None
    };

    let list = match std::fs::read_to_string(&args[0]) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("dexstubenc: cannot read {}: {e}", args[0]);
            return ExitCode::FAILURE;
        }
    };
    let images: Vec<PathBuf> = list
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(PathBuf::from)
        .collect();

    match dexconvert::stubenc::encode(&images, fps, &PathBuf::from(&args[2]), limit) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dexstubenc: {e}");
            ExitCode::FAILURE
        }
    }
}
