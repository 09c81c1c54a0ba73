//! Stub decoder binary, the inverse of `dexstubenc`:
//!
//! ```text
//! dexstubdec <input.mp4> <output_dir>
//! ```
//!
//! Writes one image file per frame into `output_dir`.

use std::path::PathBuf;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 2 {
        eprintln!("usage: dexstubdec <input.mp4> <output_dir>");
        return ExitCode::from(2);
    }
    match dexconvert::stubenc::decode(&PathBuf::from(&args[0]), &PathBuf::from(&args[1])) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dexstubdec: {e}");
            ExitCode::FAILURE
        }
    }
}
