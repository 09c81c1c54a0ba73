use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Uniform exit codes: 0 success, 1 validation failure, 2 usage error,
/// 3 i/o or external failure.
#[derive(Debug, Parser)]
#[command(
    name = "dexctl",
    version,
    about = "Episodic dataset tooling: validate, convert, index, inspect, configure, serve, roll out",
    arg_required_else_help = true,
    disable_help_subcommand = true
)]
pub struct Cli {
    /// Print results as canonical JSON on stdout (diagnostics stay on stderr).
    #[arg(long, global = true)]
    pub json: bool,

    /// Suppress the human-readable summary (ignored under --json).
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate every episode of a dataset against the format contract.
    Validate {
        /// Dataset root (contains jsonl/ and video/).
        #[arg(long)]
        dataset: PathBuf,
    },

    /// Build (or rebuild) the dataset's index cache.
    Index {
        /// Dataset root (contains jsonl/ and video/).
        #[arg(long)]
        dataset: PathBuf,

        /// Pin the cache's created_unix stamp for byte-identical rebuilds.
        #[arg(long)]
        epoch: Option<u64>,
    },

    /// Convert raw episode bundles into the dataset layout.
    Convert {
        /// Source directory: one bundle, or a directory of bundles.
        #[arg(long)]
        src: PathBuf,

        /// Destination dataset root.
        #[arg(long)]
        dst: PathBuf,

        /// Encoder command template with {input_list}, {output} and
        /// optionally {fps} placeholders.
        #[arg(long)]
        encoder: String,

        /// Frame rate stamped into the encoded videos.
        #[arg(long, default_value_t = 30)]
        fps: u32,

        /// Decoder command template ({input}, {output_dir}); when given,
        /// every converted episode is round-trip verified.
        #[arg(long)]
        decoder: Option<String>,
    },

    /// Report storage footprint of a source tree vs its dataset.
    Stats {
        /// Source directory of raw bundles.
        #[arg(long)]
        src: PathBuf,

        /// Dataset root to compare against.
        #[arg(long)]
        dataset: PathBuf,
    },

    /// Resolve an experiment config through its inheritance chain.
    ConfigResolve {
        /// Experiment node file; siblings in its directory form the node set.
        #[arg(long)]
        exp: PathBuf,

        /// Highest-precedence override, repeatable: section.key=value
        /// (value parsed as JSON, falling back to a plain string).
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },

    /// Resolve an experiment config and dispatch its task.
    Run {
        /// Experiment node file; siblings in its directory form the node set.
        #[arg(long)]
        exp: PathBuf,

        /// What to do with the resolved config: train or infer.
        #[arg(long)]
        task: String,

        /// Highest-precedence override, repeatable: section.key=value.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
    },

    /// Serve a policy backend over HTTP until Ctrl-C.
    Serve {
        /// Port to bind on 127.0.0.1 (0 picks a free port).
        #[arg(long, default_value_t = 0)]
        port: u16,

        /// Backend name: zero, pcontrol or replay.
        #[arg(long)]
        backend: String,

        /// Action dimensions for the zero backend.
        #[arg(long)]
        dof: Option<usize>,

        /// Backend parameter, repeatable: k=GAIN, clip=STEP (pcontrol)
        /// or chunk=PATH (replay).
        #[arg(long = "backend-arg", value_name = "KEY=VALUE")]
        backend_args: Vec<String>,
    },

    /// Drive the toy environment against a running gateway.
    Rollout {
        /// Gateway base URL, e.g. http://127.0.0.1:8080.
        #[arg(long)]
        url: String,

        /// Goal position as X,Y.
        #[arg(long)]
        goal: String,

        /// Start position as X,Y (overridden by --seed).
        #[arg(long, default_value = "0,0")]
        start: String,

        /// Actions requested per gateway round trip.
        #[arg(long, default_value_t = 8)]
        chunk: usize,

        /// Environment step budget.
        #[arg(long, default_value_t = 64)]
        max_steps: u64,

        /// Seed for a reproducible jittered start position.
        #[arg(long)]
        seed: Option<u64>,

        /// Record the trajectory to this JSON Lines file.
        #[arg(long)]
        record: Option<PathBuf>,
    },

    /// Inspect an mp4's frame table without decoding anything.
    ProbeMp4 {
        /// Video file to inspect.
        #[arg(long)]
        input: PathBuf,

        /// Also locate this frame's byte range and timestamp.
        #[arg(long)]
        frame: Option<u64>,
    },

    /// Encode a list of image files into a stub mp4 (lossless, for tests).
    StubEncode {
        /// Text file with one image path per line.
        #[arg(long)]
        input_list: PathBuf,

        /// Frame rate stamped into the video.
        #[arg(long, default_value_t = 30)]
        fps: u32,

        /// Output mp4 path.
        #[arg(long)]
        output: PathBuf,

        /// Encode only the first N frames (fault injection for tests).
        #[arg(long)]
        limit_frames: Option<u64>,
    },

    /// Decode a stub mp4 back into its original image files.
    StubDecode {
        /// Stub-encoded mp4.
        #[arg(long)]
        input: PathBuf,

        /// Directory to write the decoded frames into.
        #[arg(long)]
        output_dir: PathBuf,
    },
}
