use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use xdet_cli::commands::{
    cmd_evaluate, cmd_ingest_gdxray, cmd_masks_to_boxes, cmd_selfcheck, cmd_synth, ColumnOrdering,
    EvaluateArgs,
};
use xdet_cli::{exit_code, CmdResult};

/// Deterministic tooling for X-ray defect detection datasets: ingest,
/// convert, synthesize, evaluate, and self-check.
#[derive(Debug, Parser)]
#[command(name = "xdet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score detections against ground truth (bbox and/or mask mAP).
    Evaluate(EvaluateArgs),
    /// Convert GDXray-style per-series box files to the normalized format.
    IngestGdxray {
        /// Directory holding the per-series annotation text files.
        #[arg(long)]
        src: PathBuf,
        /// Column layout of the source rows.
        #[arg(long, value_enum, default_value_t = ColumnOrdering::Xyxy)]
        ordering: ColumnOrdering,
        /// Output ground-truth file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Trace segmentation-mask PNGs into box + mask annotations.
    MasksToBoxes {
        /// Directory of full-image mask PNGs (nonzero = foreground).
        #[arg(long)]
        masks: PathBuf,
        /// Horizontal tile count applied to each mask before tracing.
        #[arg(long, default_value_t = 8)]
        tiles: usize,
        /// Output directory (gt.csv plus masks/*.rle).
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic defect dataset with exact ground truth.
    Synth {
        /// Number of images.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the gradient and oracle verification suites.
    Selfcheck {
        /// Negative-control hook: bias the checked smooth-L1 slope so the
        /// gradient suite must fail.
        #[arg(long, hide = true, default_value_t = false)]
        perturb_smooth_l1: bool,
    },
}

fn run(cli: Cli) -> CmdResult<()> {
    match cli.command {
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::IngestGdxray { src, ordering, out } => cmd_ingest_gdxray(&src, ordering, &out),
        Command::MasksToBoxes { masks, tiles, out } => cmd_masks_to_boxes(&masks, tiles, &out),
        Command::Synth { n, seed, out } => cmd_synth(n, seed, &out),
        Command::Selfcheck { perturb_smooth_l1 } => cmd_selfcheck(perturb_smooth_l1),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("XDET_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit_code::SUCCESS as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
