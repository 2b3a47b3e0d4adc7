use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context};

use xdet_core::eval::{evaluate, EvalConfig, Interpolation, TaskEval, TaskSelect};

use crate::formats::{load_detections, load_ground_truth};
use crate::{CmdError, CmdResult};

/// `--interp` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InterpArg {
    /// Area under the full precision envelope.
    All,
    /// Classic eleven-point interpolation.
    #[value(name = "11pt")]
    ElevenPoint,
}

/// `--mode` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Bbox,
    Mask,
    /// Boxes always; masks too when every record carries one.
    Both,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Ground-truth file (normalized comma-separated format).
    #[arg(long)]
    pub gt: PathBuf,
    /// Detections file (JSON lines).
    #[arg(long)]
    pub det: PathBuf,
    /// IoU threshold for a detection to count as correct.
    #[arg(long = "iou-thresh", default_value_t = 0.5)]
    pub iou_thresh: f64,
    /// Precision-recall interpolation.
    #[arg(long, value_enum, default_value_t = InterpArg::All)]
    pub interp: InterpArg,
    /// Which overlap tasks to evaluate.
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Require IoU strictly greater than the threshold.
    #[arg(long = "strict-iou", default_value_t = false)]
    pub strict_iou: bool,
    /// Write the human-readable report here as well as to stdout.
    #[arg(long = "out-report")]
    pub out_report: Option<PathBuf>,
    /// Write machine-readable key=value results here.
    #[arg(long = "out-results")]
    pub out_results: Option<PathBuf>,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CmdResult<()> {
    let gts = load_ground_truth(&args.gt)?;
    let dets = load_detections(&args.det)?;

    let gt_images: BTreeSet<&str> = gts.iter().map(|g| g.image_id.as_str()).collect();
    let unknown: BTreeSet<&str> = dets
        .iter()
        .map(|d| d.image_id.as_str())
        .filter(|id| !gt_images.contains(id))
        .collect();
    if !unknown.is_empty() {
        log::warn!(
            "{} detection image id(s) absent from ground truth (counted as false positives): {}",
            unknown.len(),
            unknown.iter().take(5).cloned().collect::<Vec<_>>().join(", ")
        );
    }

    let gt_masked = gts.iter().filter(|g| g.mask.is_some()).count();
    let det_masked = dets.iter().filter(|d| d.mask.is_some()).count();
    let tasks = match args.mode {
        ModeArg::Bbox => TaskSelect::Bbox,
        ModeArg::Mask => {
            if gt_masked != gts.len() || det_masked != dets.len() {
                return Err(CmdError::Input(anyhow!(
                    "mask mode needs a mask on every record ({gt_masked}/{} ground truths, {det_masked}/{} detections have one)",
                    gts.len(),
                    dets.len()
                )));
            }
            TaskSelect::Mask
        }
        ModeArg::Both => {
            let partial_gt = gt_masked != 0 && gt_masked != gts.len();
            let partial_det = det_masked != 0 && det_masked != dets.len();
            if partial_gt || partial_det {
                return Err(CmdError::Input(anyhow!(
                    "masks must be on every record or none ({gt_masked}/{} ground truths, {det_masked}/{} detections have one)",
                    gts.len(),
                    dets.len()
                )));
            }
            TaskSelect::Auto
        }
    };

    let cfg = EvalConfig {
        iou_threshold: args.iou_thresh,
        strict_iou: args.strict_iou,
        interpolation: match args.interp {
            InterpArg::All => Interpolation::AllPoints,
            InterpArg::ElevenPoint => Interpolation::ElevenPoint,
        },
        tasks,
    };
    let report = evaluate(&dets, &gts, &cfg).map_err(|e| CmdError::Input(e.into()))?;

    let human = render_human(args, gts.len(), dets.len(), &report);
    print!("{human}");
    if let Some(path) = &args.out_report {
        fs::write(path, &human).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.out_results {
        fs::write(path, render_results(args, &report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn render_task(out: &mut String, name: &str, task: &TaskEval<f64>) {
    let _ = writeln!(out, "task {name}");
    for c in &task.classes {
        let ap = c
            .ap
            .map_or("undefined".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            out,
            "  class {}: ap {ap} (gt {}, tp {}, fp {}, fn {})",
            c.class_id, c.n_gt, c.tp, c.fp, c.fn_count
        );
    }
    match task.map {
        Some(m) => {
            let _ = writeln!(out, "  map_{name} {m:.6}");
        }
        None => {
            let _ = writeln!(out, "  map_{name} undefined (no ground truth)");
        }
    }
    if task.boundary_matches > 0 {
        let _ = writeln!(
            out,
            "  note: {} match(es) at exactly the IoU threshold",
            task.boundary_matches
        );
    }
}

fn render_human(
    args: &EvaluateArgs,
    n_gt: usize,
    n_det: usize,
    report: &xdet_core::eval::EvalReport<f64>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "evaluation report");
    let _ = writeln!(out, "  ground truth: {n_gt} object(s) from {}", args.gt.display());
    let _ = writeln!(out, "  detections:   {n_det} record(s) from {}", args.det.display());
    let _ = writeln!(
        out,
        "  iou threshold: {:.3} ({})",
        args.iou_thresh,
        if args.strict_iou { "strict >" } else { ">=" }
    );
    if let Some(task) = &report.bbox {
        render_task(&mut out, "bbox", task);
    }
    if let Some(task) = &report.mask {
        render_task(&mut out, "mask", task);
    } else if matches!(args.mode, ModeArg::Both) {
        let _ = writeln!(out, "task mask skipped (no masks in the inputs)");
    }
    out
}

/// Key=value lines in a fixed, stable order.
fn render_results(args: &EvaluateArgs, report: &xdet_core::eval::EvalReport<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "iou_threshold={:.6}", args.iou_thresh);
    let _ = writeln!(out, "strict_iou={}", args.strict_iou);
    let _ = writeln!(
        out,
        "interpolation={}",
        match args.interp {
            InterpArg::All => "all_points",
            InterpArg::ElevenPoint => "eleven_point",
        }
    );
    for (name, task) in [("bbox", &report.bbox), ("mask", &report.mask)] {
        let Some(task) = task else { continue };
        match task.map {
            Some(m) => {
                let _ = writeln!(out, "map_{name}={m:.6}");
            }
            None => {
                let _ = writeln!(out, "map_{name}=undefined");
            }
        }
        let _ = writeln!(out, "{name}_boundary_matches={}", task.boundary_matches);
        for c in &task.classes {
            let prefix = format!("{name}_class_{}", c.class_id);
            if let Some(ap) = c.ap {
                let _ = writeln!(out, "{prefix}_ap={ap:.6}");
            } else {
                let _ = writeln!(out, "{prefix}_ap=undefined");
            }
            let _ = writeln!(out, "{prefix}_gt={}", c.n_gt);
            let _ = writeln!(out, "{prefix}_tp={}", c.tp);
            let _ = writeln!(out, "{prefix}_fp={}", c.fp);
            let _ = writeln!(out, "{prefix}_fn={}", c.fn_count);
        }
    }
    out
}
