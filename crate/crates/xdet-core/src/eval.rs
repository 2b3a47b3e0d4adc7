//! Detection/ground-truth matching and average-precision evaluation for
//! boxes and masks.
//!
//! Results are deterministic and independent of input record order: all
//! internal orderings sort by content (score, then image id, then
//! coordinates), never by arrival index.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::mask::{mask_iou, BinaryMask};
use crate::scalar::Real;

/// One detector output.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub image_id: String,
    pub class_id: u32,
    pub score: T,
    pub bbox: BBox<T>,
    pub mask: Option<BinaryMask>,
}

/// One annotated object.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub image_id: String,
    pub class_id: u32,
    pub bbox: BBox<T>,
    pub mask: Option<BinaryMask>,
}

/// Overlap criterion for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Bbox,
    Mask,
}

/// Precision-recall interpolation rule for AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Area under the precision envelope at every recall step.
    #[default]
    AllPoints,
    /// Mean of the envelope at recalls 0.0, 0.1, …, 1.0.
    ElevenPoint,
}

/// Which tasks [`evaluate`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaskSelect {
    /// Boxes always; masks when every record carries one.
    #[default]
    Auto,
    Bbox,
    Mask,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig<T> {
    pub iou_threshold: T,
    /// Require IoU strictly greater than the threshold instead of `>=`.
    pub strict_iou: bool,
    pub interpolation: Interpolation,
    pub tasks: TaskSelect,
}

impl<T: Real> Default for EvalConfig<T> {
    fn default() -> Self {
        Self {
            iou_threshold: T::from_f64_lossy(0.5),
            strict_iou: false,
            interpolation: Interpolation::AllPoints,
            tasks: TaskSelect::Auto,
        }
    }
}

/// Outcome for one detection after matching.
#[derive(Debug, Clone, PartialEq)]
pub struct DetMatch<T> {
    /// Index into the caller's detection slice.
    pub det_index: usize,
    pub image_id: String,
    pub class_id: u32,
    pub score: T,
    /// Matched ground-truth index (into the caller's slice), or `None`
    /// for a false positive.
    pub matched_gt: Option<usize>,
    /// Overlap with the matched ground truth (0 when unmatched).
    pub iou: T,
    /// The overlap landed exactly on the threshold.
    pub at_boundary: bool,
}

impl<T> DetMatch<T> {
    pub fn is_tp(&self) -> bool {
        self.matched_gt.is_some()
    }
}

/// Greedily match detections to ground truth per image and class.
///
/// Detections are visited in descending score; each one takes the
/// highest-IoU still-unmatched ground-truth box at or above the
/// threshold (strictly above with `strict`). Later detections on an
/// already-claimed ground truth become false positives. Score ties and
/// IoU ties break on content order (image id, coordinates), keeping the
/// outcome permutation-invariant.
pub fn match_detections<T: Real>(
    dets: &[Detection<T>],
    gts: &[GroundTruth<T>],
    iou_threshold: T,
    strict: bool,
    mode: MatchMode,
) -> Result<Vec<DetMatch<T>>> {
    if mode == MatchMode::Mask {
        for d in dets {
            if d.mask.is_none() {
                return Err(Error::MissingMask(format!(
                    "detection in image {}",
                    d.image_id
                )));
            }
        }
        for g in gts {
            if g.mask.is_none() {
                return Err(Error::MissingMask(format!(
                    "ground truth in image {}",
                    g.image_id
                )));
            }
        }
    }

    // Canonical orders, independent of arrival order.
    let mut det_order: Vec<usize> = (0..dets.len()).collect();
    det_order.sort_by(|&a, &b| {
        let da = &dets[a];
        let db = &dets[b];
        db.score
            .partial_cmp(&da.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| da.image_id.cmp(&db.image_id))
            .then_with(|| box_key(&da.bbox).partial_cmp(&box_key(&db.bbox)).unwrap())
    });
    let mut gt_order: Vec<usize> = (0..gts.len()).collect();
    gt_order.sort_by(|&a, &b| {
        let ga = &gts[a];
        let gb = &gts[b];
        ga.image_id
            .cmp(&gb.image_id)
            .then_with(|| box_key(&ga.bbox).partial_cmp(&box_key(&gb.bbox)).unwrap())
    });

    let mut gt_taken = vec![false; gts.len()];
    let mut matches = Vec::with_capacity(dets.len());
    for &di in &det_order {
        let det = &dets[di];
        let mut best: Option<(usize, T)> = None;
        for &gi in &gt_order {
            let gt = &gts[gi];
            if gt_taken[gi] || gt.image_id != det.image_id || gt.class_id != det.class_id {
                continue;
            }
            let overlap = match mode {
                MatchMode::Bbox => det.bbox.iou(&gt.bbox),
                MatchMode::Mask => mask_iou(
                    det.mask.as_ref().expect("checked above"),
                    gt.mask.as_ref().expect("checked above"),
                )?,
            };
            let better = match best {
                None => true,
                Some((_, b)) => overlap > b,
            };
            if better {
                best = Some((gi, overlap));
            }
        }

        let accepted = best.filter(|&(_, v)| {
            if strict {
                v > iou_threshold
            } else {
                v >= iou_threshold
            }
        });
        matches.push(match accepted {
            Some((gi, v)) => {
                gt_taken[gi] = true;
                DetMatch {
                    det_index: di,
                    image_id: det.image_id.clone(),
                    class_id: det.class_id,
                    score: det.score,
                    matched_gt: Some(gi),
                    iou: v,
                    at_boundary: v == iou_threshold,
                }
            }
            None => DetMatch {
                det_index: di,
                image_id: det.image_id.clone(),
                class_id: det.class_id,
                score: det.score,
                matched_gt: None,
                iou: best.map_or(T::zero(), |(_, v)| v),
                at_boundary: false,
            },
        });
    }
    Ok(matches)
}

fn box_key<T: Real>(b: &BBox<T>) -> [f64; 4] {
    [
        b.x1().to_f64_lossy(),
        b.y1().to_f64_lossy(),
        b.x2().to_f64_lossy(),
        b.y2().to_f64_lossy(),
    ]
}

/// Average precision from a score-ranked match list for one class.
///
/// Returns `None` (undefined, excluded from mAP) when there is neither
/// ground truth nor any detection; zero when detections exist but no
/// ground truth does.
pub fn average_precision<T: Real>(
    class_matches: &[DetMatch<T>],
    n_gt: usize,
    interpolation: Interpolation,
) -> Option<T> {
    if n_gt == 0 {
        return if class_matches.is_empty() {
            None
        } else {
            Some(T::zero())
        };
    }
    let (points, _, _) = pr_curve(class_matches, n_gt);
    Some(ap_from_pr(&points, interpolation))
}

/// Cumulative `(recall, precision)` points plus final TP/FP counts.
///
/// `class_matches` must already be sorted by descending score.
fn pr_curve<T: Real>(class_matches: &[DetMatch<T>], n_gt: usize) -> (Vec<(T, T)>, usize, usize) {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut points = Vec::with_capacity(class_matches.len());
    for m in class_matches {
        if m.is_tp() {
            tp += 1;
        } else {
            fp += 1;
        }
        let recall = T::from_usize_lossy(tp) / T::from_usize_lossy(n_gt);
        let precision = T::from_usize_lossy(tp) / T::from_usize_lossy(tp + fp);
        points.push((recall, precision));
    }
    (points, tp, fp)
}

fn ap_from_pr<T: Real>(points: &[(T, T)], interpolation: Interpolation) -> T {
    if points.is_empty() {
        return T::zero();
    }
    // Precision envelope from the right.
    let mut envelope = vec![T::zero(); points.len()];
    let mut running = T::zero();
    for (i, &(_, p)) in points.iter().enumerate().rev() {
        running = running.max(p);
        envelope[i] = running;
    }
    match interpolation {
        Interpolation::AllPoints => {
            let mut ap = T::zero();
            let mut prev_recall = T::zero();
            for (i, &(r, _)) in points.iter().enumerate() {
                if r > prev_recall {
                    ap = ap + (r - prev_recall) * envelope[i];
                    prev_recall = r;
                }
            }
            ap
        }
        Interpolation::ElevenPoint => {
            let ten = T::from_f64_lossy(10.0);
            let mut total = T::zero();
            for step in 0..=10 {
                let r = T::from_usize_lossy(step) / ten;
                let p = points
                    .iter()
                    .zip(&envelope)
                    .find(|((recall, _), _)| *recall >= r)
                    .map_or(T::zero(), |(_, env)| *env);
                total = total + p;
            }
            total / T::from_usize_lossy(11)
        }
    }
}

/// Per-class evaluation for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassEval<T> {
    pub class_id: u32,
    pub n_gt: usize,
    pub ap: Option<T>,
    /// `(recall, precision)` after each ranked detection.
    pub pr_points: Vec<(T, T)>,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
}

/// Evaluation of one task (bbox or mask overlap).
#[derive(Debug, Clone, PartialEq)]
pub struct TaskEval<T> {
    /// Mean AP over classes present in the ground truth.
    pub map: Option<T>,
    pub classes: Vec<ClassEval<T>>,
    pub matches: Vec<DetMatch<T>>,
    /// Matches whose IoU landed exactly on the threshold.
    pub boundary_matches: usize,
}

/// Full evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    pub bbox: Option<TaskEval<T>>,
    pub mask: Option<TaskEval<T>>,
}

impl<T: Real> EvalReport<T> {
    pub fn map_bbox(&self) -> Option<T> {
        self.bbox.as_ref().and_then(|t| t.map)
    }

    pub fn map_mask(&self) -> Option<T> {
        self.mask.as_ref().and_then(|t| t.map)
    }
}

/// Evaluate detections against ground truth.
///
/// Computes per-class AP and mAP for the bbox task and (per
/// `cfg.tasks`) the mask task. mAP averages over the classes present in
/// the ground truth; classes that only appear in detections are reported
/// with AP 0 but do not enter the mean.
pub fn evaluate<T: Real>(
    dets: &[Detection<T>],
    gts: &[GroundTruth<T>],
    cfg: &EvalConfig<T>,
) -> Result<EvalReport<T>> {
    let all_masked = !gts.is_empty()
        && gts.iter().all(|g| g.mask.is_some())
        && dets.iter().all(|d| d.mask.is_some());
    let (run_bbox, run_mask) = match cfg.tasks {
        TaskSelect::Auto => (true, all_masked),
        TaskSelect::Bbox => (true, false),
        TaskSelect::Mask => (false, true),
        TaskSelect::Both => (true, true),
    };

    let bbox = if run_bbox {
        Some(evaluate_task(dets, gts, cfg, MatchMode::Bbox)?)
    } else {
        None
    };
    let mask = if run_mask {
        Some(evaluate_task(dets, gts, cfg, MatchMode::Mask)?)
    } else {
        None
    };
    Ok(EvalReport { bbox, mask })
}

fn evaluate_task<T: Real>(
    dets: &[Detection<T>],
    gts: &[GroundTruth<T>],
    cfg: &EvalConfig<T>,
    mode: MatchMode,
) -> Result<TaskEval<T>> {
    let matches = match_detections(dets, gts, cfg.iou_threshold, cfg.strict_iou, mode)?;

    let mut gt_per_class: BTreeMap<u32, usize> = BTreeMap::new();
    for g in gts {
        *gt_per_class.entry(g.class_id).or_insert(0) += 1;
    }
    let mut match_per_class: BTreeMap<u32, Vec<DetMatch<T>>> = BTreeMap::new();
    for m in &matches {
        match_per_class
            .entry(m.class_id)
            .or_default()
            .push(m.clone());
    }

    let mut class_ids: Vec<u32> = gt_per_class
        .keys()
        .chain(match_per_class.keys())
        .copied()
        .collect();
    class_ids.sort_unstable();
    class_ids.dedup();

    let mut classes = Vec::new();
    let mut map_sum = T::zero();
    let mut map_count = 0usize;
    for class_id in class_ids {
        let n_gt = gt_per_class.get(&class_id).copied().unwrap_or(0);
        let class_matches = match_per_class.remove(&class_id).unwrap_or_default();
        let (pr_points, tp, fp) = pr_curve(&class_matches, n_gt.max(1));
        let pr_points = if n_gt == 0 { Vec::new() } else { pr_points };
        let ap = average_precision(&class_matches, n_gt, cfg.interpolation);
        if n_gt > 0 {
            map_sum = map_sum + ap.unwrap_or_else(T::zero);
            map_count += 1;
        }
        classes.push(ClassEval {
            class_id,
            n_gt,
            ap,
            pr_points,
            tp,
            fp,
            fn_count: n_gt - tp.min(n_gt),
        });
    }

    let map = (map_count > 0).then(|| map_sum / T::from_usize_lossy(map_count));
    let boundary_matches = matches.iter().filter(|m| m.at_boundary).count();
    Ok(TaskEval {
        map,
        classes,
        matches,
        boundary_matches,
    })
}
