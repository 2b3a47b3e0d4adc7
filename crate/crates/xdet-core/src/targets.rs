//! Anchor/ground-truth matching and positive-negative RoI sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{encode_box, AnchorSet, BBox, BoxEncoding, EncodingVariant};
use crate::scalar::Real;

/// Training label assigned to an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorLabel {
    Positive,
    Negative,
    Ignore,
}

/// Matching knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig<T> {
    /// IoU at or above which an anchor is positive.
    pub pos_iou: T,
    /// Force the argmax-IoU anchor positive for any ground-truth box that
    /// no anchor reaches `pos_iou` for. Without this, small objects can
    /// end up with zero positive anchors.
    pub force_unmatched_gt: bool,
    /// Optional `[lo, hi)` IoU band labeled `Ignore` instead of negative.
    pub ignore_band: Option<(T, T)>,
    /// Encoding used for regression targets.
    pub variant: EncodingVariant,
}

impl<T: Real> Default for MatchConfig<T> {
    fn default() -> Self {
        Self {
            pos_iou: T::from_f64_lossy(0.5),
            force_unmatched_gt: true,
            ignore_band: None,
            variant: EncodingVariant::AnchorRelative,
        }
    }
}

/// Per-anchor matching outcome.
///
/// `targets[i]` is `Some` exactly when `labels[i]` is `Positive`.
#[derive(Debug, Clone)]
pub struct MatchResult<T> {
    pub labels: Vec<AnchorLabel>,
    pub matched_gt: Vec<Option<usize>>,
    pub targets: Vec<Option<BoxEncoding<T>>>,
}

impl<T> MatchResult<T> {
    pub fn positive_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == AnchorLabel::Positive)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn negative_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == AnchorLabel::Negative)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Assign a label and (for positives) a regression target to every anchor.
///
/// An anchor is positive when its best IoU over the ground truth reaches
/// `cfg.pos_iou`; it is matched to the argmax ground-truth box, ties going
/// to the lowest index. With `force_unmatched_gt`, each ground-truth box
/// that claimed no anchor gets its argmax anchor forced positive (the
/// anchor must overlap it and must not already be positive; when several
/// such boxes want the same anchor, the highest IoU wins).
pub fn match_anchors<T: Real>(
    anchors: &AnchorSet<T>,
    gt: &[BBox<T>],
    cfg: &MatchConfig<T>,
) -> Result<MatchResult<T>> {
    if anchors.is_empty() {
        return Err(Error::EmptyAnchorSet);
    }
    let n = anchors.len();
    let mut labels = vec![AnchorLabel::Negative; n];
    let mut matched_gt = vec![None; n];
    let mut best_iou = vec![T::zero(); n];

    for (i, anchor) in anchors.iter().enumerate() {
        for (g, gt_box) in gt.iter().enumerate() {
            let v = anchor.bbox.iou(gt_box);
            if v > best_iou[i] {
                best_iou[i] = v;
                matched_gt[i] = Some(g);
            }
        }
        if matched_gt[i].is_some() && best_iou[i] >= cfg.pos_iou {
            labels[i] = AnchorLabel::Positive;
        } else {
            matched_gt[i] = None;
            if let Some((lo, hi)) = cfg.ignore_band {
                if best_iou[i] >= lo && best_iou[i] < hi {
                    labels[i] = AnchorLabel::Ignore;
                }
            }
        }
    }

    if cfg.force_unmatched_gt {
        // (anchor index, gt index, iou) for every gt with no positive.
        let mut forced: Vec<(usize, usize, T)> = Vec::new();
        for (g, gt_box) in gt.iter().enumerate() {
            let claimed = (0..n).any(|i| {
                labels[i] == AnchorLabel::Positive && matched_gt[i] == Some(g)
            });
            if claimed {
                continue;
            }
            let mut arg = None;
            let mut best = T::zero();
            for (i, anchor) in anchors.iter().enumerate() {
                let v = anchor.bbox.iou(gt_box);
                if v > best {
                    best = v;
                    arg = Some(i);
                }
            }
            if let Some(i) = arg {
                forced.push((i, g, best));
            }
        }
        for (i, g, v) in forced {
            if labels[i] == AnchorLabel::Positive {
                // Already claimed, either by threshold or by an earlier
                // forced gt with higher IoU; keep the stronger match.
                if matched_gt[i].is_some() && best_iou[i] >= v {
                    continue;
                }
            }
            labels[i] = AnchorLabel::Positive;
            matched_gt[i] = Some(g);
            best_iou[i] = v;
        }
    }

    let targets: Vec<Option<BoxEncoding<T>>> = (0..n)
        .map(|i| {
            matched_gt[i].filter(|_| labels[i] == AnchorLabel::Positive).map(|g| {
                encode_box(&gt[g], &anchors.anchors()[i], cfg.variant)
            })
        })
        .collect();

    Ok(MatchResult {
        labels,
        matched_gt,
        targets,
    })
}

/// Sample RoI indices from a match result at a fixed positive fraction.
///
/// At most `round(total · pos_fraction)` positives are drawn; the
/// remainder is filled with negatives, and the result is shorter than
/// `total` only when both pools run dry. Sampling is without replacement
/// and fully determined by `seed`. Positives come first in the output.
pub fn sample_rois<T>(
    m: &MatchResult<T>,
    total: usize,
    pos_fraction: f64,
    seed: u64,
) -> Vec<usize> {
    let positives = m.positive_indices();
    let negatives = m.negative_indices();
    let cap = (total as f64 * pos_fraction).round() as usize;
    let n_pos = cap.min(positives.len());
    let n_neg = (total - n_pos).min(negatives.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = draw_without_replacement(&mut rng, &positives, n_pos);
    out.extend(draw_without_replacement(&mut rng, &negatives, n_neg));
    out
}

/// Partial Fisher-Yates draw of `k` items, stable across platforms.
fn draw_without_replacement(rng: &mut ChaCha8Rng, pool: &[usize], k: usize) -> Vec<usize> {
    let mut items = pool.to_vec();
    let k = k.min(items.len());
    for i in 0..k {
        let j = rng.gen_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items
}
