use crate::error::{Error, Result};
use crate::geometry::{decode_box, nms_indices, AnchorSet, BBox, BoxEncoding};
use crate::scalar::Real;

/// Proposal-selection knobs. `nms_threshold: None` disables suppression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalConfig<T> {
    pub count: usize,
    pub nms_threshold: Option<T>,
}

impl<T: Real> Default for ProposalConfig<T> {
    /// Top 600 proposals with the conventional 0.7 suppression threshold.
    fn default() -> Self {
        Self {
            count: 600,
            nms_threshold: Some(T::from_f64_lossy(0.7)),
        }
    }
}

/// Select the top-`count` proposals by objectness score.
///
/// Every anchor is decoded with its regression delta, clipped to the
/// image, and degenerate results are dropped. Suppression (when enabled)
/// runs before the top-`count` cut. Ties in score break by ascending
/// anchor index, so the output depends only on the score *order*, never
/// on score magnitudes.
pub fn select_proposals<T: Real>(
    anchors: &AnchorSet<T>,
    objectness: &[T],
    deltas: &[BoxEncoding<T>],
    cfg: &ProposalConfig<T>,
    image_w: T,
    image_h: T,
) -> Result<Vec<(BBox<T>, T)>> {
    if objectness.len() != anchors.len() {
        return Err(Error::LengthMismatch {
            what: "objectness scores",
            got: objectness.len(),
            expected: anchors.len(),
        });
    }
    if deltas.len() != anchors.len() {
        return Err(Error::LengthMismatch {
            what: "box deltas",
            got: deltas.len(),
            expected: anchors.len(),
        });
    }

    // Decode + clip, keeping anchor order so index tie-breaks are stable.
    let mut candidates: Vec<(BBox<T>, T)> = Vec::new();
    for (i, anchor) in anchors.iter().enumerate() {
        let decoded = match decode_box(&deltas[i], anchor) {
            Ok(b) => b,
            Err(_) => continue,
        };
        if let Some(clipped) = decoded.clip_to(image_w, image_h) {
            candidates.push((clipped, objectness[i]));
        }
    }

    let survivors: Vec<(BBox<T>, T)> = match cfg.nms_threshold {
        Some(thr) => {
            let keep = nms_indices(candidates.clone(), thr);
            keep.into_iter().map(|i| candidates[i]).collect()
        }
        None => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.sort_by(|&a, &b| {
                candidates[b]
                    .1
                    .partial_cmp(&candidates[a].1)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            order.into_iter().map(|i| candidates[i]).collect()
        }
    };

    Ok(survivors.into_iter().take(cfg.count).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_anchors, AnchorConfig, EncodingVariant};

    fn zero_deltas(n: usize) -> Vec<BoxEncoding<f64>> {
        vec![BoxEncoding::zero(EncodingVariant::AnchorRelative); n]
    }

    #[test]
    fn zero_deltas_return_clipped_anchor_boxes() {
        let cfg = AnchorConfig {
            base_size: 16.0,
            scales: vec![1.0],
            aspect_ratios: vec![1.0],
            feature_stride: 16.0,
        };
        let set = generate_anchors(&cfg, 4, 4).unwrap();
        let scores: Vec<f64> = (0..set.len()).map(|i| i as f64).collect();
        let out = select_proposals(
            &set,
            &scores,
            &zero_deltas(set.len()),
            &ProposalConfig {
                count: 5,
                nms_threshold: None,
            },
            64.0,
            64.0,
        )
        .unwrap();
        assert_eq!(out.len(), 5);
        // Highest score is the last anchor, centered at (48, 48) = 16*3.
        assert_eq!(out[0].1, 15.0);
        assert_eq!(out[0].0, BBox::new(40.0, 40.0, 56.0, 56.0).unwrap());
        // Sorted by descending score.
        for pair in out.windows(2) {
            assert!(pair[0].1 >= pair[1].1);
        }
    }

    #[test]
    fn saturates_when_fewer_survive() {
        let cfg = AnchorConfig {
            base_size: 16.0,
            scales: vec![1.0],
            aspect_ratios: vec![1.0],
            feature_stride: 16.0,
        };
        let set = generate_anchors(&cfg, 2, 2).unwrap();
        let scores = vec![0.1, 0.4, 0.3, 0.2];
        let out = select_proposals(
            &set,
            &scores,
            &zero_deltas(4),
            &ProposalConfig {
                count: 100,
                nms_threshold: None,
            },
            64.0,
            64.0,
        )
        .unwrap();
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn mismatched_lengths_error() {
        let set = generate_anchors(&AnchorConfig::<f64>::default(), 2, 2).unwrap();
        let err = select_proposals(
            &set,
            &[0.5],
            &zero_deltas(set.len()),
            &ProposalConfig::default(),
            64.0,
            64.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn score_order_not_magnitude_decides() {
        let cfg = AnchorConfig {
            base_size: 16.0,
            scales: vec![1.0, 2.0],
            aspect_ratios: vec![1.0],
            feature_stride: 16.0,
        };
        let set = generate_anchors(&cfg, 3, 3).unwrap();
        let scores: Vec<f64> = (0..set.len()).map(|i| (i as f64).sin()).collect();
        let rescaled: Vec<f64> = scores.iter().map(|s| 100.0 + 5.0 * s.exp()).collect();
        let pcfg = ProposalConfig {
            count: 6,
            nms_threshold: Some(0.7),
        };
        let a = select_proposals(&set, &scores, &zero_deltas(set.len()), &pcfg, 48.0, 48.0)
            .unwrap();
        let b = select_proposals(&set, &rescaled, &zero_deltas(set.len()), &pcfg, 48.0, 48.0)
            .unwrap();
        let boxes_a: Vec<_> = a.iter().map(|(bx, _)| *bx).collect();
        let boxes_b: Vec<_> = b.iter().map(|(bx, _)| *bx).collect();
        assert_eq!(boxes_a, boxes_b);
    }
}
