use crate::geometry::BBox;
use crate::scalar::Real;

/// Greedy non-maximum suppression.
///
/// Detections are visited in order of descending score (ties broken by
/// ascending input index, so the result is deterministic); a detection is
/// dropped when its IoU with an already-kept one exceeds `iou_threshold`.
/// The survivors come back sorted by descending score.
pub fn nms<T: Real>(detections: &[(BBox<T>, T)], iou_threshold: T) -> Vec<(BBox<T>, T)> {
    let kept = nms_indices(
        detections.iter().map(|(b, s)| (*b, *s)).collect::<Vec<_>>(),
        iou_threshold,
    );
    kept.into_iter().map(|i| detections[i]).collect()
}

/// Index-returning form of [`nms`]; the indices refer to the input order.
pub fn nms_indices<T: Real>(detections: Vec<(BBox<T>, T)>, iou_threshold: T) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .1
            .partial_cmp(&detections[a].1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut suppressed = vec![false; detections.len()];
    let mut keep = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        for &j in &order[rank + 1..] {
            if suppressed[j] {
                continue;
            }
            if detections[i].0.iou(&detections[j].0) > iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox<f64> {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn single_box_survives() {
        let dets = vec![(b(0.0, 0.0, 10.0, 10.0), 0.7)];
        assert_eq!(nms(&dets, 0.5), dets);
    }

    #[test]
    fn exact_duplicate_suppressed() {
        let dets = vec![
            (b(0.0, 0.0, 10.0, 10.0), 0.9),
            (b(0.0, 0.0, 10.0, 10.0), 0.8),
        ];
        let out = nms(&dets, 0.5);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1, 0.9);
    }

    #[test]
    fn disjoint_boxes_all_kept_sorted() {
        let dets = vec![
            (b(0.0, 0.0, 10.0, 10.0), 0.2),
            (b(50.0, 50.0, 60.0, 60.0), 0.9),
            (b(100.0, 0.0, 110.0, 10.0), 0.5),
        ];
        let out = nms(&dets, 0.5);
        let scores: Vec<f64> = out.iter().map(|d| d.1).collect();
        assert_eq!(scores, vec![0.9, 0.5, 0.2]);
    }

    #[test]
    fn score_tie_breaks_by_input_index() {
        let dets = vec![
            (b(0.0, 0.0, 10.0, 10.0), 0.5),
            (b(1.0, 1.0, 11.0, 11.0), 0.5),
        ];
        let out = nms(&dets, 0.3);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, dets[0].0);
    }

    #[test]
    fn threshold_is_strict() {
        // IoU exactly 1/3: kept at threshold 1/3, suppressed just below.
        let x = vec![(b(0.0, 0.0, 10.0, 10.0), 0.9), (b(5.0, 0.0, 15.0, 10.0), 0.8)];
        assert_eq!(nms(&x, 1.0 / 3.0).len(), 2);
        assert_eq!(nms(&x, 1.0 / 3.0 - 1e-9).len(), 1);
    }
}
