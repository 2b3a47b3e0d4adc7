//! Independent brute-force references for the self-check command and the
//! test suites.
//!
//! Everything here recomputes its answer from first principles — pixel
//! counting, exhaustive scans, BFS, Monte-Carlo integration, finite
//! differences — and never calls the implementation it is meant to
//! check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::BBox;
use crate::mask::BinaryMask;
use crate::roi_align::{AlignConfig, FeatureMap};
use crate::scalar::Real;

/// IoU of two integer-coordinate boxes by counting member pixels.
///
/// With the half-open box convention a pixel `(px, py)` belongs to a box
/// exactly when `x1 <= px < x2` and `y1 <= py < y2`, making the count —
/// and hence this IoU — exact.
pub fn pixel_count_iou<T: Real>(a: &BBox<T>, b: &BBox<T>) -> T {
    let lo_x = a.x1().min(b.x1()).to_f64_lossy().floor() as i64;
    let hi_x = a.x2().max(b.x2()).to_f64_lossy().ceil() as i64;
    let lo_y = a.y1().min(b.y1()).to_f64_lossy().floor() as i64;
    let hi_y = a.y2().max(b.y2()).to_f64_lossy().ceil() as i64;

    let inside = |bx: &BBox<T>, px: i64, py: i64| {
        let x = px as f64;
        let y = py as f64;
        x >= bx.x1().to_f64_lossy()
            && x < bx.x2().to_f64_lossy()
            && y >= bx.y1().to_f64_lossy()
            && y < bx.y2().to_f64_lossy()
    };

    let mut inter = 0u64;
    let mut union = 0u64;
    for py in lo_y..hi_y {
        for px in lo_x..hi_x {
            let in_a = inside(a, px, py);
            let in_b = inside(b, px, py);
            inter += u64::from(in_a && in_b);
            union += u64::from(in_a || in_b);
        }
    }
    T::from_f64_lossy(inter as f64) / T::from_f64_lossy(union as f64)
}

/// Reference NMS: repeatedly pick the best remaining score (ties to the
/// lowest index) and discard everything overlapping it beyond the
/// threshold.
pub fn brute_force_nms<T: Real>(dets: &[(BBox<T>, T)], threshold: T) -> Vec<(BBox<T>, T)> {
    let mut alive: Vec<usize> = (0..dets.len()).collect();
    let mut kept = Vec::new();
    while !alive.is_empty() {
        let mut best = alive[0];
        for &i in &alive {
            if dets[i].1 > dets[best].1 {
                best = i;
            }
        }
        kept.push(dets[best]);
        alive.retain(|&i| i != best && !(dets[best].0.iou(&dets[i].0) > threshold));
    }
    kept
}

/// One flood-filled component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodRegion {
    /// Member pixels in scanline order.
    pub pixels: Vec<(usize, usize)>,
    /// Half-open tight pixel bounds `(x1, y1, x2, y2)`.
    pub bounds: (usize, usize, usize, usize),
}

/// Label 8-connected foreground components by BFS flood fill, in
/// scanline order of each component's first pixel.
pub fn flood_fill_regions(m: &BinaryMask) -> Vec<FloodRegion> {
    let (w, h) = (m.width(), m.height());
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if m.get(x, y) == 0 || seen[y * w + x] {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([(x, y)]);
            seen[y * w + x] = true;
            let mut pixels = Vec::new();
            while let Some((cx, cy)) = queue.pop_front() {
                pixels.push((cx, cy));
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let nx = cx as i64 + dx;
                        let ny = cy as i64 + dy;
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let (nx, ny) = (nx as usize, ny as usize);
                        if m.get(nx, ny) != 0 && !seen[ny * w + nx] {
                            seen[ny * w + nx] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            pixels.sort_by_key(|&(px, py)| (py, px));
            let x1 = pixels.iter().map(|p| p.0).min().unwrap();
            let x2 = pixels.iter().map(|p| p.0).max().unwrap() + 1;
            let y1 = pixels.iter().map(|p| p.1).min().unwrap();
            let y2 = pixels.iter().map(|p| p.1).max().unwrap() + 1;
            regions.push(FloodRegion {
                pixels,
                bounds: (x1, y1, x2, y2),
            });
        }
    }
    regions
}

/// Border-clamped bilinear interpolation, written out inline so the
/// RoIAlign oracles do not share code with the implementation.
fn bilinear_ref<T: Real>(fm: &FeatureMap<T>, x: f64, y: f64, c: usize) -> f64 {
    let w = fm.width();
    let h = fm.height();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v = |xx: usize, yy: usize| fm.get(xx, yy, c).to_f64_lossy();
    (1.0 - fx) * (1.0 - fy) * v(x0, y0)
        + fx * (1.0 - fy) * v(x1, y0)
        + (1.0 - fx) * fy * v(x0, y1)
        + fx * fy * v(x1, y1)
}

/// Monte-Carlo estimate of each bin's average feature value: uniformly
/// scattered bilinear samples inside every bin, averaged. Flat layout is
/// `(bin_y · out_w + bin_x) · channels + c`.
pub fn mc_bin_average<T: Real>(
    fm: &FeatureMap<T>,
    roi: &BBox<T>,
    cfg: &AlignConfig,
    samples_per_bin: usize,
    seed: u64,
) -> Vec<f64> {
    let stride = fm.feature_stride().to_f64_lossy();
    let fx1 = roi.x1().to_f64_lossy() / stride;
    let fy1 = roi.y1().to_f64_lossy() / stride;
    let fx2 = roi.x2().to_f64_lossy() / stride;
    let fy2 = roi.y2().to_f64_lossy() / stride;
    let bw = (fx2 - fx1) / cfg.out_w as f64;
    let bh = (fy2 - fy1) / cfg.out_h as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cfg.out_h * cfg.out_w * fm.channels());
    for by in 0..cfg.out_h {
        for bx in 0..cfg.out_w {
            let x0 = fx1 + bw * bx as f64;
            let y0 = fy1 + bh * by as f64;
            let points: Vec<(f64, f64)> = (0..samples_per_bin)
                .map(|_| {
                    (
                        x0 + bw * rng.gen_range(0.0..1.0),
                        y0 + bh * rng.gen_range(0.0..1.0),
                    )
                })
                .collect();
            for c in 0..fm.channels() {
                let sum: f64 = points.iter().map(|&(px, py)| bilinear_ref(fm, px, py, c)).sum();
                out.push(sum / samples_per_bin as f64);
            }
        }
    }
    out
}

/// Straight-line reference RoIAlign (regular sample grid per bin,
/// averaged), kept independent of the library implementation. Same flat
/// layout as [`mc_bin_average`].
pub fn roi_align_reference<T: Real>(fm: &FeatureMap<T>, roi: &BBox<T>, cfg: &AlignConfig) -> Vec<f64> {
    let stride = fm.feature_stride().to_f64_lossy();
    let fx1 = roi.x1().to_f64_lossy() / stride;
    let fy1 = roi.y1().to_f64_lossy() / stride;
    let bw = (roi.x2().to_f64_lossy() / stride - fx1) / cfg.out_w as f64;
    let bh = (roi.y2().to_f64_lossy() / stride - fy1) / cfg.out_h as f64;
    let s = cfg.samples_per_axis;

    let mut out = Vec::with_capacity(cfg.out_h * cfg.out_w * fm.channels());
    for by in 0..cfg.out_h {
        for bx in 0..cfg.out_w {
            for c in 0..fm.channels() {
                let mut acc = 0.0;
                for sy in 0..s {
                    for sx in 0..s {
                        let px = fx1 + bw * (bx as f64 + (sx as f64 + 0.5) / s as f64);
                        let py = fy1 + bh * (by as f64 + (sy as f64 + 0.5) / s as f64);
                        acc += bilinear_ref(fm, px, py, c);
                    }
                }
                out.push(acc / (s * s) as f64);
            }
        }
    }
    out
}

/// Central finite difference of `f` at `x`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

/// Scaled relative error used by every gradient check:
/// `|a − b| / max(1, |a|, |b|)`.
pub fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}

/// All-points average precision by direct prefix enumeration: every true
/// positive contributes `1/n_gt` times the best precision among ranked
/// prefixes ending at or after it.
pub fn prefix_ap(ranked_tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let precisions: Vec<f64> = (1..=ranked_tp.len())
        .map(|k| {
            let tp = ranked_tp[..k].iter().filter(|t| **t).count();
            tp as f64 / k as f64
        })
        .collect();
    let mut ap = 0.0;
    for (i, is_tp) in ranked_tp.iter().enumerate() {
        if *is_tp {
            let best = precisions[i..].iter().cloned().fold(0.0, f64::max);
            ap += best / n_gt as f64;
        }
    }
    ap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_iou_agrees_on_known_case() {
        let a = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let b = BBox::new(5.0, 5.0, 15.0, 15.0).unwrap();
        assert_eq!(pixel_count_iou(&a, &b), 25.0 / 175.0);
    }

    #[test]
    fn prefix_ap_known_values() {
        assert_eq!(prefix_ap(&[true], 1), 1.0);
        assert_eq!(prefix_ap(&[false, true], 1), 0.5);
        assert_eq!(prefix_ap(&[true, true], 2), 1.0);
        // [TP, FP, TP, TP, FP] with 4 gt -> 0.625 (hand-computed).
        let ap = prefix_ap(&[true, false, true, true, false], 4);
        assert!((ap - 0.625).abs() < 1e-12);
    }

    #[test]
    fn flood_fill_counts_components() {
        let mut m = BinaryMask::new(8, 8);
        m.set(0, 0, 1);
        m.set(1, 1, 1); // diagonal: same component under 8-connectivity
        m.set(5, 5, 1);
        let regions = flood_fill_regions(&m);
        assert_eq!(regions.len(), 2);
        assert_eq!(regions[0].pixels.len(), 2);
        assert_eq!(regions[0].bounds, (0, 0, 2, 2));
    }

    #[test]
    fn central_difference_of_square() {
        let d = central_difference(|x| x * x, 3.0, 1e-5);
        assert!(rel_error(d, 6.0) < 1e-9);
    }
}
