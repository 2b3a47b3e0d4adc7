use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xdet_core::geometry::{nms, BBox};
use xdet_core::losses::{classification_loss, mask_loss, smooth_l1, MaskLogits};
use xdet_core::mask::{trace_regions, BinaryMask};
use xdet_core::oracle::{
    brute_force_nms, central_difference, flood_fill_regions, mc_bin_average, pixel_count_iou,
    rel_error, roi_align_reference,
};
use xdet_core::roi_align::{roi_align, AlignConfig, FeatureMap};

use crate::{CmdError, CmdResult};

const FD_STEP: f64 = 1e-5;

struct SuiteOutcome {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
}

impl SuiteOutcome {
    fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Run every oracle suite and report per-suite tolerances and maximum
/// deviations. Exit code 0 only when all pass.
///
/// `perturb_smooth_l1` is a negative-control hook: it biases the checked
/// smooth-L1 slope so the gradient suite must fail.
pub fn cmd_selfcheck(perturb_smooth_l1: bool) -> CmdResult<()> {
    let suites = vec![
        gradient_smooth_l1(perturb_smooth_l1),
        gradient_cross_entropy(),
        gradient_mask_bce(),
        iou_pixel_oracle(),
        nms_brute_force(),
        border_following_flood_fill(),
        roi_align_vs_reference(),
        roi_align_vs_monte_carlo(),
    ];

    let mut failures = Vec::new();
    for s in &suites {
        println!(
            "suite {:<28} max deviation {:<12.3e} tolerance {:<9.1e} {}",
            s.name,
            s.max_deviation,
            s.tolerance,
            if s.passed() { "PASS" } else { "FAIL" }
        );
        if !s.passed() {
            failures.push(s.name);
        }
    }
    if failures.is_empty() {
        println!("selfcheck: all {} suites passed", suites.len());
        Ok(())
    } else {
        Err(CmdError::Check(failures.join(", ")))
    }
}

fn gradient_smooth_l1(perturb: bool) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let slope_bias = if perturb { 1.01 } else { 1.0 };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = rng.gen_range(-3.0..3.0f64);
        let analytic = smooth_l1(x).1 * slope_bias;
        let fd = central_difference(|v| smooth_l1(v).0, x, FD_STEP);
        worst = worst.max(rel_error(analytic, fd));
    }
    SuiteOutcome {
        name: "smooth-l1 gradient",
        max_deviation: worst,
        tolerance: 1e-4,
    }
}

fn gradient_cross_entropy() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = rng.gen_range(0.01..0.99);
        let positive = rng.gen_bool(0.5);
        let loss = classification_loss(p, positive);
        let fd = central_difference(|v| classification_loss(v, positive).value, p, FD_STEP);
        worst = worst.max(rel_error(loss.gradient[0], fd));
    }
    SuiteOutcome {
        name: "cross-entropy gradient",
        max_deviation: worst,
        tolerance: 1e-4,
    }
}

fn gradient_mask_bce() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut logits = MaskLogits::<f64>::zeros(2, 28, 28);
        let mut gt = BinaryMask::new(28, 28);
        for y in 0..28 {
            for x in 0..28 {
                gt.set(x, y, u8::from(rng.gen_bool(0.5)));
                for k in 0..2 {
                    logits.set(k, y, x, rng.gen_range(-4.0..4.0));
                }
            }
        }
        let loss = mask_loss(&logits, &gt, 0).unwrap();
        for _ in 0..5 {
            let x = rng.gen_range(0..28);
            let y = rng.gen_range(0..28);
            let base = logits.get(0, y, x);
            let fd = central_difference(
                |v| {
                    let mut l = logits.clone();
                    l.set(0, y, x, v);
                    mask_loss(&l, &gt, 0).unwrap().value
                },
                base,
                FD_STEP,
            );
            worst = worst.max(rel_error(loss.gradient[y * 28 + x], fd));
        }
    }
    SuiteOutcome {
        name: "mask-bce gradient",
        max_deviation: worst,
        tolerance: 1e-4,
    }
}

fn iou_pixel_oracle() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let make = |rng: &mut ChaCha8Rng| {
            let x1 = rng.gen_range(0..62);
            let y1 = rng.gen_range(0..62);
            let x2 = rng.gen_range(x1 + 1..64);
            let y2 = rng.gen_range(y1 + 1..64);
            BBox::new(x1 as f64, y1 as f64, x2 as f64, y2 as f64).unwrap()
        };
        let a = make(&mut rng);
        let b = make(&mut rng);
        worst = worst.max((a.iou(&b) - pixel_count_iou(&a, &b)).abs());
    }
    SuiteOutcome {
        name: "iou pixel oracle",
        max_deviation: worst,
        tolerance: 0.0,
    }
}

fn nms_brute_force() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut mismatches = 0usize;
    for _ in 0..50 {
        let n = rng.gen_range(1..200);
        let dets: Vec<(BBox<f64>, f64)> = (0..n)
            .map(|_| {
                let x1 = rng.gen_range(0.0..90.0);
                let y1 = rng.gen_range(0.0..90.0);
                (
                    BBox::new(x1, y1, x1 + rng.gen_range(2.0..30.0), y1 + rng.gen_range(2.0..30.0))
                        .unwrap(),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        let thr = rng.gen_range(0.2..0.8);
        if nms(&dets, thr) != brute_force_nms(&dets, thr) {
            mismatches += 1;
        }
    }
    SuiteOutcome {
        name: "nms brute force",
        max_deviation: mismatches as f64,
        tolerance: 0.0,
    }
}

fn border_following_flood_fill() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut mismatches = 0usize;
    for _ in 0..100 {
        let w = rng.gen_range(1..48);
        let h = rng.gen_range(1..48);
        let fill = rng.gen_range(0.05..0.7);
        let mut m = BinaryMask::new(w, h);
        for y in 0..h {
            for x in 0..w {
                if rng.gen_bool(fill) {
                    m.set(x, y, 1);
                }
            }
        }
        let traced = trace_regions(&m);
        let flooded = flood_fill_regions(&m);
        let ok = traced.len() == flooded.len()
            && traced
                .iter()
                .zip(&flooded)
                .all(|(t, f)| t.pixels == f.pixels && t.bounds() == f.bounds);
        if !ok {
            mismatches += 1;
        }
    }
    SuiteOutcome {
        name: "border following flood fill",
        max_deviation: mismatches as f64,
        tolerance: 0.0,
    }
}

fn roi_align_vs_reference() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let fm = FeatureMap::from_fn(16, 16, 2, 16.0, |_, _, _| rng.gen_range(0.0..1.0));
        let roi = random_roi(&mut rng);
        let cfg = AlignConfig::default();
        let ours = roi_align(&fm, &roi, &cfg).unwrap();
        for (got, want) in ours.values().iter().zip(roi_align_reference(&fm, &roi, &cfg)) {
            worst = worst.max((got - want).abs());
        }
    }
    SuiteOutcome {
        name: "roi-align reference",
        max_deviation: worst,
        tolerance: 1e-12,
    }
}

fn roi_align_vs_monte_carlo() -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst = 0.0f64;
    for case in 0..25 {
        // Smooth map: coarse 3x3 noise, bilinearly upsampled.
        let grid: Vec<f64> = (0..9).map(|_| rng.gen_range(0.0..1.0)).collect();
        let fm = FeatureMap::from_fn(16, 16, 1, 16.0, |x, y, _| {
            let gx = x as f64 / 15.0 * 2.0;
            let gy = y as f64 / 15.0 * 2.0;
            let x0 = (gx.floor() as usize).min(1);
            let y0 = (gy.floor() as usize).min(1);
            let fx = gx - x0 as f64;
            let fy = gy - y0 as f64;
            (1.0 - fx) * (1.0 - fy) * grid[y0 * 3 + x0]
                + fx * (1.0 - fy) * grid[y0 * 3 + x0 + 1]
                + (1.0 - fx) * fy * grid[(y0 + 1) * 3 + x0]
                + fx * fy * grid[(y0 + 1) * 3 + x0 + 1]
        });
        let roi = random_roi(&mut rng);
        let cfg = AlignConfig::default();
        let ours = roi_align(&fm, &roi, &cfg).unwrap();
        let mc = mc_bin_average(&fm, &roi, &cfg, 4000, 0xC0FFEE + case);
        for (got, want) in ours.values().iter().zip(&mc) {
            worst = worst.max((got - want).abs());
        }
    }
    SuiteOutcome {
        name: "roi-align monte carlo",
        max_deviation: worst,
        tolerance: 1e-2,
    }
}

fn random_roi(rng: &mut ChaCha8Rng) -> BBox<f64> {
    let w = rng.gen_range(2.0..9.0) * 16.0;
    let h = rng.gen_range(2.0..9.0) * 16.0;
    let x1 = rng.gen_range(16.0..(14.0 * 16.0 - w));
    let y1 = rng.gen_range(16.0..(14.0 * 16.0 - h));
    BBox::new(x1, y1, x1 + w, y1 + h).unwrap()
}
