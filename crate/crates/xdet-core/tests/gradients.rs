//! Analytic gradients against central finite differences, plus the exact
//! gating guarantees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xdet_core::losses::{
    classification_loss, location_loss, mask_loss, smooth_l1, total_loss, LossWeights, MaskLogits,
};
use xdet_core::mask::BinaryMask;
use xdet_core::oracle::{central_difference, rel_error};

const FD_STEP: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

#[test]
fn smooth_l1_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = rng.gen_range(-3.0..3.0);
        let (_, analytic) = smooth_l1(x);
        let fd = central_difference(|v| smooth_l1(v).0, x, FD_STEP);
        worst = worst.max(rel_error(analytic, fd));
    }
    assert!(worst < TOLERANCE, "max rel error {worst}");
}

#[test]
fn location_loss_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pred: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let target: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let loss = location_loss(&pred, &target, true);
        for i in 0..4 {
            let fd = central_difference(
                |v| {
                    let mut p = pred;
                    p[i] = v;
                    location_loss(&p, &target, true).value
                },
                pred[i],
                FD_STEP,
            );
            worst = worst.max(rel_error(loss.gradient[i], fd));
        }
    }
    assert!(worst < TOLERANCE, "max rel error {worst}");
}

#[test]
fn classification_loss_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = rng.gen_range(0.01..0.99);
        let positive = rng.gen_bool(0.5);
        let loss = classification_loss(p, positive);
        let fd = central_difference(|v| classification_loss(v, positive).value, p, FD_STEP);
        worst = worst.max(rel_error(loss.gradient[0], fd));
    }
    assert!(worst < TOLERANCE, "max rel error {worst}");
}

#[test]
fn total_loss_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pred: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let target: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let p = rng.gen_range(0.05..0.95);
        let w = LossWeights {
            alpha: rng.gen_range(0.1..3.0),
            beta: rng.gen_range(0.1..3.0),
        };
        let t = total_loss(
            &location_loss(&pred, &target, true),
            &classification_loss(p, true),
            &w,
        );
        for i in 0..4 {
            let fd = central_difference(
                |v| {
                    let mut pp = pred;
                    pp[i] = v;
                    total_loss(
                        &location_loss(&pp, &target, true),
                        &classification_loss(p, true),
                        &w,
                    )
                    .value
                },
                pred[i],
                FD_STEP,
            );
            worst = worst.max(rel_error(t.gradient[i], fd));
        }
        let fd = central_difference(
            |v| {
                total_loss(
                    &location_loss(&pred, &target, true),
                    &classification_loss(v, true),
                    &w,
                )
                .value
            },
            p,
            FD_STEP,
        );
        worst = worst.max(rel_error(t.gradient[4], fd));
    }
    assert!(worst < TOLERANCE, "max rel error {worst}");
}

#[test]
fn mask_loss_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let classes = rng.gen_range(1..4);
        let roi_class = rng.gen_range(0..classes);
        let mut logits = MaskLogits::<f64>::zeros(classes, 28, 28);
        let mut gt = BinaryMask::new(28, 28);
        for y in 0..28 {
            for x in 0..28 {
                gt.set(x, y, u8::from(rng.gen_bool(0.5)));
                for k in 0..classes {
                    logits.set(k, y, x, rng.gen_range(-4.0..4.0));
                }
            }
        }
        let loss = mask_loss(&logits, &gt, roi_class).unwrap();
        // Probe a handful of random cells in the selected slice.
        for _ in 0..8 {
            let x = rng.gen_range(0..28);
            let y = rng.gen_range(0..28);
            let base = logits.get(roi_class, y, x);
            let fd = central_difference(
                |v| {
                    let mut l = logits.clone();
                    l.set(roi_class, y, x, v);
                    mask_loss(&l, &gt, roi_class).unwrap().value
                },
                base,
                FD_STEP,
            );
            let analytic = loss.gradient[(roi_class * 28 + y) * 28 + x];
            worst = worst.max(rel_error(analytic, fd));
        }
    }
    assert!(worst < TOLERANCE, "max rel error {worst}");
}

#[test]
fn location_loss_gating_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let pred: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let target: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let gated = location_loss(&pred, &target, false);
        assert_eq!(gated.value, 0.0);
        assert!(gated.gradient.iter().all(|g| *g == 0.0));
    }
}

#[test]
fn mask_loss_non_selected_slices_exactly_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let classes = rng.gen_range(2..5);
        let roi_class = rng.gen_range(0..classes);
        let mut logits = MaskLogits::<f64>::zeros(classes, 28, 28);
        let mut gt = BinaryMask::new(28, 28);
        for y in 0..28 {
            for x in 0..28 {
                gt.set(x, y, u8::from(rng.gen_bool(0.3)));
                for k in 0..classes {
                    logits.set(k, y, x, rng.gen_range(-4.0..4.0));
                }
            }
        }
        let loss = mask_loss(&logits, &gt, roi_class).unwrap();
        let per_slice = 28 * 28;
        for k in 0..classes {
            let slice = &loss.gradient[k * per_slice..(k + 1) * per_slice];
            if k == roi_class {
                assert!(slice.iter().any(|g| *g != 0.0));
            } else {
                assert!(slice.iter().all(|g| *g == 0.0));
            }
        }
    }
}
