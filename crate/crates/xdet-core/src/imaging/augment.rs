//! Photometric and geometric training-set augmentations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::imaging::{flip, AnnotatedImage, FlipAxis, GrayImage};
use crate::mask::MaskFrame;
use crate::scalar::Real;

/// Which augmentations a training pipeline applies, with their knobs.
///
/// Augmentation only ever runs when `training` is set; an evaluation
/// pipeline passes the spec through [`apply_augmentations`] untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentSpec<T> {
    pub training: bool,
    pub horizontal_flip: bool,
    pub vertical_flip: bool,
    pub gaussian_blur: bool,
    pub gaussian_noise: bool,
    pub random_crop: bool,
    pub blur_sigma: T,
    pub noise_fraction: T,
    pub crop_fraction: T,
    pub seed: u64,
}

impl<T: Real> Default for AugmentSpec<T> {
    fn default() -> Self {
        Self {
            training: true,
            horizontal_flip: false,
            vertical_flip: false,
            gaussian_blur: false,
            gaussian_noise: false,
            random_crop: false,
            blur_sigma: T::one(),
            noise_fraction: T::from_f64_lossy(0.05),
            crop_fraction: T::from_f64_lossy(0.75),
            seed: 0,
        }
    }
}

/// Separable Gaussian blur, kernel truncated at radius `⌈3σ⌉` and
/// normalized to sum 1; borders reflect.
///
/// Each output pixel is accumulated as `center + Σ w·(neighbor − center)`,
/// which is algebraically the normalized convolution but passes constant
/// neighborhoods through bit-exactly.
pub fn gaussian_blur<T: Real>(img: &GrayImage<T>, sigma: T) -> Result<GrayImage<T>> {
    if !(sigma > T::zero()) {
        return Err(Error::Config("blur sigma must be positive".into()));
    }
    let radius = (sigma.to_f64_lossy() * 3.0).ceil() as i64;
    let two = T::from_f64_lossy(2.0);
    let mut kernel: Vec<T> = (-radius..=radius)
        .map(|k| {
            let kf = T::from_f64_lossy(k as f64);
            (-(kf * kf) / (two * sigma * sigma)).exp()
        })
        .collect();
    let sum = kernel.iter().fold(T::zero(), |a, v| a + *v);
    for w in &mut kernel {
        *w = *w / sum;
    }

    let horizontal = convolve_axis(img, &kernel, radius, true);
    Ok(convolve_axis(&horizontal, &kernel, radius, false))
}

fn convolve_axis<T: Real>(
    img: &GrayImage<T>,
    kernel: &[T],
    radius: i64,
    along_x: bool,
) -> GrayImage<T> {
    let (w, h) = (img.width(), img.height());
    GrayImage::from_fn(w, h, |x, y| {
        let center = img.get(x, y);
        let mut acc = center;
        for (ki, weight) in kernel.iter().enumerate() {
            let offset = ki as i64 - radius;
            let (sx, sy) = if along_x {
                (reflect(x as i64 + offset, w as i64), y as i64)
            } else {
                (x as i64, reflect(y as i64 + offset, h as i64))
            };
            acc = acc + *weight * (img.get(sx as usize, sy as usize) - center);
        }
        acc
    })
}

/// Edge-inclusive reflection: `-1 → 0`, `-2 → 1`, `n → n-1`, …
fn reflect(idx: i64, len: i64) -> i64 {
    let mut i = idx;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= len {
            i = 2 * len - 1 - i;
        } else {
            return i;
        }
    }
}

/// Add zero-mean Gaussian noise with σ = `fraction` of the image's
/// dynamic range (max pixel − min pixel), clipped back to that range.
///
/// A constant image has zero dynamic range and is returned unchanged, as
/// is any image when `fraction` is zero. Deterministic per seed.
pub fn gaussian_noise<T: Real>(img: &GrayImage<T>, fraction: T, seed: u64) -> Result<GrayImage<T>> {
    if fraction < T::zero() {
        return Err(Error::Config("noise fraction must be nonnegative".into()));
    }
    let (lo, hi) = img.min_max();
    if fraction == T::zero() || lo == hi {
        return Ok(img.clone());
    }
    let sigma = fraction * (hi - lo);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let z = T::from_f64_lossy(standard_normal(&mut rng));
            let v = (img.get(x, y) + sigma * z).max(lo).min(hi);
            out.set(x, y, v);
        }
    }
    Ok(out)
}

/// Box-Muller draw from N(0, 1); stable across platforms and versions.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Fraction of a box's area that must survive clipping to the crop
/// window for the annotation to be kept.
pub const CROP_KEEP_FRACTION: f64 = 0.25;

/// Crop a uniformly placed window whose sides are `crop_fraction` of the
/// image sides (rounded, at integer pixel offsets).
///
/// Boxes are clipped to the window; a box is dropped (with its mask)
/// when less than 25% of its original area remains. `crop_fraction` of 1
/// is the identity.
pub fn random_crop<T: Real>(
    a: &AnnotatedImage<T>,
    crop_fraction: T,
    seed: u64,
) -> Result<AnnotatedImage<T>> {
    if !(crop_fraction > T::zero() && crop_fraction <= T::one()) {
        return Err(Error::Config("crop fraction must be in (0, 1]".into()));
    }
    if crop_fraction == T::one() {
        return Ok(a.clone());
    }
    let (w, h) = (a.image.width(), a.image.height());
    let cw = (T::from_usize_lossy(w) * crop_fraction)
        .round()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, w);
    let ch = (T::from_usize_lossy(h) * crop_fraction)
        .round()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, h);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = rng.gen_range(0..=w - cw);
    let y0 = rng.gen_range(0..=h - ch);

    let image = GrayImage::from_fn(cw, ch, |x, y| a.image.get(x0 + x, y0 + y));

    let window = BBox::new(
        T::from_usize_lossy(x0),
        T::from_usize_lossy(y0),
        T::from_usize_lossy(x0 + cw),
        T::from_usize_lossy(y0 + ch),
    )
    .expect("crop window has positive extent");

    let keep = T::from_f64_lossy(CROP_KEEP_FRACTION);
    let mut boxes = Vec::new();
    let mut kept_indices = Vec::new();
    for (i, (b, c)) in a.boxes.iter().enumerate() {
        let Some(clipped) = b.clip_to_box(&window) else {
            continue;
        };
        if clipped.area() < keep * b.area() {
            continue;
        }
        let shifted = clipped
            .translate(-window.x1(), -window.y1())
            .expect("translation keeps area");
        boxes.push((shifted, *c));
        kept_indices.push(i);
    }

    let masks = a.masks.as_ref().map(|masks| {
        kept_indices
            .iter()
            .map(|&i| masks[i].crop(x0, y0, cw, ch, MaskFrame::Image))
            .collect()
    });

    Ok(AnnotatedImage {
        image,
        boxes,
        masks,
    })
}

/// Run the enabled augmentations in a fixed order (flips, blur, noise,
/// crop), with per-step seeds derived from `spec.seed`. Flips fire with
/// probability one half each. Blur and noise never touch annotations.
pub fn apply_augmentations<T: Real>(
    a: &AnnotatedImage<T>,
    spec: &AugmentSpec<T>,
) -> Result<AnnotatedImage<T>> {
    if !spec.training {
        return Ok(a.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = a.clone();
    if spec.horizontal_flip && rng.gen_bool(0.5) {
        out = flip(&out, FlipAxis::Horizontal);
    }
    if spec.vertical_flip && rng.gen_bool(0.5) {
        out = flip(&out, FlipAxis::Vertical);
    }
    if spec.gaussian_blur {
        out.image = gaussian_blur(&out.image, spec.blur_sigma)?;
    }
    if spec.gaussian_noise {
        let noise_seed = rng.gen::<u64>();
        out.image = gaussian_noise(&out.image, spec.noise_fraction, noise_seed)?;
    }
    if spec.random_crop {
        let crop_seed = rng.gen::<u64>();
        out = random_crop(&out, spec.crop_fraction, crop_seed)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_preserves_constant_images_bit_exact() {
        let img = GrayImage::<f64>::filled(31, 17, 127.3);
        let out = gaussian_blur(&img, 1.0).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn blur_impulse_matches_closed_form_kernel() {
        let mut img = GrayImage::<f64>::zeros(21, 21);
        img.set(10, 10, 1.0);
        let sigma = 1.0f64;
        let out = gaussian_blur(&img, sigma).unwrap();

        let radius = 3i64;
        let weights: Vec<f64> = (-radius..=radius)
            .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = weights.iter().sum();
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let expected =
                    weights[(dx + radius) as usize] / sum * weights[(dy + radius) as usize] / sum;
                let got = out.get((10 + dx) as usize, (10 + dy) as usize);
                assert!(
                    (got - expected).abs() < 1e-9,
                    "impulse response off at ({dx}, {dy}): {got} vs {expected}"
                );
            }
        }
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn blur_preserves_total_intensity_of_interior_content() {
        let mut img = GrayImage::<f64>::zeros(41, 41);
        for y in 15..25 {
            for x in 12..28 {
                img.set(x, y, ((x * y) % 13) as f64 + 1.0);
            }
        }
        let before: f64 = img.pixels().iter().sum();
        let out = gaussian_blur(&img, 1.0).unwrap();
        let after: f64 = out.pixels().iter().sum();
        assert!((after - before).abs() / before < 1e-6);
    }

    #[test]
    fn noise_sigma_follows_dynamic_range() {
        // min 10, max 210 -> dynamic range 200 -> sigma 10. Pixels sit
        // mid-range so clipping never bites at 10 sigma.
        let mut img = GrayImage::<f64>::filled(1000, 1000, 110.0);
        img.set(0, 0, 10.0);
        img.set(1, 0, 210.0);
        let out = gaussian_noise(&img, 0.05, 99).unwrap();

        let n = 1000 * 1000 - 2;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for y in 0..1000 {
            for x in 0..1000 {
                if y == 0 && x < 2 {
                    continue;
                }
                let d = out.get(x, y) - img.get(x, y);
                sum += d;
                sumsq += d * d;
            }
        }
        let mean = sum / n as f64;
        let std = (sumsq / n as f64 - mean * mean).sqrt();
        assert!((std - 10.0).abs() / 10.0 < 0.01, "std = {std}");
        assert!(mean.abs() < 0.1);
    }

    #[test]
    fn noise_zero_fraction_and_constant_image_unchanged() {
        let img = GrayImage::<f64>::from_fn(16, 16, |x, y| (x + 2 * y) as f64);
        assert_eq!(gaussian_noise(&img, 0.0, 1).unwrap(), img);
        let flat = GrayImage::<f64>::filled(16, 16, 42.0);
        assert_eq!(gaussian_noise(&flat, 0.05, 1).unwrap(), flat);
    }

    #[test]
    fn noise_clips_to_original_range() {
        let img = GrayImage::<f64>::from_fn(64, 64, |x, _| if x % 2 == 0 { 0.0 } else { 255.0 });
        let out = gaussian_noise(&img, 0.2, 5).unwrap();
        let (lo, hi) = out.min_max();
        assert!(lo >= 0.0 && hi <= 255.0);
    }

    #[test]
    fn crop_fraction_one_is_identity() {
        let img = GrayImage::<f64>::from_fn(40, 30, |x, y| (x * y) as f64);
        let a = AnnotatedImage::without_masks(
            img,
            vec![(BBox::new(5.0, 5.0, 15.0, 15.0).unwrap(), 0)],
        );
        let out = random_crop(&a, 1.0, 7).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn crop_translates_interior_boxes_and_drops_slivers() {
        let img = GrayImage::<f64>::from_fn(100, 100, |x, y| (x + y) as f64);
        let a = AnnotatedImage::without_masks(
            img,
            vec![
                (BBox::new(40.0, 40.0, 50.0, 50.0).unwrap(), 0),
                (BBox::new(0.0, 0.0, 4.0, 4.0).unwrap(), 1),
            ],
        );
        // Deterministic window for this seed; derive it the same way.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cw = 50usize;
        let x0 = rng.gen_range(0..=50usize);
        let y0 = rng.gen_range(0..=50usize);
        let out = random_crop(&a, 0.5, 3).unwrap();
        assert_eq!(out.image.width(), cw);
        for (b, c) in &out.boxes {
            let orig = a.boxes[*c as usize].0;
            assert!(b.x1() >= 0.0 && b.x2() <= 50.0);
            // Translated coordinates line up with the window origin.
            assert!(b.x1() + x0 as f64 >= orig.x1() - 1e-9);
            assert!(b.y1() + y0 as f64 >= orig.y1() - 1e-9);
        }
    }

    #[test]
    fn crop_keeps_box_iff_quarter_area_remains() {
        // Fixed geometry: a 10x10 box half inside a 50-wide window keeps
        // 50% -> kept; a box with only 20% inside is dropped.
        let img = GrayImage::<f64>::zeros(100, 100);
        let half_in = BBox::new(45.0, 10.0, 55.0, 20.0).unwrap();
        let window = BBox::new(0.0, 0.0, 50.0, 50.0).unwrap();
        let clipped = half_in.clip_to_box(&window).unwrap();
        assert_eq!(clipped.area() / half_in.area(), 0.5);

        let fifth_in = BBox::new(48.0, 10.0, 58.0, 20.0).unwrap();
        let clipped = fifth_in.clip_to_box(&window).unwrap();
        assert_eq!(clipped.area() / fifth_in.area(), 0.2);
        drop(img);
    }

    #[test]
    fn augment_pipeline_respects_training_flag_and_seed() {
        let img = GrayImage::<f64>::from_fn(32, 32, |x, y| (x * 31 + y * 7) as f64 % 200.0);
        let a = AnnotatedImage::without_masks(
            img,
            vec![(BBox::new(4.0, 4.0, 12.0, 12.0).unwrap(), 0)],
        );
        let spec = AugmentSpec {
            horizontal_flip: true,
            vertical_flip: true,
            gaussian_noise: true,
            seed: 42,
            ..Default::default()
        };
        let once = apply_augmentations(&a, &spec).unwrap();
        let again = apply_augmentations(&a, &spec).unwrap();
        assert_eq!(once, again);

        let eval_spec = AugmentSpec {
            training: false,
            ..spec
        };
        assert_eq!(apply_augmentations(&a, &eval_spec).unwrap(), a);
    }
}
