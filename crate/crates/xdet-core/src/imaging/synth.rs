//! Synthetic X-ray-like defect images with exact ground truth.
//!
//! Images get a smooth low-frequency background (a casting stand-in) and
//! a handful of darker elliptical blobs with mild radial wobble as
//! defects. Every defect carries an exact instance mask and the tight
//! box of that mask.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::BBox;
use crate::imaging::{AnnotatedImage, GrayImage};
use crate::mask::BinaryMask;
use crate::scalar::Real;

/// Generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    /// Inclusive range of defects per image.
    pub defects_per_image: (usize, usize),
    /// Inclusive range of defect semi-axes in pixels; paired with the
    /// wobble this centers box sides near 20 px.
    pub radius: (f64, f64),
    /// Inclusive range of intensity drop at the defect center.
    pub depth: (f64, f64),
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            defects_per_image: (1, 4),
            radius: (6.0, 14.0),
            depth: (25.0, 60.0),
        }
    }
}

/// Generate `n_images` annotated images, bit-identical per seed.
///
/// Each image draws from its own RNG stream derived from `seed` and the
/// image index, so the dataset does not depend on evaluation order.
pub fn synth_dataset<T: Real>(
    n_images: usize,
    spec: &SynthSpec,
    seed: u64,
) -> Vec<AnnotatedImage<T>> {
    (0..n_images)
        .map(|i| synth_image(spec, derive_seed(seed, i as u64)))
        .collect()
}

fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 over master ^ (index+1)·golden ratio.
    let mut z = master ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn synth_image<T: Real>(spec: &SynthSpec, seed: u64) -> AnnotatedImage<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (spec.width, spec.height);

    // Smooth background: base level plus a few long-wavelength cosines.
    let base = rng.gen_range(150.0..200.0);
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let amp = rng.gen_range(4.0..12.0);
            let fx = rng.gen_range(-1.0..1.0) / (w as f64);
            let fy = rng.gen_range(-1.0..1.0) / (h as f64);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (amp, fx, fy, phase)
        })
        .collect();
    let mut background = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut v = base;
            for &(amp, fx, fy, phase) in &waves {
                v += amp
                    * (std::f64::consts::TAU * (fx * x as f64 + fy * y as f64) + phase).cos();
            }
            background[y * w + x] = v.clamp(0.0, 255.0);
        }
    }

    let mut pixels = background.clone();
    let mut occupied = vec![false; w * h];
    let mut boxes = Vec::new();
    let mut masks = Vec::new();

    let count = rng.gen_range(spec.defects_per_image.0..=spec.defects_per_image.1);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < count && attempts < count * 30 {
        attempts += 1;
        if let Some((mask, depth_map)) = try_place_defect(spec, &mut rng, w, h, &occupied) {
            let mut min_x = w;
            let mut max_x = 0;
            let mut min_y = h;
            let mut max_y = 0;
            for (x, y) in mask.foreground() {
                // Keep a one-pixel moat so instances never merge.
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let nx = x as i64 + dx;
                        let ny = y as i64 + dy;
                        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                            occupied[ny as usize * w + nx as usize] = true;
                        }
                    }
                }
                pixels[y * w + x] = (pixels[y * w + x] - depth_map[y * w + x]).max(0.0);
                min_x = min_x.min(x);
                max_x = max_x.max(x);
                min_y = min_y.min(y);
                max_y = max_y.max(y);
            }
            let bbox = BBox::new(
                T::from_usize_lossy(min_x),
                T::from_usize_lossy(min_y),
                T::from_usize_lossy(max_x + 1),
                T::from_usize_lossy(max_y + 1),
            )
            .expect("defect mask has at least one pixel");
            boxes.push((bbox, 0u32));
            masks.push(mask);
            placed += 1;
        }
    }

    let image = GrayImage::from_fn(w, h, |x, y| T::from_f64_lossy(pixels[y * w + x]));
    AnnotatedImage {
        image,
        boxes,
        masks: Some(masks),
    }
}

/// Rasterize one wobbly ellipse; `None` when it would touch an existing
/// defect or come out disconnected.
fn try_place_defect(
    spec: &SynthSpec,
    rng: &mut ChaCha8Rng,
    w: usize,
    h: usize,
    occupied: &[bool],
) -> Option<(BinaryMask, Vec<f64>)> {
    let rx = rng.gen_range(spec.radius.0..=spec.radius.1);
    let ry = rng.gen_range(spec.radius.0..=spec.radius.1);
    let margin = (rx.max(ry) * 1.4).ceil() + 2.0;
    if 2.0 * margin + 2.0 >= w as f64 || 2.0 * margin + 2.0 >= h as f64 {
        return None;
    }
    let cx = rng.gen_range(margin..(w as f64 - margin));
    let cy = rng.gen_range(margin..(h as f64 - margin));
    let depth = rng.gen_range(spec.depth.0..=spec.depth.1);
    // Radial wobble bounded to ±0.25 keeps the blob starlike and chunky.
    let w2 = rng.gen_range(0.0..0.15);
    let w3 = rng.gen_range(0.0..0.10);
    let p2 = rng.gen_range(0.0..std::f64::consts::TAU);
    let p3 = rng.gen_range(0.0..std::f64::consts::TAU);

    let reach = (rx.max(ry) * 1.3).ceil() as i64;
    let mut mask = BinaryMask::new(w, h);
    let mut depth_map = vec![0.0f64; w * h];
    let mut any = false;
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let x = cx as i64 + dx;
            let y = cy as i64 + dy;
            if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
                continue;
            }
            let ux = (x as f64 + 0.5 - cx) / rx;
            let uy = (y as f64 + 0.5 - cy) / ry;
            let r = (ux * ux + uy * uy).sqrt();
            let theta = uy.atan2(ux);
            let boundary = 1.0 + w2 * (2.0 * theta + p2).cos() + w3 * (3.0 * theta + p3).cos();
            if r <= boundary {
                if occupied[y as usize * w + x as usize] {
                    return None;
                }
                mask.set(x as usize, y as usize, 1);
                // Deepest at the center, always a strict drop inside.
                depth_map[y as usize * w + x as usize] =
                    depth * (1.0 - 0.5 * (r / boundary).powi(2)).max(0.5);
                any = true;
            }
        }
    }
    if !any {
        return None;
    }
    // A pathological wobble could pinch the raster into pieces; reject.
    if crate::mask::trace_regions(&mask).len() != 1 {
        return None;
    }
    Some((mask, depth_map))
}
