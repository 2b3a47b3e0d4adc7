//! Grayscale images, annotation-consistent geometric transforms, and
//! dataset synthesis.

mod augment;
mod io;
mod synth;

pub use augment::{apply_augmentations, gaussian_blur, gaussian_noise, random_crop, AugmentSpec};
pub use io::{read_gray_png, write_gray_png_u16, write_gray_png_u8};
pub use synth::{synth_dataset, SynthSpec};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::mask::BinaryMask;
use crate::scalar::Real;

/// Single-channel image with real-valued pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                what: "gray image",
                got: format!("{} values", data.len()),
                expected: format!("{}x{}", width, height),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut img = Self::zeros(width, height);
        for y in 0..height {
            for x in 0..width {
                img.set(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[T] {
        &self.data
    }

    pub fn min_max(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for v in &self.data {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    /// Border-clamped bilinear sample; pixel `(i, j)` is centered at
    /// `(i + 0.5, j + 0.5)` in image coordinates.
    pub fn sample_bilinear(&self, x: T, y: T) -> T {
        let half = T::from_f64_lossy(0.5);
        let gx = (x - half)
            .max(T::zero())
            .min(T::from_usize_lossy(self.width - 1));
        let gy = (y - half)
            .max(T::zero())
            .min(T::from_usize_lossy(self.height - 1));
        let x0f = gx.floor();
        let y0f = gy.floor();
        let fx = gx - x0f;
        let fy = gy - y0f;
        let x0 = x0f.to_usize().unwrap_or(0).min(self.width - 1);
        let y0 = y0f.to_usize().unwrap_or(0).min(self.height - 1);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let one = T::one();
        (one - fx) * (one - fy) * self.get(x0, y0)
            + fx * (one - fy) * self.get(x1, y0)
            + (one - fx) * fy * self.get(x0, y1)
            + fx * fy * self.get(x1, y1)
    }
}

/// An image plus its box (and optional mask) annotations.
///
/// Masks, when present, align index-for-index with the boxes and share
/// the image dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedImage<T> {
    pub image: GrayImage<T>,
    pub boxes: Vec<(BBox<T>, u32)>,
    pub masks: Option<Vec<BinaryMask>>,
}

impl<T: Real> AnnotatedImage<T> {
    pub fn without_masks(image: GrayImage<T>, boxes: Vec<(BBox<T>, u32)>) -> Self {
        Self {
            image,
            boxes,
            masks: None,
        }
    }
}

/// Scale factor applied by [`resize_and_pad`], kept for inverse mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResizeRecord<T> {
    pub scale: T,
    pub orig_w: usize,
    pub orig_h: usize,
    pub target: usize,
}

impl<T: Real> ResizeRecord<T> {
    /// Map a box in padded/resized coordinates back to the original image.
    pub fn unmap_box(&self, b: &BBox<T>) -> Result<BBox<T>> {
        b.scale(T::one() / self.scale)
    }
}

/// Scale so the longest edge is no larger than `target`, then pad with
/// zeros on the right and bottom to `target × target`.
///
/// Images already within bounds are padded only; set `upscale_small` to
/// also grow them until the longest edge hits `target`. Boxes and masks
/// are transformed consistently (masks by nearest neighbor).
pub fn resize_and_pad<T: Real>(
    a: &AnnotatedImage<T>,
    target: usize,
    upscale_small: bool,
) -> Result<(AnnotatedImage<T>, ResizeRecord<T>)> {
    let (w, h) = (a.image.width(), a.image.height());
    if target == 0 || w == 0 || h == 0 {
        return Err(Error::Config("resize target and image dims must be positive".into()));
    }
    let longest = w.max(h);
    let scale = if longest > target || (upscale_small && longest < target) {
        T::from_usize_lossy(target) / T::from_usize_lossy(longest)
    } else {
        T::one()
    };

    let content_w = (T::from_usize_lossy(w) * scale)
        .round()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, target);
    let content_h = (T::from_usize_lossy(h) * scale)
        .round()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, target);

    let mut image = GrayImage::zeros(target, target);
    if scale == T::one() {
        for y in 0..h {
            for x in 0..w {
                image.set(x, y, a.image.get(x, y));
            }
        }
    } else {
        let half = T::from_f64_lossy(0.5);
        for y in 0..content_h {
            for x in 0..content_w {
                let sx = (T::from_usize_lossy(x) + half) / scale;
                let sy = (T::from_usize_lossy(y) + half) / scale;
                image.set(x, y, a.image.sample_bilinear(sx, sy));
            }
        }
    }

    let boxes = a
        .boxes
        .iter()
        .map(|(b, c)| Ok((b.scale(scale)?, *c)))
        .collect::<Result<Vec<_>>>()?;

    let masks = match &a.masks {
        None => None,
        Some(masks) => Some(
            masks
                .iter()
                .map(|m| {
                    let mut out = BinaryMask::new(target, target);
                    if scale == T::one() {
                        for y in 0..h.min(target) {
                            for x in 0..w.min(target) {
                                out.set(x, y, m.get(x, y));
                            }
                        }
                    } else {
                        let half = T::from_f64_lossy(0.5);
                        for y in 0..content_h {
                            for x in 0..content_w {
                                let sx = ((T::from_usize_lossy(x) + half) / scale)
                                    .to_usize()
                                    .unwrap_or(0)
                                    .min(w - 1);
                                let sy = ((T::from_usize_lossy(y) + half) / scale)
                                    .to_usize()
                                    .unwrap_or(0)
                                    .min(h - 1);
                                out.set(x, y, m.get(sx, sy));
                            }
                        }
                    }
                    out
                })
                .collect(),
        ),
    };

    Ok((
        AnnotatedImage {
            image,
            boxes,
            masks,
        },
        ResizeRecord {
            scale,
            orig_w: w,
            orig_h: h,
            target,
        },
    ))
}

/// Mirror axis for [`flip`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipAxis {
    Horizontal,
    Vertical,
}

/// Mirror the image and its annotations.
///
/// Horizontal flips map a box `(x1, y1, x2, y2)` to `(W−x2, y1, W−x1, y2)`;
/// vertical flips act on y analogously. Applying the same flip twice
/// restores the input bit-exactly whenever `W − c` is exact for the box
/// coordinates (always true for integer-valued coordinates).
pub fn flip<T: Real>(a: &AnnotatedImage<T>, axis: FlipAxis) -> AnnotatedImage<T> {
    let (w, h) = (a.image.width(), a.image.height());
    let image = match axis {
        FlipAxis::Horizontal => GrayImage::from_fn(w, h, |x, y| a.image.get(w - 1 - x, y)),
        FlipAxis::Vertical => GrayImage::from_fn(w, h, |x, y| a.image.get(x, h - 1 - y)),
    };
    let wt = T::from_usize_lossy(w);
    let ht = T::from_usize_lossy(h);
    let boxes = a
        .boxes
        .iter()
        .map(|(b, c)| {
            let flipped = match axis {
                FlipAxis::Horizontal => {
                    BBox::new(wt - b.x2(), b.y1(), wt - b.x1(), b.y2())
                }
                FlipAxis::Vertical => BBox::new(b.x1(), ht - b.y2(), b.x2(), ht - b.y1()),
            }
            .expect("mirrored box keeps its area");
            (flipped, *c)
        })
        .collect();
    let masks = a.masks.as_ref().map(|masks| {
        masks
            .iter()
            .map(|m| match axis {
                FlipAxis::Horizontal => m.flip_horizontal(),
                FlipAxis::Vertical => m.flip_vertical(),
            })
            .collect()
    });
    AnnotatedImage {
        image,
        boxes,
        masks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_image() -> AnnotatedImage<f64> {
        let image = GrayImage::from_fn(100, 60, |x, y| (x * 7 + y * 13) as f64 % 251.0);
        let boxes = vec![(BBox::new(10.0, 20.0, 30.0, 40.0).unwrap(), 0)];
        let mut mask = BinaryMask::new(100, 60);
        for y in 20..40 {
            for x in 10..30 {
                mask.set(x, y, 1);
            }
        }
        AnnotatedImage {
            image,
            boxes,
            masks: Some(vec![mask]),
        }
    }

    #[test]
    fn resize_shrinks_twice_oversized_image() {
        let image = GrayImage::from_fn(1024, 512, |x, y| ((x + y) % 256) as f64);
        let boxes = vec![(BBox::new(0.0, 0.0, 100.0, 100.0).unwrap(), 0)];
        let a = AnnotatedImage::without_masks(image, boxes);
        let (out, rec) = resize_and_pad(&a, 768, false).unwrap();
        assert_eq!(rec.scale, 0.75);
        assert_eq!(out.image.width(), 768);
        assert_eq!(out.image.height(), 768);
        // Content occupies 768x384; the padded band below is zero.
        assert!((0..768).all(|x| out.image.get(x, 400) == 0.0));
        let (b, _) = out.boxes[0];
        assert_eq!(b, BBox::new(0.0, 0.0, 75.0, 75.0).unwrap());
    }

    #[test]
    fn resize_fixed_point_at_target() {
        let image = GrayImage::from_fn(768, 768, |x, y| (x * y % 97) as f64);
        let a = AnnotatedImage::without_masks(image.clone(), vec![]);
        let (out, rec) = resize_and_pad(&a, 768, false).unwrap();
        assert_eq!(rec.scale, 1.0);
        assert_eq!(out.image, image);
    }

    #[test]
    fn small_image_padded_not_upscaled() {
        let image = GrayImage::from_fn(256, 256, |x, _| x as f64);
        let a = AnnotatedImage::without_masks(image.clone(), vec![]);
        let (out, rec) = resize_and_pad(&a, 768, false).unwrap();
        assert_eq!(rec.scale, 1.0);
        assert_eq!(out.image.get(100, 100), image.get(100, 100));
        assert_eq!(out.image.get(500, 100), 0.0);

        let (up, rec) = resize_and_pad(&a, 768, true).unwrap();
        assert_eq!(rec.scale, 3.0);
        assert_eq!(up.image.width(), 768);
        assert!(up.image.get(500, 100) != 0.0);
    }

    #[test]
    fn resize_inverse_restores_boxes() {
        let a = demo_image();
        let (out, rec) = resize_and_pad(&a, 48, false).unwrap();
        let (b, _) = out.boxes[0];
        let back = rec.unmap_box(&b).unwrap();
        let orig = a.boxes[0].0;
        assert!((back.x1() - orig.x1()).abs() < 1e-6);
        assert!((back.y2() - orig.y2()).abs() < 1e-6);
    }

    #[test]
    fn flip_is_an_involution() {
        let a = demo_image();
        for axis in [FlipAxis::Horizontal, FlipAxis::Vertical] {
            let twice = flip(&flip(&a, axis), axis);
            assert_eq!(twice.image, a.image);
            assert_eq!(twice.boxes, a.boxes);
            assert_eq!(twice.masks, a.masks);
        }
    }

    #[test]
    fn horizontal_flip_box_formula() {
        let image = GrayImage::<f64>::zeros(100, 100);
        let a = AnnotatedImage::without_masks(
            image,
            vec![(BBox::new(10.0, 20.0, 30.0, 40.0).unwrap(), 0)],
        );
        let flipped = flip(&a, FlipAxis::Horizontal);
        assert_eq!(
            flipped.boxes[0].0,
            BBox::new(70.0, 20.0, 90.0, 40.0).unwrap()
        );
    }

    #[test]
    fn symmetric_image_unchanged_by_flip() {
        let image = GrayImage::from_fn(11, 7, |x, _| (x as i64 - 5).unsigned_abs() as f64);
        let a = AnnotatedImage::without_masks(image.clone(), vec![]);
        assert_eq!(flip(&a, FlipAxis::Horizontal).image, image);
    }

    #[test]
    fn flip_keeps_mask_box_agreement() {
        let a = demo_image();
        let flipped = flip(&a, FlipAxis::Horizontal);
        let mask = &flipped.masks.as_ref().unwrap()[0];
        let regions = crate::mask::trace_regions(mask);
        assert_eq!(regions.len(), 1);
        assert_eq!(regions[0].bbox::<f64>(), flipped.boxes[0].0);
    }
}
