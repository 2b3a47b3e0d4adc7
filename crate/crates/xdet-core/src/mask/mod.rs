//! Mask post-processing: pasting/binarization, mask IoU, border
//! following, and run-length serialization.

mod rle;
mod trace;

pub use rle::{decode_rle, encode_rle, Rle};
pub use trace::{masks_to_annotations, trace_regions, Region};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::scalar::Real;

/// Which coordinate frame a binary mask lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaskFrame {
    #[default]
    Image,
    Roi,
}

/// Dense binary mask; values are strictly 0 or 1, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    frame: MaskFrame,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self::with_frame(width, height, MaskFrame::Image)
    }

    pub fn with_frame(width: usize, height: usize, frame: MaskFrame) -> Self {
        Self {
            width,
            height,
            frame,
            data: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn frame(&self) -> MaskFrame {
        self.frame
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Any nonzero value is stored as 1.
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = u8::from(v != 0);
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|v| **v != 0).count()
    }

    pub fn is_blank(&self) -> bool {
        self.data.iter().all(|v| *v == 0)
    }

    /// Foreground pixels in scanline order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |y| {
            (0..self.width).filter_map(move |x| (self.get(x, y) != 0).then_some((x, y)))
        })
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut out = Self::with_frame(self.width, self.height, self.frame);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(self.width - 1 - x, y, self.get(x, y));
            }
        }
        out
    }

    pub fn flip_vertical(&self) -> Self {
        let mut out = Self::with_frame(self.width, self.height, self.frame);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, self.height - 1 - y, self.get(x, y));
            }
        }
        out
    }

    /// Copy out the window `[x0, x0+w) × [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize, frame: MaskFrame) -> Self {
        let mut out = Self::with_frame(w, h, frame);
        for y in 0..h {
            for x in 0..w {
                if x0 + x < self.width && y0 + y < self.height {
                    out.set(x, y, self.get(x0 + x, y0 + y));
                }
            }
        }
        out
    }

    /// Split into `tiles` vertical strips of near-equal width (widths
    /// differ by at most one; leftmost strips take the remainder).
    pub fn split_horizontal(&self, tiles: usize) -> Vec<Self> {
        assert!(tiles >= 1, "tile count must be at least 1");
        let base = self.width / tiles;
        let rem = self.width % tiles;
        let mut out = Vec::with_capacity(tiles);
        let mut x0 = 0;
        for t in 0..tiles {
            let w = base + usize::from(t < rem);
            out.push(self.crop(x0, 0, w, self.height, self.frame));
            x0 += w;
        }
        out
    }
}

/// Pixel IoU of two same-sized binary masks.
///
/// Two blank masks count as identical (IoU 1); one blank against a
/// nonblank mask gives 0, consistent with the box-IoU limit.
pub fn mask_iou<T: Real>(a: &BinaryMask, b: &BinaryMask) -> Result<T> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::ShapeMismatch {
            what: "mask iou",
            got: format!("{}x{}", b.width, b.height),
            expected: format!("{}x{}", a.width, a.height),
        });
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (va, vb) in a.data.iter().zip(&b.data) {
        let fa = *va != 0;
        let fb = *vb != 0;
        inter += usize::from(fa && fb);
        union += usize::from(fa || fb);
    }
    if union == 0 {
        return Ok(T::one());
    }
    Ok(T::from_usize_lossy(inter) / T::from_usize_lossy(union))
}

/// Fixed-resolution floating-point mask with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMask<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Default mask head resolution.
pub const MASK_RESOLUTION: usize = 28;

impl<T: Real> FloatMask<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width * height])
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch {
                what: "float mask",
                got: format!("{} values", data.len()),
                expected: format!("{}x{}", width, height),
            });
        }
        if data.iter().any(|v| !(*v >= T::zero() && *v <= T::one())) {
            return Err(Error::Config("float mask values must be in [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
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

    /// Bilinear sample at continuous mask coordinates, border-clamped;
    /// cell `(i, j)` is centered at `(i, j)`.
    fn sample(&self, x: T, y: T) -> T {
        let max_x = T::from_usize_lossy(self.width - 1);
        let max_y = T::from_usize_lossy(self.height - 1);
        let x = x.max(T::zero()).min(max_x);
        let y = y.max(T::zero()).min(max_y);
        let x0f = x.floor();
        let y0f = y.floor();
        let fx = x - x0f;
        let fy = y - y0f;
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

/// Upsample a head-resolution mask to an RoI and paste it into an
/// image-frame binary mask.
///
/// The float grid is bilinearly resized to the RoI's pixel extent and
/// thresholded (strictly greater than `threshold`); pixels outside the
/// RoI, and any RoI part outside the image, stay 0.
pub fn paste_mask<T: Real>(
    m: &FloatMask<T>,
    roi: &BBox<T>,
    image_w: usize,
    image_h: usize,
    threshold: T,
) -> BinaryMask {
    let mut out = BinaryMask::new(image_w, image_h);
    let half = T::from_f64_lossy(0.5);

    // Image pixels whose centers fall inside the half-open RoI.
    let px_min = (roi.x1() - half).ceil().max(T::zero());
    let py_min = (roi.y1() - half).ceil().max(T::zero());
    let px_min = px_min.to_usize().unwrap_or(0);
    let py_min = py_min.to_usize().unwrap_or(0);

    let mw = T::from_usize_lossy(m.width());
    let mh = T::from_usize_lossy(m.height());

    for py in py_min..image_h {
        let cy = T::from_usize_lossy(py) + half;
        if cy >= roi.y2() {
            break;
        }
        for px in px_min..image_w {
            let cx = T::from_usize_lossy(px) + half;
            if cx >= roi.x2() {
                break;
            }
            let u = (cx - roi.x1()) / roi.width() * mw - half;
            let v = (cy - roi.y1()) / roi.height() * mh - half;
            if m.sample(u, v) > threshold {
                out.set(px, py, 1);
            }
        }
    }
    out
}
