//! Quantization-free RoI feature cropping via exact bilinear sampling.
//!
//! Coordinate conventions, stated once because off-by-half is the classic
//! bug here: feature cell `(i, j)` has its center at `(i, j)` in feature
//! coordinates, and image coordinates map to feature coordinates by plain
//! division by the feature stride — no rounding anywhere.

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::scalar::Real;

/// Dense multi-channel feature map with an image-coordinate stride.
///
/// Values are stored row-major, channel-minor: `(y·width + x)·channels + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    width: usize,
    height: usize,
    channels: usize,
    feature_stride: T,
    data: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn zeros(width: usize, height: usize, channels: usize, feature_stride: T) -> Self {
        Self {
            width,
            height,
            channels,
            feature_stride,
            data: vec![T::zero(); width * height * channels],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        feature_stride: T,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Self {
        let mut fm = Self::zeros(width, height, channels, feature_stride);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    fm.set(x, y, c, f(x, y, c));
                }
            }
        }
        fm
    }

    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn channels(&self) -> usize {
        self.channels
    }
    pub fn feature_stride(&self) -> T {
        self.feature_stride
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }
}

/// Output grid size and per-bin sampling pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlignConfig {
    pub out_h: usize,
    pub out_w: usize,
    /// Regular samples per bin axis; 2 gives the 2×2 quarter-point
    /// pattern (four samples per bin).
    pub samples_per_axis: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            out_h: 7,
            out_w: 7,
            samples_per_axis: 2,
        }
    }
}

impl AlignConfig {
    fn validate(&self) -> Result<()> {
        if self.out_h == 0 || self.out_w == 0 || self.samples_per_axis == 0 {
            return Err(Error::Config(
                "align output dims and samples per axis must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Fixed-size feature block cut from a feature map for one RoI.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiFeatures<T> {
    pub out_h: usize,
    pub out_w: usize,
    pub channels: usize,
    data: Vec<T>,
}

impl<T: Real> RoiFeatures<T> {
    pub fn get(&self, bin_y: usize, bin_x: usize, c: usize) -> T {
        self.data[(bin_y * self.out_w + bin_x) * self.channels + c]
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }
}

/// Bilinear interpolation of the four nearest cell centers.
///
/// Coordinates outside the map clamp to the border values.
pub fn bilinear_sample<T: Real>(fm: &FeatureMap<T>, x: T, y: T, c: usize) -> T {
    let max_x = T::from_usize_lossy(fm.width - 1);
    let max_y = T::from_usize_lossy(fm.height - 1);
    let x = x.max(T::zero()).min(max_x);
    let y = y.max(T::zero()).min(max_y);

    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0.to_usize().unwrap_or(0).min(fm.width - 1);
    let y0 = y0.to_usize().unwrap_or(0).min(fm.height - 1);
    let x1 = (x0 + 1).min(fm.width - 1);
    let y1 = (y0 + 1).min(fm.height - 1);

    let one = T::one();
    let v00 = fm.get(x0, y0, c);
    let v10 = fm.get(x1, y0, c);
    let v01 = fm.get(x0, y1, c);
    let v11 = fm.get(x1, y1, c);
    (one - fx) * (one - fy) * v00 + fx * (one - fy) * v10 + (one - fx) * fy * v01 + fx * fy * v11
}

/// Crop a fixed `out_h × out_w × channels` block from `fm` for an RoI
/// given in image coordinates.
///
/// The RoI maps into feature coordinates by dividing by the stride; each
/// output bin averages its regularly spaced bilinear samples (sample `k`
/// of `s` sits at fraction `(k + 0.5)/s` across the bin). The output
/// shape depends only on the config, never on the RoI size.
pub fn roi_align<T: Real>(
    fm: &FeatureMap<T>,
    roi: &BBox<T>,
    cfg: &AlignConfig,
) -> Result<RoiFeatures<T>> {
    cfg.validate()?;
    if fm.feature_stride <= T::zero() {
        return Err(Error::Config("feature stride must be positive".into()));
    }

    let fx1 = roi.x1() / fm.feature_stride;
    let fy1 = roi.y1() / fm.feature_stride;
    let fx2 = roi.x2() / fm.feature_stride;
    let fy2 = roi.y2() / fm.feature_stride;
    let bin_w = (fx2 - fx1) / T::from_usize_lossy(cfg.out_w);
    let bin_h = (fy2 - fy1) / T::from_usize_lossy(cfg.out_h);

    let s = cfg.samples_per_axis;
    let s_t = T::from_usize_lossy(s);
    let inv_count = T::one() / (s_t * s_t);
    let half = T::from_f64_lossy(0.5);

    let mut data = Vec::with_capacity(cfg.out_h * cfg.out_w * fm.channels);
    for by in 0..cfg.out_h {
        for bx in 0..cfg.out_w {
            let x_base = fx1 + bin_w * T::from_usize_lossy(bx);
            let y_base = fy1 + bin_h * T::from_usize_lossy(by);
            for c in 0..fm.channels {
                let mut acc = T::zero();
                for sy in 0..s {
                    for sx in 0..s {
                        let px = x_base + bin_w * ((T::from_usize_lossy(sx) + half) / s_t);
                        let py = y_base + bin_h * ((T::from_usize_lossy(sy) + half) / s_t);
                        acc = acc + bilinear_sample(fm, px, py, c);
                    }
                }
                data.push(acc * inv_count);
            }
        }
    }
    Ok(RoiFeatures {
        out_h: cfg.out_h,
        out_w: cfg.out_w,
        channels: fm.channels,
        data,
    })
}
