use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::scalar::Real;

/// One candidate box tied to a feature-map location and shape index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor<T> {
    pub bbox: BBox<T>,
    pub scale_index: usize,
    pub aspect_index: usize,
    pub grid_x: usize,
    pub grid_y: usize,
}

impl<T: Real> Anchor<T> {
    /// Anchor not belonging to any grid (indices zeroed); handy in tests
    /// and when encoding against arbitrary reference boxes.
    pub fn detached(bbox: BBox<T>) -> Self {
        Self {
            bbox,
            scale_index: 0,
            aspect_index: 0,
            grid_x: 0,
            grid_y: 0,
        }
    }
}

/// Anchor grid parameters.
///
/// Aspect ratios are width:height quotients, so `0.5` is a 1:2 (tall) box
/// and `2.0` a 2:1 (wide) one. For ratio `r` and scale `s` the anchor is
/// `base·s·√r × base·s/√r`, which keeps the area at `(base·s)²` for every
/// ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorConfig<T> {
    pub base_size: T,
    pub scales: Vec<T>,
    pub aspect_ratios: Vec<T>,
    pub feature_stride: T,
}

impl<T: Real> Default for AnchorConfig<T> {
    /// 16 px base, scales 1/2/4/8/16 and ratios 1:1, 1:2, 2:1 — fifteen
    /// anchors per feature-map cell, the smallest 16×16 px.
    fn default() -> Self {
        let f = T::from_f64_lossy;
        Self {
            base_size: f(16.0),
            scales: vec![f(1.0), f(2.0), f(4.0), f(8.0), f(16.0)],
            aspect_ratios: vec![f(1.0), f(0.5), f(2.0)],
            feature_stride: f(16.0),
        }
    }
}

impl<T: Real> AnchorConfig<T> {
    pub fn anchors_per_cell(&self) -> usize {
        self.scales.len() * self.aspect_ratios.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scales.is_empty() {
            return Err(Error::AnchorConfig("scales must be nonempty".into()));
        }
        if self.aspect_ratios.is_empty() {
            return Err(Error::AnchorConfig("aspect ratios must be nonempty".into()));
        }
        if self.scales.iter().any(|s| *s <= T::zero() || !s.is_finite()) {
            return Err(Error::AnchorConfig("scales must be positive".into()));
        }
        if self
            .aspect_ratios
            .iter()
            .any(|r| *r <= T::zero() || !r.is_finite())
        {
            return Err(Error::AnchorConfig("aspect ratios must be positive".into()));
        }
        if self.base_size <= T::zero() || self.feature_stride <= T::zero() {
            return Err(Error::AnchorConfig(
                "base size and stride must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The full anchor grid over a feature map.
#[derive(Debug, Clone)]
pub struct AnchorSet<T> {
    anchors: Vec<Anchor<T>>,
    feat_w: usize,
    feat_h: usize,
}

impl<T: Real> AnchorSet<T> {
    pub fn anchors(&self) -> &[Anchor<T>] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn feat_w(&self) -> usize {
        self.feat_w
    }

    pub fn feat_h(&self) -> usize {
        self.feat_h
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Anchor<T>> {
        self.anchors.iter()
    }

    /// Build a set directly from anchors; used by tests that need
    /// hand-placed anchors rather than a regular grid.
    pub fn from_anchors(anchors: Vec<Anchor<T>>) -> Self {
        Self {
            anchors,
            feat_w: 0,
            feat_h: 0,
        }
    }
}

impl<'a, T> IntoIterator for &'a AnchorSet<T> {
    type Item = &'a Anchor<T>;
    type IntoIter = std::slice::Iter<'a, Anchor<T>>;
    fn into_iter(self) -> Self::IntoIter {
        self.anchors.iter()
    }
}

/// Generate the regular anchor grid for a `feat_w × feat_h` feature map.
///
/// Cell `(gx, gy)` maps to image coordinates `(gx·stride, gy·stride)` —
/// the same convention RoIAlign uses in the other direction. Anchors are
/// not clipped here; image-bound clipping happens during proposal
/// selection. The result holds exactly
/// `|scales|·|ratios|·feat_w·feat_h` anchors, ordered by cell
/// (row-major), then scale, then ratio.
pub fn generate_anchors<T: Real>(
    cfg: &AnchorConfig<T>,
    feat_w: usize,
    feat_h: usize,
) -> Result<AnchorSet<T>> {
    cfg.validate()?;
    if feat_w == 0 || feat_h == 0 {
        return Err(Error::AnchorConfig(
            "feature map dimensions must be at least 1".into(),
        ));
    }

    let shapes: Vec<(usize, usize, T, T)> = cfg
        .scales
        .iter()
        .enumerate()
        .flat_map(|(si, s)| {
            cfg.aspect_ratios.iter().enumerate().map(move |(ai, r)| {
                let side = cfg.base_size * *s;
                (si, ai, side * r.sqrt(), side / r.sqrt())
            })
        })
        .collect();

    let mut anchors = Vec::with_capacity(shapes.len() * feat_w * feat_h);
    for gy in 0..feat_h {
        for gx in 0..feat_w {
            let cx = T::from_usize_lossy(gx) * cfg.feature_stride;
            let cy = T::from_usize_lossy(gy) * cfg.feature_stride;
            for &(si, ai, w, h) in &shapes {
                anchors.push(Anchor {
                    bbox: BBox::from_center_size(cx, cy, w, h)?,
                    scale_index: si,
                    aspect_index: ai,
                    grid_x: gx,
                    grid_y: gy,
                });
            }
        }
    }
    Ok(AnchorSet {
        anchors,
        feat_w,
        feat_h,
    })
}
