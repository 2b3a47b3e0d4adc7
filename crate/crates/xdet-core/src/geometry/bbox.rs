use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned rectangle in continuous image coordinates.
///
/// Origin is top-left, y grows downward, and the covered region is
/// half-open: `[x1, x2) × [y1, y2)`. The half-open convention makes
/// pixel-counting oracles exact for integer-coordinate boxes.
///
/// The constructor enforces `x2 > x1`, `y2 > y1` and finite coordinates,
/// so every `BBox` has positive area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox<T> {
    x1: T,
    y1: T,
    x2: T,
    y2: T,
}

impl<T: Real> BBox<T> {
    pub fn new(x1: T, y1: T, x2: T, y2: T) -> Result<Self> {
        let finite = x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite();
        if !finite || x2 <= x1 || y2 <= y1 {
            return Err(Error::DegenerateBox {
                x1: x1.to_f64_lossy(),
                y1: y1.to_f64_lossy(),
                x2: x2.to_f64_lossy(),
                y2: y2.to_f64_lossy(),
            });
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    pub fn from_center_size(cx: T, cy: T, width: T, height: T) -> Result<Self> {
        let two = T::from_f64_lossy(2.0);
        Self::new(
            cx - width / two,
            cy - height / two,
            cx + width / two,
            cy + height / two,
        )
    }

    pub fn x1(&self) -> T {
        self.x1
    }
    pub fn y1(&self) -> T {
        self.y1
    }
    pub fn x2(&self) -> T {
        self.x2
    }
    pub fn y2(&self) -> T {
        self.y2
    }

    pub fn width(&self) -> T {
        self.x2 - self.x1
    }

    pub fn height(&self) -> T {
        self.y2 - self.y1
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> (T, T) {
        let two = T::from_f64_lossy(2.0);
        ((self.x1 + self.x2) / two, (self.y1 + self.y2) / two)
    }

    /// Intersection area with `other`; zero when disjoint.
    pub fn intersection_area(&self, other: &Self) -> T {
        let ix = (self.x2.min(other.x2) - self.x1.max(other.x1)).max(T::zero());
        let iy = (self.y2.min(other.y2) - self.y1.max(other.y1)).max(T::zero());
        ix * iy
    }

    /// Intersection over union with `other`.
    pub fn iou(&self, other: &Self) -> T {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        inter / union
    }

    /// Clip to the region `[0, width] × [0, height]`.
    ///
    /// Returns `None` when nothing with positive area remains.
    pub fn clip_to(&self, width: T, height: T) -> Option<Self> {
        let x1 = self.x1.max(T::zero());
        let y1 = self.y1.max(T::zero());
        let x2 = self.x2.min(width);
        let y2 = self.y2.min(height);
        Self::new(x1, y1, x2, y2).ok()
    }

    /// Clip to an arbitrary window given as a box.
    pub fn clip_to_box(&self, window: &Self) -> Option<Self> {
        Self::new(
            self.x1.max(window.x1),
            self.y1.max(window.y1),
            self.x2.min(window.x2),
            self.y2.min(window.y2),
        )
        .ok()
    }

    pub fn translate(&self, dx: T, dy: T) -> Result<Self> {
        Self::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    pub fn scale(&self, factor: T) -> Result<Self> {
        Self::new(
            self.x1 * factor,
            self.y1 * factor,
            self.x2 * factor,
            self.y2 * factor,
        )
    }
}

/// Intersection over union of two boxes (symmetric, in `[0, 1]`).
pub fn iou<T: Real>(a: &BBox<T>, b: &BBox<T>) -> T {
    a.iou(b)
}
