//! Detection losses with analytic gradients.
//!
//! Every loss returns a [`LossValue`]: the scalar loss plus its gradient
//! with respect to the differentiated inputs. Gradients are verified
//! against central finite differences by the test suites and the CLI
//! self-check.

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::scalar::Real;

/// Weights balancing localization and classification (Eq. 5's α and β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> Default for LossWeights<T> {
    fn default() -> Self {
        Self {
            alpha: T::one(),
            beta: T::one(),
        }
    }
}

impl<T: Real> LossWeights<T> {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < T::zero() || self.beta < T::zero() {
            return Err(Error::Config("loss weights must be nonnegative".into()));
        }
        if self.alpha == T::zero() && self.beta == T::zero() {
            return Err(Error::Config("loss weights must not both be zero".into()));
        }
        Ok(())
    }
}

/// A loss value together with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue<T> {
    pub value: T,
    pub gradient: Vec<T>,
}

impl<T: Real> LossValue<T> {
    pub fn zero(gradient_len: usize) -> Self {
        Self {
            value: T::zero(),
            gradient: vec![T::zero(); gradient_len],
        }
    }
}

/// Smooth L1: `0.5x²` for `|x| < 1`, `|x| − 0.5` otherwise.
///
/// Returns `(value, derivative)`; the derivative is `x` inside the
/// quadratic region and `sign(x)` outside, continuous at `|x| = 1`.
pub fn smooth_l1<T: Real>(x: T) -> (T, T) {
    let half = T::from_f64_lossy(0.5);
    if x.abs() < T::one() {
        (half * x * x, x)
    } else {
        (x.abs() - half, x.signum())
    }
}

/// Location loss for one anchor: `p* · Σᵢ smoothL1(targetᵢ − predᵢ)`.
///
/// The gradient is with respect to the four predicted encoding values.
/// When the anchor is not positive the loss and gradient are exactly
/// zero.
pub fn location_loss<T: Real>(pred: &[T; 4], target: &[T; 4], positive: bool) -> LossValue<T> {
    if !positive {
        return LossValue::zero(4);
    }
    let mut value = T::zero();
    let mut gradient = vec![T::zero(); 4];
    for i in 0..4 {
        let (v, d) = smooth_l1(target[i] - pred[i]);
        value = value + v;
        gradient[i] = -d;
    }
    LossValue { value, gradient }
}

/// Probability clamp applied before logarithms.
pub const PROB_EPSILON: f64 = 1e-12;

/// Binary cross-entropy of a predicted objectness probability.
///
/// The probability is clamped to `[ε, 1−ε]` with ε = 1e-12 before the
/// logarithms; the single-element gradient is evaluated at the clamped
/// point.
pub fn classification_loss<T: Real>(predicted_prob: T, positive: bool) -> LossValue<T> {
    let eps = T::from_f64_lossy(PROB_EPSILON);
    let p = predicted_prob.max(eps).min(T::one() - eps);
    let (value, grad) = if positive {
        (-(p.ln()), -(T::one() / p))
    } else {
        (-((T::one() - p).ln()), T::one() / (T::one() - p))
    };
    LossValue {
        value,
        gradient: vec![grad],
    }
}

/// Weighted total `α·L_loc + β·L_cls` for one anchor.
///
/// The gradient concatenates the weighted location gradient (4 values)
/// followed by the weighted classification gradient.
pub fn total_loss<T: Real>(
    loc: &LossValue<T>,
    cls: &LossValue<T>,
    w: &LossWeights<T>,
) -> LossValue<T> {
    let mut gradient = Vec::with_capacity(loc.gradient.len() + cls.gradient.len());
    gradient.extend(loc.gradient.iter().map(|g| w.alpha * *g));
    gradient.extend(cls.gradient.iter().map(|g| w.beta * *g));
    LossValue {
        value: w.alpha * loc.value + w.beta * cls.value,
        gradient,
    }
}

/// Arithmetic mean of per-anchor losses.
///
/// The value is the mean of the values; the gradient concatenates the
/// per-anchor gradients scaled by `1/n` (each anchor keeps its own
/// differentiated inputs).
pub fn mean_loss<T: Real>(items: &[LossValue<T>]) -> LossValue<T> {
    if items.is_empty() {
        return LossValue::zero(0);
    }
    let n = T::from_usize_lossy(items.len());
    let value = items.iter().fold(T::zero(), |acc, l| acc + l.value) / n;
    let gradient = items
        .iter()
        .flat_map(|l| l.gradient.iter().map(move |g| *g / n))
        .collect();
    LossValue { value, gradient }
}

/// Per-class mask head output: `classes` logit grids of size `h × w`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskLogits<T> {
    classes: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> MaskLogits<T> {
    pub fn zeros(classes: usize, height: usize, width: usize) -> Self {
        Self {
            classes,
            height,
            width,
            data: vec![T::zero(); classes * height * width],
        }
    }

    pub fn from_vec(classes: usize, height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != classes * height * width {
            return Err(Error::ShapeMismatch {
                what: "mask logits",
                got: format!("{} values", data.len()),
                expected: format!("{}x{}x{}", classes, height, width),
            });
        }
        Ok(Self {
            classes,
            height,
            width,
            data,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn width(&self) -> usize {
        self.width
    }

    fn index(&self, class: usize, y: usize, x: usize) -> usize {
        (class * self.height + y) * self.width + x
    }

    pub fn get(&self, class: usize, y: usize, x: usize) -> T {
        self.data[self.index(class, y, x)]
    }

    pub fn set(&mut self, class: usize, y: usize, x: usize, v: T) {
        let i = self.index(class, y, x);
        self.data[i] = v;
    }

    /// Flat gradient layout: `(class · height + y) · width + x`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Average binary cross-entropy mask loss on the ground-truth class slice.
///
/// A per-pixel sigmoid is applied to the logits of slice `roi_class`;
/// the loss is the mean BCE over that slice's cells. All other slices
/// contribute nothing: their gradient entries are exactly zero. The
/// gradient covers all `classes · h · w` logits in the layout of
/// [`MaskLogits`].
pub fn mask_loss<T: Real>(
    logits: &MaskLogits<T>,
    gt_mask: &BinaryMask,
    roi_class: usize,
) -> Result<LossValue<T>> {
    if roi_class >= logits.classes() {
        return Err(Error::ClassOutOfRange {
            index: roi_class,
            classes: logits.classes(),
        });
    }
    if gt_mask.width() != logits.width() || gt_mask.height() != logits.height() {
        return Err(Error::ShapeMismatch {
            what: "mask loss grids",
            got: format!("{}x{}", gt_mask.width(), gt_mask.height()),
            expected: format!("{}x{}", logits.width(), logits.height()),
        });
    }

    let cells = T::from_usize_lossy(logits.width() * logits.height());
    let mut value = T::zero();
    let mut gradient = vec![T::zero(); logits.len()];
    for y in 0..logits.height() {
        for x in 0..logits.width() {
            let l = logits.get(roi_class, y, x);
            let target = if gt_mask.get(x, y) != 0 {
                T::one()
            } else {
                T::zero()
            };
            // Stable BCE-with-logits: max(l,0) − l·y + ln(1 + e^{−|l|}).
            value = value + l.max(T::zero()) - l * target + (-l.abs()).exp().ln_1p();
            let sig = T::one() / (T::one() + (-l).exp());
            gradient[logits.index(roi_class, y, x)] = (sig - target) / cells;
        }
    }
    Ok(LossValue {
        value: value / cells,
        gradient,
    })
}
