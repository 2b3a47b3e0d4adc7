use crate::error::{Error, Result};
use crate::geometry::{Anchor, BBox};
use crate::scalar::Real;

/// Which box-encoding formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EncodingVariant {
    /// `[x_c/w_a, y_c/h_a, log w, log h]` — the bare center/size form.
    PaperLiteral,
    /// `[(x_c−x_a)/w_a, (y_c−y_a)/h_a, log(w/w_a), log(h/h_a)]` — the
    /// anchor-conditioned form used by the standard two-stage detectors;
    /// decoding is meaningful relative to the anchor, so this is the
    /// default.
    #[default]
    AnchorRelative,
}

/// Four-vector encoding of a box with respect to an anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxEncoding<T> {
    pub values: [T; 4],
    pub variant: EncodingVariant,
}

impl<T: Real> BoxEncoding<T> {
    pub fn new(values: [T; 4], variant: EncodingVariant) -> Self {
        Self { values, variant }
    }

    pub fn zero(variant: EncodingVariant) -> Self {
        Self {
            values: [T::zero(); 4],
            variant,
        }
    }
}

/// Encode box `b` with respect to anchor `a`.
pub fn encode_box<T: Real>(b: &BBox<T>, a: &Anchor<T>, variant: EncodingVariant) -> BoxEncoding<T> {
    let (xc, yc) = b.center();
    let (w, h) = (b.width(), b.height());
    let (xa, ya) = a.bbox.center();
    let (wa, ha) = (a.bbox.width(), a.bbox.height());
    let values = match variant {
        EncodingVariant::PaperLiteral => [xc / wa, yc / ha, w.ln(), h.ln()],
        EncodingVariant::AnchorRelative => {
            [(xc - xa) / wa, (yc - ya) / ha, (w / wa).ln(), (h / ha).ln()]
        }
    };
    BoxEncoding { values, variant }
}

/// Invert [`encode_box`] for the encoding's variant.
pub fn decode_box<T: Real>(t: &BoxEncoding<T>, a: &Anchor<T>) -> Result<BBox<T>> {
    let (xa, ya) = a.bbox.center();
    let (wa, ha) = (a.bbox.width(), a.bbox.height());
    let [tx, ty, tw, th] = t.values;
    let (xc, yc, w, h) = match t.variant {
        EncodingVariant::PaperLiteral => (tx * wa, ty * ha, tw.exp(), th.exp()),
        EncodingVariant::AnchorRelative => (xa + tx * wa, ya + ty * ha, wa * tw.exp(), ha * th.exp()),
    };
    if !w.is_finite() || !h.is_finite() || w <= T::zero() || h <= T::zero() {
        return Err(Error::InvalidDecode {
            width: w.to_f64_lossy(),
            height: h.to_f64_lossy(),
        });
    }
    BBox::from_center_size(xc, yc, w, h)
}
