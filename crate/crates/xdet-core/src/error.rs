//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A box with non-positive width or height, or non-finite coordinates.
    #[error("degenerate box: ({x1}, {y1}, {x2}, {y2}) has no positive area")]
    DegenerateBox { x1: f64, y1: f64, x2: f64, y2: f64 },

    /// Decoding produced a non-finite or non-positive box size.
    #[error("box decode produced an invalid size: width={width}, height={height}")]
    InvalidDecode { width: f64, height: f64 },

    /// Anchor configuration with empty or non-positive scales/ratios/stride.
    #[error("invalid anchor config: {0}")]
    AnchorConfig(String),

    /// Per-anchor inputs whose lengths disagree.
    #[error("length mismatch: {what} has {got}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// An operation that requires at least one anchor.
    #[error("empty anchor set")]
    EmptyAnchorSet,

    /// Grids or masks whose dimensions disagree.
    #[error("shape mismatch: {what}: {got} vs {expected}")]
    ShapeMismatch {
        what: &'static str,
        got: String,
        expected: String,
    },

    /// Class slice index outside the mask head output.
    #[error("class index {index} out of range for {classes} classes")]
    ClassOutOfRange { index: usize, classes: usize },

    /// Invalid operation configuration (grid sizes, fractions, weights).
    #[error("invalid config: {0}")]
    Config(String),

    /// Run-length data inconsistent with its header.
    #[error("invalid RLE: {0}")]
    InvalidRle(String),

    /// Mask mode evaluation with records that carry no mask.
    #[error("missing mask on {0}")]
    MissingMask(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}
