//! Deterministic computational core for X-ray defect detection pipelines.
//!
//! The crate covers the parts of a two-stage detector that are pure
//! computation and therefore testable without trained weights:
//!
//! - **geometry** – boxes, IoU, anchor grids, box encodings, NMS and
//!   objectness-ranked proposal selection.
//! - **targets** – anchor/ground-truth matching and positive/negative
//!   RoI sampling.
//! - **losses** – smooth-L1 location loss, cross-entropy classification
//!   loss, weighted totals, and per-class mask loss, all with analytic
//!   gradients.
//! - **roi_align** – quantization-free feature cropping via bilinear
//!   sampling.
//! - **mask** – mask pasting/binarization, mask IoU, border following,
//!   and run-length serialization.
//! - **imaging** – grayscale images, resize/pad, flips, blur, noise,
//!   random crops, and a synthetic defect-image generator.
//! - **eval** – detection/ground-truth matching and per-class AP / mAP
//!   for boxes and masks.
//! - **oracle** – independent brute-force references (pixel counting,
//!   BFS flood fill, Monte-Carlo bin averages, finite differences) used
//!   by the test suites and the CLI self-check.
//!
//! All numeric entry points are generic over the scalar type through
//! [`Real`]; `f32` and `f64` are supported. Concrete aliases for the
//! common types live at the crate root.

pub mod error;
pub mod eval;
pub mod geometry;
pub mod imaging;
pub mod losses;
pub mod mask;
pub mod oracle;
pub mod roi_align;
pub mod scalar;
pub mod targets;

pub use error::{Error, Result};
pub use scalar::Real;

pub use geometry::{
    generate_anchors, iou, nms, select_proposals, Anchor, AnchorConfig, AnchorSet, BBox,
    BoxEncoding, EncodingVariant,
};
pub use losses::{LossValue, LossWeights};
pub use targets::{AnchorLabel, MatchConfig, MatchResult};

/// `f32` bounding box.
pub type BBox32 = BBox<f32>;
/// `f64` bounding box.
pub type BBox64 = BBox<f64>;
/// `f32` feature map.
pub type FeatureMap32 = roi_align::FeatureMap<f32>;
/// `f64` feature map.
pub type FeatureMap64 = roi_align::FeatureMap<f64>;
/// `f32` grayscale image.
pub type GrayImage32 = imaging::GrayImage<f32>;
/// `f64` grayscale image.
pub type GrayImage64 = imaging::GrayImage<f64>;
/// `f32` floating-point mask.
pub type FloatMask32 = mask::FloatMask<f32>;
/// `f64` floating-point mask.
pub type FloatMask64 = mask::FloatMask<f64>;
