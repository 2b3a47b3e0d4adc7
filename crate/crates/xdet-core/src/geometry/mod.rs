//! Box geometry: IoU, encodings, anchor grids, NMS, proposal selection.

mod anchors;
mod bbox;
mod encoding;
mod nms;
mod proposals;

pub use anchors::{generate_anchors, Anchor, AnchorConfig, AnchorSet};
pub use bbox::{iou, BBox};
pub use encoding::{decode_box, encode_box, BoxEncoding, EncodingVariant};
pub use nms::{nms, nms_indices};
pub use proposals::{select_proposals, ProposalConfig};
