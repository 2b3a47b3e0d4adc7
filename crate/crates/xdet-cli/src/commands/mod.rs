mod evaluate;
mod ingest;
mod masks_to_boxes;
mod selfcheck;
mod synth;

pub use evaluate::{cmd_evaluate, EvaluateArgs, InterpArg, ModeArg};
pub use ingest::{cmd_ingest_gdxray, ColumnOrdering};
pub use masks_to_boxes::cmd_masks_to_boxes;
pub use selfcheck::cmd_selfcheck;
pub use synth::cmd_synth;
