use std::fs;
use std::path::Path;

use anyhow::Context;

use xdet_core::imaging::{synth_dataset, write_gray_png_u8, SynthSpec};

use crate::formats::{write_ground_truth, write_mask, GroundTruthRecord};
use crate::CmdResult;

/// Generate a synthetic defect dataset on disk: 8-bit PNG images, a
/// normalized ground-truth file, and RLE mask sidecars. Byte-identical
/// for the same `n` and `seed`.
pub fn cmd_synth(n: usize, seed: u64, out_dir: &Path) -> CmdResult<()> {
    let images_dir = out_dir.join("images");
    let masks_dir = out_dir.join("masks");
    fs::create_dir_all(&images_dir)
        .with_context(|| format!("creating {}", images_dir.display()))?;
    fs::create_dir_all(&masks_dir).with_context(|| format!("creating {}", masks_dir.display()))?;

    let spec = SynthSpec::default();
    let dataset = synth_dataset::<f64>(n, &spec, seed);

    let mut records = Vec::new();
    for (i, annotated) in dataset.iter().enumerate() {
        let image_id = format!("img{i:04}");
        write_gray_png_u8(&annotated.image, images_dir.join(format!("{image_id}.png")))
            .map_err(anyhow::Error::from)?;
        let masks = annotated.masks.as_ref().expect("synth images carry masks");
        for (k, ((bbox, class_id), mask)) in annotated.boxes.iter().zip(masks).enumerate() {
            let rel = format!("masks/{image_id}_{k}.rle");
            write_mask(&out_dir.join(&rel), mask)?;
            records.push(GroundTruthRecord {
                image_id: image_id.clone(),
                class_id: *class_id,
                x1: bbox.x1(),
                y1: bbox.y1(),
                x2: bbox.x2(),
                y2: bbox.y2(),
                mask: Some(rel),
            });
        }
    }
    write_ground_truth(&out_dir.join("gt.csv"), &records)?;
    eprintln!(
        "wrote {} image(s) with {} annotation(s) to {}",
        n,
        records.len(),
        out_dir.display()
    );
    Ok(())
}
