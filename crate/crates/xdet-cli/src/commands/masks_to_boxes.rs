use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use xdet_core::imaging::read_gray_png;
use xdet_core::mask::{trace_regions, BinaryMask};

use crate::formats::{write_ground_truth, write_mask, GroundTruthRecord};
use crate::CmdResult;

/// Convert full-image segmentation masks into box + mask annotations.
///
/// Each `*.png` in `mask_dir` (nonzero pixels are foreground) is split
/// horizontally into `tiles` near-equal strips (the welds workflow cuts
/// its very wide radiographs into eight) and every connected shape per
/// strip becomes one record: a tight bounding box plus an RLE sidecar of
/// the region pixels in tile coordinates. A shape crossing a cut line
/// yields one record in each strip.
pub fn cmd_masks_to_boxes(mask_dir: &Path, tiles: usize, out_dir: &Path) -> CmdResult<()> {
    let mut files: Vec<PathBuf> = fs::read_dir(mask_dir)
        .with_context(|| format!("listing {}", mask_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    files.sort();

    let masks_out = out_dir.join("masks");
    fs::create_dir_all(&masks_out).with_context(|| format!("creating {}", masks_out.display()))?;

    let mut records = Vec::new();
    for file in &files {
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_default();
        let img = read_gray_png::<f64>(file).map_err(anyhow::Error::from)?;
        let mut full = BinaryMask::new(img.width(), img.height());
        for y in 0..img.height() {
            for x in 0..img.width() {
                if img.get(x, y) > 0.0 {
                    full.set(x, y, 1);
                }
            }
        }
        for (t, tile) in full.split_horizontal(tiles.max(1)).into_iter().enumerate() {
            let image_id = format!("{stem}_t{t}");
            for (k, region) in trace_regions(&tile).into_iter().enumerate() {
                let rel = format!("masks/{image_id}_{k}.rle");
                // The sidecar carries the region in tile coordinates so it
                // overlays the tile image directly.
                let mut tile_mask = BinaryMask::new(tile.width(), tile.height());
                for &(x, y) in &region.pixels {
                    tile_mask.set(x, y, 1);
                }
                write_mask(&out_dir.join(&rel), &tile_mask)?;
                let (x1, y1, x2, y2) = region.bounds();
                records.push(GroundTruthRecord {
                    image_id: image_id.clone(),
                    class_id: 0,
                    x1: x1 as f64,
                    y1: y1 as f64,
                    x2: x2 as f64,
                    y2: y2 as f64,
                    mask: Some(rel),
                });
            }
        }
    }

    write_ground_truth(&out_dir.join("gt.csv"), &records)?;
    eprintln!(
        "traced {} annotation(s) from {} mask(s) into {}",
        records.len(),
        files.len(),
        out_dir.display()
    );
    Ok(())
}
