use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};

use crate::formats::{write_ground_truth, GroundTruthRecord};
use crate::CmdResult;

/// Column layout of the source box files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ColumnOrdering {
    /// `image_index x1 y1 x2 y2`
    Xyxy,
    /// `image_index x1 x2 y1 y2` — the GDXray native layout.
    Gdxray,
}

/// Convert per-series GDXray box annotation files into the normalized
/// ground-truth format.
///
/// Every `*.txt` under `src_dir` is treated as one series: rows hold an
/// image index and four box coordinates (whitespace or comma separated)
/// in the layout named by `ordering`. Rows whose box is inverted after
/// reordering are rejected with a diagnostic and skipped; rows that do
/// not parse at all are input errors. Image ids come out as
/// `{series}_{index:04}`, so duplicate indices (several defects in one
/// image) are preserved.
pub fn cmd_ingest_gdxray(
    src_dir: &Path,
    ordering: ColumnOrdering,
    out: &Path,
) -> CmdResult<()> {
    let mut files = Vec::new();
    collect_txt_files(src_dir, &mut files)?;
    files.sort();

    let mut records = Vec::new();
    let mut rejected = 0usize;
    for file in &files {
        let series = series_name(file);
        let text =
            fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .collect();
            if fields.len() != 5 {
                return Err(anyhow!(
                    "{}:{line_no}: expected 5 columns, got {}",
                    file.display(),
                    fields.len()
                )
                .into());
            }
            let mut values = [0.0f64; 5];
            for (i, v) in values.iter_mut().enumerate() {
                *v = fields[i].parse().map_err(|e| {
                    anyhow!("{}:{line_no}: column {}: {e}", file.display(), i + 1)
                })?;
            }
            let image_index = values[0] as i64;
            let (x1, y1, x2, y2) = match ordering {
                ColumnOrdering::Xyxy => (values[1], values[2], values[3], values[4]),
                ColumnOrdering::Gdxray => (values[1], values[3], values[2], values[4]),
            };
            if x2 <= x1 || y2 <= y1 {
                log::warn!(
                    "{}:{line_no}: inverted box ({x1}, {y1}, {x2}, {y2}) after reordering; row rejected",
                    file.display()
                );
                rejected += 1;
                continue;
            }
            records.push(GroundTruthRecord {
                image_id: format!("{series}_{image_index:04}"),
                class_id: 0,
                x1,
                y1,
                x2,
                y2,
                mask: None,
            });
        }
    }

    write_ground_truth(out, &records)?;
    eprintln!(
        "ingested {} record(s) from {} file(s) ({} rejected)",
        records.len(),
        files.len(),
        rejected
    );
    Ok(())
}

fn collect_txt_files(dir: &Path, out: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_txt_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "txt") {
            out.push(path);
        }
    }
    Ok(())
}

/// GDXray ships one `ground_truth.txt` per series directory; anything
/// else is named after the series itself.
fn series_name(file: &Path) -> String {
    let stem = file
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    if stem == "ground_truth" {
        file.parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or(stem)
    } else {
        stem
    }
}
