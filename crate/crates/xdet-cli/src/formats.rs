//! Normalized on-disk record formats.
//!
//! Ground truth is comma-separated text with a header; detections are
//! JSON lines. Both may reference run-length mask sidecars (the format
//! in `xdet_core::mask::Rle`) by path relative to the record file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use xdet_core::eval::{Detection, GroundTruth};
use xdet_core::geometry::BBox;
use xdet_core::mask::{decode_rle, encode_rle, BinaryMask, Rle};

pub const GT_HEADER: &str = "image_id,class_id,x1,y1,x2,y2,mask";

/// One ground-truth file row.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRecord {
    pub image_id: String,
    pub class_id: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    /// Path of an RLE mask sidecar, relative to the ground-truth file.
    pub mask: Option<String>,
}

/// One detection file row (JSON lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class_id: u32,
    pub score: f64,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
}

fn parse_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("{}:{line}: {msg}", path.display())
}

pub fn read_ground_truth(path: &Path) -> anyhow::Result<Vec<GroundTruthRecord>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading ground truth {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == GT_HEADER => {}
        Some((_, header)) => {
            return Err(parse_err(path, 1, format!("bad header {header:?}, expected {GT_HEADER:?}")))
        }
        None => return Ok(Vec::new()),
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 && fields.len() != 7 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected 6 or 7 comma-separated fields, got {}", fields.len()),
            ));
        }
        let image_id = fields[0].trim().to_string();
        if image_id.is_empty() {
            return Err(parse_err(path, line_no, "empty image_id"));
        }
        let class_id: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|e| parse_err(path, line_no, format!("class_id: {e}")))?;
        let mut coords = [0.0f64; 4];
        for (i, c) in coords.iter_mut().enumerate() {
            *c = fields[2 + i]
                .trim()
                .parse()
                .map_err(|e| parse_err(path, line_no, format!("coordinate {}: {e}", i + 2)))?;
        }
        BBox::new(coords[0], coords[1], coords[2], coords[3])
            .map_err(|e| parse_err(path, line_no, e))?;
        let mask = fields
            .get(6)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        records.push(GroundTruthRecord {
            image_id,
            class_id,
            x1: coords[0],
            y1: coords[1],
            x2: coords[2],
            y2: coords[3],
            mask,
        });
    }
    Ok(records)
}

pub fn write_ground_truth(path: &Path, records: &[GroundTruthRecord]) -> anyhow::Result<()> {
    let mut out = String::from(GT_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.image_id,
            r.class_id,
            r.x1,
            r.y1,
            r.x2,
            r.y2,
            r.mask.as_deref().unwrap_or("")
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_detections(path: &Path) -> anyhow::Result<Vec<DetectionRecord>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading detections {}", path.display()))?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DetectionRecord = serde_json::from_str(line)
            .map_err(|e| parse_err(path, line_no, e))?;
        if !(0.0..=1.0).contains(&rec.score) {
            return Err(parse_err(
                path,
                line_no,
                format!("score {} outside [0, 1]", rec.score),
            ));
        }
        BBox::new(rec.x1, rec.y1, rec.x2, rec.y2).map_err(|e| parse_err(path, line_no, e))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_detections(path: &Path, records: &[DetectionRecord]) -> anyhow::Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for r in records {
        serde_json::to_writer(&mut file, r)?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

fn load_mask(base: &Path, rel: &str) -> anyhow::Result<BinaryMask> {
    let path = base.join(rel);
    let text =
        fs::read_to_string(&path).with_context(|| format!("reading mask {}", path.display()))?;
    let rle: Rle = text
        .parse()
        .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    decode_rle(&rle).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Write a mask sidecar and return the path that was written.
pub fn write_mask(path: &Path, mask: &BinaryMask) -> anyhow::Result<()> {
    fs::write(path, encode_rle(mask).to_string())
        .with_context(|| format!("writing {}", path.display()))
}

/// Load ground truth into core records, resolving mask sidecars.
pub fn load_ground_truth(path: &Path) -> anyhow::Result<Vec<GroundTruth<f64>>> {
    let base = parent_dir(path);
    read_ground_truth(path)?
        .into_iter()
        .map(|r| {
            let mask = r.mask.as_deref().map(|m| load_mask(&base, m)).transpose()?;
            Ok(GroundTruth {
                image_id: r.image_id,
                class_id: r.class_id,
                bbox: BBox::new(r.x1, r.y1, r.x2, r.y2).expect("validated on read"),
                mask,
            })
        })
        .collect()
}

/// Load detections into core records, resolving mask sidecars.
pub fn load_detections(path: &Path) -> anyhow::Result<Vec<Detection<f64>>> {
    let base = parent_dir(path);
    read_detections(path)?
        .into_iter()
        .map(|r| {
            let mask = r.mask.as_deref().map(|m| load_mask(&base, m)).transpose()?;
            Ok(Detection {
                image_id: r.image_id,
                class_id: r.class_id,
                score: r.score,
                bbox: BBox::new(r.x1, r.y1, r.x2, r.y2).expect("validated on read"),
                mask,
            })
        })
        .collect()
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("xdet-formats").join(name);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn ground_truth_round_trip_field_for_field() {
        let dir = tmp_dir("gt-rt");
        let path = dir.join("gt.csv");
        let records = vec![
            GroundTruthRecord {
                image_id: "a0".into(),
                class_id: 0,
                x1: 1.5,
                y1: 2.0,
                x2: 10.0,
                y2: 12.25,
                mask: Some("masks/a0_0.rle".into()),
            },
            GroundTruthRecord {
                image_id: "a0".into(),
                class_id: 1,
                x1: 20.0,
                y1: 20.0,
                x2: 30.0,
                y2: 30.0,
                mask: None,
            },
        ];
        write_ground_truth(&path, &records).unwrap();
        assert_eq!(read_ground_truth(&path).unwrap(), records);
    }

    #[test]
    fn malformed_gt_row_names_the_line() {
        let dir = tmp_dir("gt-bad");
        let path = dir.join("gt.csv");
        fs::write(&path, format!("{GT_HEADER}\nimg,0,1,2,3,4,\nimg,0,not_a_number,2,3,4,\n"))
            .unwrap();
        let err = read_ground_truth(&path).unwrap_err().to_string();
        assert!(err.contains(":3:"), "missing line number: {err}");
    }

    #[test]
    fn inverted_gt_box_is_rejected() {
        let dir = tmp_dir("gt-inv");
        let path = dir.join("gt.csv");
        fs::write(&path, format!("{GT_HEADER}\nimg,0,10,2,3,4,\n")).unwrap();
        assert!(read_ground_truth(&path).is_err());
    }

    #[test]
    fn detections_round_trip_and_score_validation() {
        let dir = tmp_dir("det-rt");
        let path = dir.join("det.jsonl");
        let records = vec![DetectionRecord {
            image_id: "a0".into(),
            class_id: 0,
            score: 0.75,
            x1: 0.0,
            y1: 0.0,
            x2: 5.0,
            y2: 5.0,
            mask: None,
        }];
        write_detections(&path, &records).unwrap();
        assert_eq!(read_detections(&path).unwrap(), records);

        fs::write(
            &path,
            "{\"image_id\":\"a\",\"class_id\":0,\"score\":1.5,\"x1\":0,\"y1\":0,\"x2\":1,\"y2\":1}\n",
        )
        .unwrap();
        let err = read_detections(&path).unwrap_err().to_string();
        assert!(err.contains(":1:"), "{err}");
    }

    #[test]
    fn mask_sidecars_resolve_relative_to_the_record_file() {
        let dir = tmp_dir("gt-mask");
        fs::create_dir_all(dir.join("masks")).unwrap();
        let mut mask = BinaryMask::new(4, 3);
        mask.set(1, 1, 1);
        write_mask(&dir.join("masks/m.rle"), &mask).unwrap();
        let path = dir.join("gt.csv");
        fs::write(&path, format!("{GT_HEADER}\nimg,0,0,0,4,3,masks/m.rle\n")).unwrap();
        let loaded = load_ground_truth(&path).unwrap();
        assert_eq!(loaded[0].mask.as_ref().unwrap(), &mask);
    }
}
