//! End-to-end runs of the `xdet` binary: exit codes, determinism, and
//! file-format round trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xdet_cli::formats::{read_ground_truth, write_detections, DetectionRecord};

fn xdet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xdet"))
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("xdet-e2e").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn walk_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk_files(&path, out);
        } else {
            out.push(path);
        }
    }
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let dir = fresh_dir("synth-det");
    for sub in ["a", "b"] {
        let out = xdet()
            .args(["synth", "--n", "5", "--seed", "77", "--out"])
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    let mut files_a = Vec::new();
    walk_files(&dir.join("a"), &mut files_a);
    files_a.sort();
    assert!(!files_a.is_empty());
    for fa in files_a {
        let rel = fa.strip_prefix(dir.join("a")).unwrap();
        let fb = dir.join("b").join(rel);
        assert_eq!(
            fs::read(&fa).unwrap(),
            fs::read(&fb).unwrap(),
            "{} differs",
            rel.display()
        );
    }
}

#[test]
fn synth_self_match_scores_perfect_map() {
    let dir = fresh_dir("synth-eval");
    let out = xdet()
        .args(["synth", "--n", "25", "--seed", "3", "--out"])
        .arg(dir.join("ds"))
        .output()
        .unwrap();
    assert_exit(&out, 0);

    // Echo the ground truth as detections at score 1.0.
    let gt = read_ground_truth(&dir.join("ds/gt.csv")).unwrap();
    assert!(!gt.is_empty());
    let dets: Vec<DetectionRecord> = gt
        .iter()
        .map(|r| DetectionRecord {
            image_id: r.image_id.clone(),
            class_id: r.class_id,
            score: 1.0,
            x1: r.x1,
            y1: r.y1,
            x2: r.x2,
            y2: r.y2,
            mask: r.mask.clone(),
        })
        .collect();
    // Detection mask paths are relative to the detection file, so write
    // it next to gt.csv.
    write_detections(&dir.join("ds/det.jsonl"), &dets).unwrap();

    let results = dir.join("results.txt");
    let out = xdet()
        .args(["evaluate", "--gt"])
        .arg(dir.join("ds/gt.csv"))
        .arg("--det")
        .arg(dir.join("ds/det.jsonl"))
        .arg("--out-results")
        .arg(&results)
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let text = fs::read_to_string(&results).unwrap();
    assert!(text.contains("map_bbox=1.000000"), "{text}");
    assert!(text.contains("map_mask=1.000000"), "{text}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("map_bbox 1.000000"), "{stdout}");
}

#[test]
fn malformed_detection_row_exits_2_naming_the_line() {
    let dir = fresh_dir("bad-det");
    fs::write(
        dir.join("gt.csv"),
        "image_id,class_id,x1,y1,x2,y2,mask\nimg,0,0,0,10,10,\n",
    )
    .unwrap();
    fs::write(dir.join("det.jsonl"), "{\"not\": \"a detection\"}\n").unwrap();
    let out = xdet()
        .args(["evaluate", "--gt"])
        .arg(dir.join("gt.csv"))
        .arg("--det")
        .arg(dir.join("det.jsonl"))
        .output()
        .unwrap();
    assert_exit(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":1:"), "stderr must name the line: {stderr}");
}

#[test]
fn unknown_detection_image_ids_warn_but_count_as_fp() {
    let dir = fresh_dir("unknown-id");
    fs::write(
        dir.join("gt.csv"),
        "image_id,class_id,x1,y1,x2,y2,mask\nimg,0,0,0,10,10,\n",
    )
    .unwrap();
    fs::write(
        dir.join("det.jsonl"),
        concat!(
            "{\"image_id\":\"img\",\"class_id\":0,\"score\":0.9,\"x1\":0,\"y1\":0,\"x2\":10,\"y2\":10}\n",
            "{\"image_id\":\"ghost\",\"class_id\":0,\"score\":0.8,\"x1\":0,\"y1\":0,\"x2\":10,\"y2\":10}\n",
        ),
    )
    .unwrap();
    let out = xdet()
        .args(["evaluate", "--gt"])
        .arg(dir.join("gt.csv"))
        .arg("--det")
        .arg(dir.join("det.jsonl"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ghost"), "{stderr}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("fp 1"), "{stdout}");
}

#[test]
fn selfcheck_passes_and_negative_control_fails() {
    let out = xdet().arg("selfcheck").output().unwrap();
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("tolerance"), "{stdout}");
    assert!(stdout.matches("PASS").count() >= 8, "{stdout}");

    let out = xdet()
        .args(["selfcheck", "--perturb-smooth-l1"])
        .output()
        .unwrap();
    assert_exit(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("smooth-l1"), "{stderr}");
}

#[test]
fn ingest_gdxray_column_reordering_and_round_trip() {
    let dir = fresh_dir("ingest");
    let series = dir.join("src/C0001");
    fs::create_dir_all(&series).unwrap();
    // Native ordering is [index, x1, x2, y1, y2]; index 1 appears twice
    // (two defects in one image).
    fs::write(
        series.join("ground_truth.txt"),
        "1 10 30 20 40\n1 50 70 60 80\n2 5 15 5 25\n",
    )
    .unwrap();
    let out_file = dir.join("gt.csv");
    let out = xdet()
        .args(["ingest-gdxray", "--ordering", "gdxray", "--src"])
        .arg(dir.join("src"))
        .arg("--out")
        .arg(&out_file)
        .output()
        .unwrap();
    assert_exit(&out, 0);

    let records = read_ground_truth(&out_file).unwrap();
    assert_eq!(records.len(), 3);
    assert_eq!(records[0].image_id, "C0001_0001");
    assert_eq!(records[1].image_id, "C0001_0001");
    assert_eq!(
        (records[0].x1, records[0].y1, records[0].x2, records[0].y2),
        (10.0, 20.0, 30.0, 40.0)
    );

    // Round trip: write/read leaves every field intact.
    let again = dir.join("gt2.csv");
    xdet_cli::formats::write_ground_truth(&again, &records).unwrap();
    assert_eq!(read_ground_truth(&again).unwrap(), records);
}

#[test]
fn ingest_empty_series_yields_empty_output() {
    let dir = fresh_dir("ingest-empty");
    fs::create_dir_all(dir.join("src/C0002")).unwrap();
    fs::write(dir.join("src/C0002/ground_truth.txt"), "").unwrap();
    let out_file = dir.join("gt.csv");
    let out = xdet()
        .args(["ingest-gdxray", "--src"])
        .arg(dir.join("src"))
        .arg("--out")
        .arg(&out_file)
        .output()
        .unwrap();
    assert_exit(&out, 0);
    assert!(read_ground_truth(&out_file).unwrap().is_empty());
}

#[test]
fn masks_to_boxes_splits_cross_boundary_blobs() {
    let dir = fresh_dir("m2b");
    fs::create_dir_all(dir.join("masks")).unwrap();
    // 100 px wide, split into 4 tiles of 25: one blob inside tile 0, one
    // crossing the 25 px cut, and one empty mask alongside.
    let mut img = xdet_core::imaging::GrayImage::<f64>::zeros(100, 20);
    for y in 3..9 {
        for x in 2..10 {
            img.set(x, y, 255.0);
        }
        for x in 20..31 {
            img.set(x, y, 255.0);
        }
    }
    xdet_core::imaging::write_gray_png_u8(&img, dir.join("masks/w.png")).unwrap();
    let empty = xdet_core::imaging::GrayImage::<f64>::zeros(100, 20);
    xdet_core::imaging::write_gray_png_u8(&empty, dir.join("masks/zz_empty.png")).unwrap();

    let out = xdet()
        .args(["masks-to-boxes", "--tiles", "4", "--masks"])
        .arg(dir.join("masks"))
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_exit(&out, 0);

    let records = read_ground_truth(&dir.join("out/gt.csv")).unwrap();
    assert_eq!(records.len(), 3);
    let ids: Vec<&str> = records.iter().map(|r| r.image_id.as_str()).collect();
    assert_eq!(ids, vec!["w_t0", "w_t0", "w_t1"]);
    // The crossing blob is cut at x = 25: 20..25 in tile 0, 0..6 in tile 1.
    assert_eq!((records[1].x1, records[1].x2), (20.0, 25.0));
    assert_eq!((records[2].x1, records[2].x2), (0.0, 6.0));
    // Every record carries a decodable mask sidecar.
    for r in &records {
        let text = fs::read_to_string(dir.join("out").join(r.mask.as_ref().unwrap())).unwrap();
        let rle: xdet_core::mask::Rle = text.parse().unwrap();
        assert!(xdet_core::mask::decode_rle(&rle).unwrap().count_ones() > 0);
    }
}

#[test]
fn evaluate_accepts_interp_and_strict_flags() {
    let dir = fresh_dir("flags");
    fs::write(
        dir.join("gt.csv"),
        "image_id,class_id,x1,y1,x2,y2,mask\nimg,0,0,0,10,10,\n",
    )
    .unwrap();
    fs::write(
        dir.join("det.jsonl"),
        "{\"image_id\":\"img\",\"class_id\":0,\"score\":0.9,\"x1\":0,\"y1\":0,\"x2\":10,\"y2\":10}\n",
    )
    .unwrap();
    let out = xdet()
        .args([
            "evaluate",
            "--iou-thresh",
            "0.6",
            "--interp",
            "11pt",
            "--mode",
            "bbox",
            "--strict-iou",
            "--gt",
        ])
        .arg(dir.join("gt.csv"))
        .arg("--det")
        .arg(dir.join("det.jsonl"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
}

#[test]
fn evaluate_rejects_partial_masks() {
    let dir = fresh_dir("partial-mask");
    fs::write(
        dir.join("gt.csv"),
        "image_id,class_id,x1,y1,x2,y2,mask\nimg,0,0,0,10,10,\n",
    )
    .unwrap();
    fs::write(dir.join("m.rle"), "10 10\n100\n").unwrap();
    fs::write(
        dir.join("det.jsonl"),
        concat!(
            "{\"image_id\":\"img\",\"class_id\":0,\"score\":0.9,\"x1\":0,\"y1\":0,\"x2\":10,\"y2\":10,\"mask\":\"m.rle\"}\n",
            "{\"image_id\":\"img\",\"class_id\":0,\"score\":0.8,\"x1\":0,\"y1\":0,\"x2\":10,\"y2\":10}\n",
        ),
    )
    .unwrap();
    let out = xdet()
        .args(["evaluate", "--gt"])
        .arg(dir.join("gt.csv"))
        .arg("--det")
        .arg(dir.join("det.jsonl"))
        .output()
        .unwrap();
    assert_exit(&out, 2);
}
