//! File-format round trips and the error each corruption must produce.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;

use mvaug::geometry::rodrigues_to_rotation;
use mvaug::io::{self, AnnotationRecord, DetectionRecord, ProjectionRecord, ToolConfig};
use mvaug::rng::{self, AugRng};
use mvaug::{CameraCalibration, Error, Homography, ImageBuffer};

use super::checks::Check;

fn rng(tag: u64) -> AugRng {
    rng::stream(0xf0a7, &[tag])
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn all_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| rel_close(*x, *y))
}

fn tmp() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| e.to_string())
}

pub fn grid_raster_bit_exact() -> Result<(), String> {
    let dir = tmp()?;
    let mut r = rng(1);
    for (w, h, c) in [(1, 1, 1), (90, 40, 1), (7, 5, 3)] {
        let mut data: Vec<f32> = (0..w * h * c).map(|_| r.random_range(-1e6..1e6)).collect();
        // awkward values must survive too
        data[0] = -0.0;
        if data.len() > 2 {
            data[1] = f32::MIN_POSITIVE / 8.0;
            data[2] = f32::MAX;
        }
        let img = ImageBuffer::from_vec(w, h, c, data).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("r{w}x{h}x{c}.mvgrid"));
        io::save_grid_raster(&path, &img).map_err(|e| e.to_string())?;
        let len = std::fs::metadata(&path).map_err(|e| e.to_string())?.len() as usize;
        ensure!(len == 20 + 4 * w * h * c, "file is {len} bytes");
        let back = io::load_grid_raster(&path).map_err(|e| e.to_string())?;
        ensure!((back.width(), back.height(), back.channels()) == (w, h, c), "shape changed");
        let same = img.data().iter().zip(back.data()).all(|(a, b)| a.to_bits() == b.to_bits());
        ensure!(same, "{w}x{h}x{c} raster changed bits");
    }
    Ok(())
}

fn random_calibration(r: &mut AugRng) -> CameraCalibration {
    let k = [
        [r.random_range(50.0..2000.0), r.random_range(-1.0..1.0), r.random_range(0.0..960.0)],
        [0.0, r.random_range(50.0..2000.0), r.random_range(0.0..540.0)],
        [0.0, 0.0, 1.0],
    ];
    let rot = rodrigues_to_rotation([r.random_range(-3.0..3.0), r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)]);
    let t = [r.random_range(-50.0..50.0), r.random_range(-50.0..50.0), r.random_range(-50.0..50.0)];
    CameraCalibration::new(k, rot, t).expect("valid calibration")
}

fn flat(c: &CameraCalibration) -> Vec<f64> {
    c.k().iter().chain(c.r().iter()).flatten().chain(c.t()).copied().collect()
}

pub fn calibration_round_trip() -> Result<(), String> {
    let dir = tmp()?;
    let mut r = rng(2);
    for i in 0..20 {
        let cal = random_calibration(&mut r);
        let path = dir.path().join(format!("cal{i}.json"));
        io::save_calibration(&path, &cal).map_err(|e| e.to_string())?;
        let back = io::load_calibration(&path).map_err(|e| e.to_string())?;
        ensure!(all_close(&flat(&cal), &flat(&back)), "calibration {i} drifted");
    }
    Ok(())
}

pub fn annotation_round_trip() -> Result<(), String> {
    let dir = tmp()?;
    let mut r = rng(3);
    let records: Vec<AnnotationRecord> = (0..50)
        .map(|i| AnnotationRecord {
            frame: i / 5,
            id: i,
            world: [r.random_range(-40.0..40.0), r.random_range(-40.0..40.0)],
            views: (0..r.random_range(0..4usize))
                .map(|v| (v.to_string(), [r.random_range(0.0..960.0), r.random_range(0.0..540.0)]))
                .collect::<BTreeMap<_, _>>(),
        })
        .collect();
    let path = dir.path().join("a.jsonl");
    io::save_annotations(&path, &records).map_err(|e| e.to_string())?;
    let back = io::load_annotations(&path).map_err(|e| e.to_string())?;
    ensure!(back.len() == records.len(), "{} records came back", back.len());
    for (a, b) in records.iter().zip(&back) {
        ensure!(a.frame == b.frame && a.id == b.id && a.views.keys().eq(b.views.keys()), "record {} changed", a.id);
        ensure!(all_close(&a.world, &b.world), "world of {} drifted", a.id);
        for (pa, pb) in a.views.values().zip(b.views.values()) {
            ensure!(all_close(pa, pb), "pixel of {} drifted", a.id);
        }
    }
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").map_err(|e| e.to_string())?;
    ensure!(io::load_annotations(&empty).map_err(|e| e.to_string())?.is_empty(), "empty file gave records");
    Ok(())
}

pub fn detection_round_trip() -> Result<(), String> {
    let dir = tmp()?;
    let mut r = rng(4);
    let recs: Vec<DetectionRecord> = (0..40)
        .map(|i| DetectionRecord {
            frame: i / 4,
            cell: [r.random_range(0.0..89.0), r.random_range(0.0..39.0)],
            world: [r.random_range(0.0..36.0), r.random_range(0.0..16.0)],
            score: r.random(),
        })
        .collect();
    let path = dir.path().join("d.jsonl");
    let body: String = recs.iter().map(|d| serde_json::to_string(d).expect("serializes") + "\n").collect();
    io::write_atomic(&path, body.as_bytes()).map_err(|e| e.to_string())?;
    let back = io::load_detections(&path).map_err(|e| e.to_string())?;
    ensure!(back.len() == recs.len(), "{} detections came back", back.len());
    for (a, b) in recs.iter().zip(&back) {
        let fa: Vec<f64> = a.cell.iter().chain(&a.world).chain([&a.score]).copied().collect();
        let fb: Vec<f64> = b.cell.iter().chain(&b.world).chain([&b.score]).copied().collect();
        ensure!(a.frame == b.frame && all_close(&fa, &fb), "detection drifted: {a:?} vs {b:?}");
    }
    Ok(())
}

pub fn projection_and_config_round_trip() -> Result<(), String> {
    let dir = tmp()?;
    let mut r = rng(5);
    let recs: Vec<ProjectionRecord> = (0..8)
        .map(|i| {
            let m = [
                [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-100.0..100.0)],
                [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0), r.random_range(-100.0..100.0)],
                [r.random_range(-0.01..0.01), r.random_range(-0.01..0.01), r.random_range(0.5..2.0)],
            ];
            ProjectionRecord {
                frame: i / 4,
                view: (i % 4) as usize,
                t_grid: Homography::new(m).expect("finite"),
            }
        })
        .collect();
    let path = dir.path().join("p.jsonl");
    io::save_projections(&path, &recs).map_err(|e| e.to_string())?;
    let back = io::load_projections(&path).map_err(|e| e.to_string())?;
    for (a, b) in recs.iter().zip(&back) {
        ensure!(all_close(&a.t_grid.to_array(), &b.t_grid.to_array()), "projection drifted");
    }
    let cfg_path = dir.path().join("cfg.json");
    let cfg = ToolConfig {
        seed: 42,
        ..ToolConfig::default()
    };
    io::save_tool_config(&cfg_path, &cfg).map_err(|e| e.to_string())?;
    ensure!(io::load_tool_config(&cfg_path).map_err(|e| e.to_string())? == cfg, "config changed");
    Ok(())
}

fn expect_err<T: std::fmt::Debug>(what: &str, r: Result<T, Error>, ok: impl Fn(&Error) -> bool) -> Result<(), String> {
    match r {
        Err(e) if ok(&e) => Ok(()),
        Err(e) => Err(format!("{what}: wrong error {e:?}")),
        Ok(v) => Err(format!("{what}: accepted, got {v:?}")),
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<std::path::PathBuf, String> {
    let p = dir.join(name);
    std::fs::write(&p, bytes).map_err(|e| e.to_string())?;
    Ok(p)
}

pub fn corrupted_inputs_report_documented_errors() -> Result<(), String> {
    let dir = tmp()?;
    let d = dir.path();
    let img = ImageBuffer::from_fn(4, 3, |x, y| (x + y) as f32);
    let good = io::encode_grid_raster(&img).map_err(|e| e.to_string())?;

    let mut bad_magic = good.clone();
    bad_magic[..8].copy_from_slice(b"MVGRID2\0");
    let p = write(d, "magic.mvgrid", &bad_magic)?;
    expect_err("wrong magic", io::load_grid_raster(&p), |e| matches!(e, Error::VersionMismatch { .. }))?;

    let p = write(d, "short.mvgrid", &good[..good.len() - 3])?;
    expect_err("truncated raster", io::load_grid_raster(&p), |e| matches!(e, Error::Parse { .. }))?;

    let mut nan = good.clone();
    nan[20..24].copy_from_slice(&f32::NAN.to_le_bytes());
    let p = write(d, "nan.mvgrid", &nan)?;
    expect_err("NaN sample", io::load_grid_raster(&p), |e| matches!(e, Error::Parse { .. }))?;

    expect_err("empty raster", io::encode_grid_raster(&ImageBuffer::new(0, 0, 1)), |e| matches!(e, Error::InvalidArgument(_)))?;
    let mut empty = b"MVGRID1\0".to_vec();
    empty.extend_from_slice(&[0; 12]);
    let p = write(d, "empty.mvgrid", &empty)?;
    expect_err("0x0 raster file", io::load_grid_raster(&p), |e| matches!(e, Error::Parse { .. }))?;

    let p = write(d, "cal.json", br#"{"K": [1, 0, 0, 0, 1, 0, 0, 0, 1], "R": [1, 0, 0"#)?;
    expect_err("truncated calibration", io::load_calibration(&p), |e| matches!(e, Error::Parse { .. }))?;
    let p = write(d, "skew.json", br#"{"K": [1, 0, 0, 0, 1, 0, 0, 0, 1], "R": [1, 0.1, 0, 0, 1, 0, 0, 0, 1], "t": [0, 0, 1]}"#)?;
    expect_err("non-rotation R", io::load_calibration(&p), |e| matches!(e, Error::InvalidCalibration(_)))?;

    let lines = "{\"frame\": 0, \"id\": 0, \"world\": [1, 2]}\n{\"frame\": 0, \"id\": 1, \"world\": [1,";
    let p = write(d, "ann.jsonl", lines.as_bytes())?;
    expect_err("truncated annotations", io::load_annotations(&p), |e| matches!(e, Error::Parse { line: Some(2), .. }))?;
    let p = write(d, "inf.jsonl", b"{\"frame\": 0, \"id\": 0, \"world\": [1e999, 2]}\n")?;
    expect_err("overflowing number", io::load_annotations(&p), |e| matches!(e, Error::Parse { line: Some(1), .. }))?;
    let p = write(d, "nan.jsonl", b"{\"frame\": 0, \"cell\": [1, 2], \"world\": [NaN, 0], \"score\": 0.5}\n")?;
    expect_err("NaN detection", io::load_detections(&p), |e| matches!(e, Error::Parse { .. }))?;

    expect_err("missing file", io::load_annotations(d.join("nope.jsonl")), |e| matches!(e, Error::Io { .. }))?;
    Ok(())
}

pub fn format_checks() -> Vec<(&'static str, Check)> {
    vec![
        ("grid_raster_bit_exact", grid_raster_bit_exact),
        ("calibration_round_trip", calibration_round_trip),
        ("annotation_round_trip", annotation_round_trip),
        ("detection_round_trip", detection_round_trip),
        ("projection_and_config_round_trip", projection_and_config_round_trip),
        ("corrupted_inputs_report_documented_errors", corrupted_inputs_report_documented_errors),
    ]
}
