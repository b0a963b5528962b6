//! Writes and reads back every file format: calibrations, annotations,
//! detections, projections, and MVGRID1 ground rasters.
//!
//! Run with `cargo run --example file_formats`.

use std::collections::BTreeMap;

use mvaug::io::{self, AnnotationRecord, ProjectionRecord};
use mvaug::*;

fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("mvaug-formats-{}", std::process::id()));
    io::create_dir_all(&dir)?;
    let scene = generate_scene(&SceneConfig::default())?;
    let grid = SceneConfig::default_grid();

    let cal_path = dir.join("view_0.json");
    io::save_calibration(&cal_path, &scene.cameras[0])?;
    let back = io::load_calibration(&cal_path)?;
    println!("calibration round trip center {:?}", back.center());

    let records: Vec<AnnotationRecord> = scene.frames[0]
        .iter()
        .map(|p| AnnotationRecord {
            frame: 0,
            id: p.id,
            world: p.world.into(),
            views: BTreeMap::new(),
        })
        .collect();
    io::save_annotations(dir.join("annotations.jsonl"), &records)?;
    println!("{} annotations read back", io::load_annotations(dir.join("annotations.jsonl"))?.len());

    let t = grid.projection_for(&scene.cameras[0])?;
    io::save_projections(dir.join("projections.jsonl"), &[ProjectionRecord { frame: 0, view: 0, t_grid: t }])?;
    let t_back = io::load_projections(dir.join("projections.jsonl"))?[0].t_grid;
    println!("projection bit-identical after JSON: {}", t_back.to_array().map(f64::to_bits) == t.to_array().map(f64::to_bits));

    let truth = scene.render_ground_truth(0, &grid, 1.0)?;
    let raster = dir.join("gt_0.mvgrid");
    io::save_grid_raster(&raster, truth.raster())?;
    let bytes = std::fs::read(&raster)?;
    println!("MVGRID1 file: {} bytes, magic {:?}", bytes.len(), String::from_utf8_lossy(&bytes[..7]));
    println!("raster bit-identical: {}", io::load_grid_raster(&raster)?.data() == truth.data());

    std::fs::write(&raster, b"NOTGRID\0")?;
    println!("corrupted raster: {}", io::load_grid_raster(&raster).unwrap_err());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
