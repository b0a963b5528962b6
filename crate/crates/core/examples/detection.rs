//! The reference detector step by step: project, aggregate, suppress,
//! refine, and split the scores into two clusters.
//!
//! Run with `cargo run --example detection`.

use mvaug::pipeline::{ground_heatmap, kmeans2_score_filter, nms_heatmap, refine_peaks, DetectionParams, ViewInput};
use mvaug::*;

fn main() -> mvaug::Result<()> {
    let scene = generate_scene(&SceneConfig::default())?;
    let grid = SceneConfig::default_grid();
    let params = DetectionParams::for_grid(&grid);
    let frame = 4;
    let images: Vec<ImageBuffer> = (0..scene.n_views()).map(|v| scene.render_view_heatmap(v, frame, 1.0)).collect::<Result<_>>()?;
    let views: Vec<ViewInput<'_>> = images
        .iter()
        .zip(&scene.cameras)
        .map(|(image, cam)| Ok(ViewInput { image, mask: None, t_grid: grid.projection_for(cam)? }))
        .collect::<Result<_>>()?;

    let heat = ground_heatmap(&views, &grid, params.mode)?;
    let peaks = nms_heatmap(&heat, params.nms_radius, params.max_peaks)?;
    let refined = refine_peaks(&heat, &peaks);
    let kept = kmeans2_score_filter(&refined);
    println!("{} peaks after suppression (radius {} cells), {} kept by 2-means", peaks.len(), params.nms_radius, kept.len());

    let truth: Vec<Point2> = scene.frames[frame]
        .iter()
        .zip(scene.visible_anywhere(frame))
        .filter(|(_, seen)| *seen)
        .map(|(p, _)| p.world)
        .collect();
    let found: Vec<Point2> = kept.positions().iter().map(|c| grid.grid_to_ground(*c)).collect();
    let m = match_detections(&found, &truth, 0.5)?;
    println!("{} of {} visible pedestrians matched, {} false positives", m.pairs.len(), truth.len(), m.false_positives);
    for d in kept.detections.iter().take(5) {
        println!("  cell ({:>5.2}, {:>5.2}) score {:.3}", d.position.x, d.position.y, d.score);
    }
    Ok(())
}
