//! A synthetic multi-camera scene: cameras on a ring, pedestrians on the
//! ground, and per-view and ground-truth heatmaps.
//!
//! Run with `cargo run --example synthetic_scene`.

use mvaug::*;

fn main() -> mvaug::Result<()> {
    let cfg = SceneConfig::default();
    let scene = generate_scene(&cfg)?;
    let grid = SceneConfig::default_grid();
    println!("{} cameras, {} frames, {} pedestrians per frame", scene.n_views(), scene.n_frames(), cfg.n_pedestrians);
    for (v, cam) in scene.cameras.iter().enumerate() {
        let c = cam.center();
        let seen = scene.feet_pixels(v, 0).iter().filter(|p| p.is_some()).count();
        println!("camera {v} at ({:>6.1}, {:>6.1}, {:>4.1}) m sees {seen} pedestrians in frame 0", c[0], c[1], c[2]);
    }
    let heat = scene.render_view_heatmap(0, 0, cfg.heat_sigma_px)?;
    let peak = heat.data().iter().copied().fold(0.0f32, f32::max);
    println!("view 0 heatmap {}x{}, peak {peak}", heat.width(), heat.height());

    let truth = scene.render_ground_truth(0, &grid, 1.0)?;
    let hot = truth.data().iter().filter(|&&v| v > 0.5).count();
    println!("ground truth {}x{} cells, {hot} above 0.5", grid.cols, grid.rows);
    Ok(())
}
