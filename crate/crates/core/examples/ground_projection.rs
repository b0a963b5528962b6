//! Projects camera rasters onto the ground grid and compares the direct
//! path with warp-then-compensated projection.
//!
//! Run with `cargo run --example ground_projection`.

use mvaug::warp::project_to_ground_masked;
use mvaug::*;

fn main() -> mvaug::Result<()> {
    let scene = generate_scene(&SceneConfig::default())?;
    let grid = SceneConfig::default_grid();
    let ranges = AugmentationRanges {
        view_proportion: 1.0,
        ..AugmentationRanges::default()
    };
    for (v, cam) in scene.cameras.iter().enumerate() {
        let t = grid.projection_for(cam)?;
        let image = scene.render_view_heatmap(v, 0, 3.0)?;
        let (direct, seen) = project_to_ground(&image, &t, &grid);

        let hv = sample_view_augmentation(AugmentationKind::Perspective, &ranges, image.width(), image.height(), &mut rng::view_stream(1, 0, v as u64))?.h;
        let (warped, warped_mask) = warp_image(&image, &hv, image.width(), image.height());
        let t2 = augment_projection(&t, &hv, &Homography::identity())?;
        let (via_warp, seen2) = project_to_ground_masked(&warped, Some(&warped_mask), &t2, &grid);

        let both = seen.and(&seen2);
        let diffs: Vec<f64> = (0..grid.len())
            .filter(|&i| both.data()[i])
            .map(|i| (direct.data()[i] - via_warp.data()[i]).abs() as f64)
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len().max(1) as f64;
        println!(
            "view {v}: covers {:>4.1}% of the grid, {} cells in both paths, mean |Δ| {mean:.4}",
            100.0 * seen.count() as f64 / grid.len() as f64,
            diffs.len()
        );
    }
    Ok(())
}
