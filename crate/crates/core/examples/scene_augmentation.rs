//! Scene augmentation warps the ground plane once for every camera. The
//! detector, fed the augmented projections, finds people where the
//! transformed ground truth says they are.
//!
//! Run with `cargo run --example scene_augmentation`.

use mvaug::augmentation::transform_scene_annotations;
use mvaug::pipeline::{default_nms_radius, AggregationMode};
use mvaug::*;

fn main() -> mvaug::Result<()> {
    let scene = generate_scene(&SceneConfig {
        n_pedestrians: 6,
        ..SceneConfig::default()
    })?;
    let grid = SceneConfig::default_grid();
    let images: Vec<ImageBuffer> = (0..scene.n_views()).map(|v| scene.render_view_heatmap(v, 0, 1.0)).collect::<Result<_>>()?;

    let ranges = AugmentationRanges {
        scene_proportion: 1.0,
        ..AugmentationRanges::default()
    };
    let hs = sample_scene_augmentation(AugmentationKind::Affine, &ranges, &grid, &mut rng::scene_stream(3, 0))?;
    println!("scene draw: {}", serde_json::to_string(&hs.params).expect("params serialize"));

    // The same Hs right-multiplies every view's projection.
    let t: Vec<Homography> = scene
        .cameras
        .iter()
        .map(|c| augment_projection(&grid.projection_for(c)?, &Homography::identity(), &hs.h))
        .collect::<Result<_>>()?;
    let found = run_detection(&images, &t, &grid, default_nms_radius(&grid), AggregationMode::Mean)?;

    let visible = scene.visible_anywhere(0);
    let cells: Vec<Point2> = scene.frames[0].iter().map(|p| grid.ground_to_grid(p.world)).collect();
    for (m, seen) in transform_scene_annotations(&cells, &hs.h, &grid)?.iter().zip(visible) {
        let Some(q) = m.point.filter(|_| m.visible && seen) else {
            println!("pedestrian left the grid or every view");
            continue;
        };
        let nearest = found.detections.iter().map(|d| d.position.distance(&q)).fold(f64::INFINITY, f64::min);
        println!("ground truth at cell ({:>5.1}, {:>4.1}); nearest detection {nearest:.2} cells away", q.x, q.y);
    }
    Ok(())
}
