//! Draws one view augmentation of every kind, warps an image with it, and
//! checks that the compensated projection still points at the same content.
//!
//! Run with `cargo run --example view_augmentation`.

use mvaug::augmentation::{augment_view, transform_view_annotations};
use mvaug::*;

fn main() -> mvaug::Result<()> {
    let scene = generate_scene(&SceneConfig::default())?;
    let grid = SceneConfig::default_grid();
    let (w, h) = (scene.config.image_w, scene.config.image_h);
    let view = 0;
    let t = grid.projection_for(&scene.cameras[view])?;
    let image = scene.render_view_heatmap(view, 0, 2.0)?;
    // feet pixels of the pedestrians this camera sees
    let (people, feet): (Vec<&synth::Pedestrian>, Vec<Point2>) = scene.frames[0]
        .iter()
        .zip(scene.feet_pixels(view, 0))
        .filter_map(|(p, px)| px.map(|px| (p, px)))
        .unzip();

    let ranges = AugmentationRanges {
        view_proportion: 1.0,
        ..AugmentationRanges::default()
    };
    for kind in ["none", "hflip", "vflip", "affine", "perspective", "crop"] {
        let kind: AugmentationKind = kind.parse()?;
        let hv = sample_view_augmentation(kind, &ranges, w, h, &mut rng::view_stream(7, 0, view as u64))?;
        let aug = augment_view(&image, None, &t, &hv.h, &Homography::identity())?;

        // annotations move by Hv⁻¹; the new projection must agree with them
        let moved = transform_view_annotations(&feet, &hv.h, w, h)?;
        let visible = moved.iter().filter(|m| m.visible).count();
        let mut worst: f64 = 0.0;
        for (pedestrian, m) in people.iter().zip(&moved) {
            if let (Some(q), Ok(r)) = (m.point, aug.t_grid.apply_point(grid.ground_to_grid(pedestrian.world))) {
                worst = worst.max(q.distance(&r));
            }
        }
        println!(
            "{:<11} valid pixels {:>5.1}%  annotations kept {visible}/{}  projection vs annotation gap {worst:.1e} px",
            kind.name(),
            100.0 * aug.mask.count() as f64 / (w * h) as f64,
            moved.len(),
        );
    }
    Ok(())
}
