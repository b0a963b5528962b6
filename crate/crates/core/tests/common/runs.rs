//! End-to-end runs shared by the acceptance and command-line tests.

use std::path::Path;

use mvaug::augmentation::{transform_scene_annotations, transform_view_annotations};
use mvaug::eval::match_detections_with_ignore;
use mvaug::pipeline::{detect_views, DetectionParams, ViewInput};
use mvaug::rng;
use mvaug::warp::warp_image;
use mvaug::*;

use super::fixtures::{self, p, run_cli};

pub const THRESHOLD_M: f64 = 0.5;

fn detect(images: &[ImageBuffer], masks: Option<&[ValidMask]>, t: &[Homography], grid: &GroundGrid) -> DetectionSet {
    let views: Vec<ViewInput<'_>> = images
        .iter()
        .enumerate()
        .map(|(v, image)| ViewInput {
            image,
            mask: masks.map(|m| &m[v]),
            t_grid: t[v],
        })
        .collect();
    detect_views(&views, grid, &DetectionParams::for_grid(grid)).expect("detection")
}

/// Closed loop on un-augmented views: every pedestrian seen by some view is
/// ground truth.
pub fn baseline_metrics(scene: &SyntheticScene, grid: &GroundGrid) -> MetricsReport {
    let t = fixtures::projections(scene, grid);
    let frames: Vec<FrameMatch> = (0..scene.n_frames())
        .map(|f| {
            let imgs: Vec<ImageBuffer> = (0..scene.n_views())
                .map(|v| scene.render_view_heatmap(v, f, scene.config.heat_sigma_px).expect("render"))
                .collect();
            let dets: Vec<Point2> = detect(&imgs, None, &t, grid).positions().iter().map(|c| grid.grid_to_ground(*c)).collect();
            let vis = scene.visible_anywhere(f);
            let gts: Vec<Point2> = scene.frames[f].iter().zip(&vis).filter(|(_, v)| **v).map(|(p, _)| p.world).collect();
            match_detections(&dets, &gts, THRESHOLD_M).expect("match")
        })
        .collect();
    compute_metrics(&frames, THRESHOLD_M).expect("metrics")
}

/// The same loop with affine view and scene augmentation at `proportion`,
/// drawn from the per-frame and per-view streams of `seed`. Ground truth is
/// transformed with the images: a person counts when some augmented view
/// still sees them and `Hs⁻¹` keeps them on the grid. People the
/// augmentation pushed off the grid or out of every view become don't-care
/// points, so a detection on their residual heat is neither credited nor
/// penalized.
pub fn augmented_metrics(scene: &SyntheticScene, grid: &GroundGrid, seed: u64, proportion: f64) -> MetricsReport {
    let cfg = &scene.config;
    let t = fixtures::projections(scene, grid);
    let ranges = AugmentationRanges {
        view_proportion: proportion,
        scene_proportion: proportion,
        ..AugmentationRanges::default()
    };
    let frames: Vec<FrameMatch> = (0..scene.n_frames())
        .map(|f| {
            let hs = sample_scene_augmentation(AugmentationKind::Affine, &ranges, grid, &mut rng::scene_stream(seed, f as u64)).expect("scene draw");
            let mut imgs = Vec::new();
            let mut masks = Vec::new();
            let mut ts = Vec::new();
            let mut hvs = Vec::new();
            for v in 0..scene.n_views() {
                let hv = sample_view_augmentation(AugmentationKind::Affine, &ranges, cfg.image_w, cfg.image_h, &mut rng::view_stream(seed, f as u64, v as u64))
                    .expect("view draw");
                let img = scene.render_view_heatmap(v, f, cfg.heat_sigma_px).expect("render");
                let (w, m) = warp_image(&img, &hv.h, cfg.image_w, cfg.image_h);
                imgs.push(w);
                masks.push(m);
                ts.push(augment_projection(&t[v], &hv.h, &hs.h).expect("invertible"));
                hvs.push(hv);
            }
            let dets: Vec<Point2> = detect(&imgs, Some(&masks), &ts, grid).positions().iter().map(|c| grid.grid_to_ground(*c)).collect();

            let feet: Vec<Vec<Option<Point2>>> = (0..scene.n_views()).map(|v| scene.feet_pixels(v, f)).collect();
            let mut gts = Vec::new();
            let mut ignore = Vec::new();
            for (i, person) in scene.frames[f].iter().enumerate() {
                let seen = (0..scene.n_views()).any(|v| {
                    feet[v][i].is_some_and(|px| transform_view_annotations(&[px], &hvs[v].h, cfg.image_w, cfg.image_h).expect("invertible")[0].visible)
                });
                let m = transform_scene_annotations(&[grid.ground_to_grid(person.world)], &hs.h, grid).expect("invertible")[0];
                match (m.point, seen && m.visible) {
                    (Some(q), true) => gts.push(grid.grid_to_ground(q)),
                    (Some(q), false) => ignore.push(grid.grid_to_ground(q)),
                    (None, _) => {}
                }
            }
            match_detections_with_ignore(&dets, &gts, &ignore, THRESHOLD_M).expect("match")
        })
        .collect();
    compute_metrics(&frames, THRESHOLD_M).expect("metrics")
}

/// Outcome of one scene-equivariance trial.
#[derive(Debug, Clone, Copy)]
pub struct EquivarianceTrial {
    pub compared_base: usize,
    pub compared_augmented: usize,
    pub unmatched: usize,
    /// Unpaired detections lying next to a person who has a neighbour
    /// within [`CROWD_RADIUS_M`]; a subset of `unmatched`.
    pub unmatched_crowded: usize,
    pub worst_distance: f64,
}

/// People closer than this sit at the resolution limit of the suppression
/// radius: a scale change decides whether they form one peak or two.
pub const CROWD_RADIUS_M: f64 = 1.0;

/// Detections with `T·Hs`, mapped back through `Hs`, against detections with
/// `T`. Only detections at least `margin` cells inside both grids are
/// required to pair up; near the border one side may lack the heat the
/// other sees.
pub fn scene_equivariance(scene: &SyntheticScene, grid: &GroundGrid, frame: usize, hs: &Homography, margin: f64) -> EquivarianceTrial {
    let t = fixtures::projections(scene, grid);
    let t_aug: Vec<Homography> = t.iter().map(|t| augment_projection(t, &Homography::identity(), hs).expect("invertible")).collect();
    let imgs: Vec<ImageBuffer> = (0..scene.n_views())
        .map(|v| scene.render_view_heatmap(v, frame, scene.config.heat_sigma_px).expect("render"))
        .collect();
    let base = detect(&imgs, None, &t, grid).positions();
    let back: Vec<Point2> = detect(&imgs, None, &t_aug, grid)
        .positions()
        .iter()
        .map(|d| hs.apply_point(*d).expect("finite"))
        .collect();
    let hs_inv = hs.invert().expect("invertible");
    let inside = |c: Point2| c.x >= margin && c.y >= margin && c.x <= grid.cols as f64 - 1.0 - margin && c.y <= grid.rows as f64 - 1.0 - margin;
    // distances in cells: the threshold is 1.5 cells
    let m = match_detections(&back, &base, 1.5).expect("match");
    let mut base_hit = vec![false; base.len()];
    let mut back_hit = vec![false; back.len()];
    let mut worst: f64 = 0.0;
    for pair in &m.pairs {
        base_hit[pair.gt] = true;
        back_hit[pair.det] = true;
    }
    let people = &scene.frames[frame];
    let crowded_cells: Vec<Point2> = people
        .iter()
        .filter(|a| people.iter().any(|b| !std::ptr::eq(*a, b) && a.world.distance(&b.world) < CROWD_RADIUS_M))
        .map(|a| grid.ground_to_grid(a.world))
        .collect();
    let crowded = |c: &Point2| crowded_cells.iter().any(|g| g.distance(c) <= 1.5);
    let mut compared_base = 0;
    let mut compared_augmented = 0;
    let mut unmatched = 0;
    let mut unmatched_crowded = 0;
    for (points, hit, compared) in [(&base, &base_hit, &mut compared_base), (&back, &back_hit, &mut compared_augmented)] {
        for (i, c) in points.iter().enumerate() {
            if inside(*c) && hs_inv.apply_point(*c).is_ok_and(inside) {
                *compared += 1;
                if !hit[i] {
                    unmatched += 1;
                    unmatched_crowded += usize::from(crowded(c));
                }
            }
        }
    }
    for pair in &m.pairs {
        let b = base[pair.gt];
        if inside(b) && hs_inv.apply_point(b).is_ok_and(inside) {
            worst = worst.max(pair.distance);
        }
    }
    EquivarianceTrial {
        compared_base,
        compared_augmented,
        unmatched,
        unmatched_crowded,
        worst_distance: worst,
    }
}

/// Bytes of every primary output of synth → augment → detect → eval.
pub fn cli_chain(dir: &Path, seed: u64) -> Result<Vec<(String, Vec<u8>)>, String> {
    let cfg = fixtures::write_config(dir, &mvaug::io::ToolConfig::default());
    let synth = dir.join("synth");
    let aug = dir.join("aug");
    let dets = dir.join("dets.jsonl");
    let report = dir.join("report.json");
    let seed = seed.to_string();
    let gt = aug.join("annotations.jsonl");
    let steps: [Vec<&str>; 4] = [
        vec!["synth", "--config", p(&cfg), "--out", p(&synth), "--seed", &seed],
        vec!["augment", "--dataset", p(&synth), "--seed", &seed, "--out", p(&aug)],
        vec!["detect", "--dataset", p(&aug), "--out", p(&dets)],
        vec!["eval", "--detections", p(&dets), "--gt", p(&gt), "--report", p(&report)],
    ];
    for args in &steps {
        let o = run_cli(args);
        if !o.status.success() {
            return Err(format!("{} failed: {}", args[0], String::from_utf8_lossy(&o.stderr)));
        }
    }
    let mut files = Vec::new();
    collect(dir, dir, &mut files)?;
    files.sort();
    Ok(files)
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) -> Result<(), String> {
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).map_err(|e| e.to_string())?.display().to_string();
            out.push((rel, std::fs::read(&path).map_err(|e| e.to_string())?));
        }
    }
    Ok(())
}
