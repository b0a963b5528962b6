//! Deterministic synthetic multi-camera scenes.
//!
//! Cameras sit on a ring above the area and look at its center; pedestrians
//! are ground points drawn uniformly over the area, independently per frame.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross3, normalize3, CameraCalibration, GroundGrid, Mat3, Point2, Vec3};
use crate::rng;
use crate::warp::{GroundMap, ImageBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Area extent along world x, meters.
    pub area_w: f64,
    /// Area extent along world y, meters.
    pub area_h: f64,
    pub n_cameras: usize,
    pub camera_height: f64,
    pub camera_ring_radius: f64,
    pub n_pedestrians: usize,
    pub n_frames: usize,
    pub image_w: usize,
    pub image_h: usize,
    pub focal_px: f64,
    pub heat_sigma_px: f64,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            area_w: 36.0,
            area_h: 16.0,
            n_cameras: 4,
            camera_height: 30.0,
            camera_ring_radius: 20.0,
            n_pedestrians: 20,
            n_frames: 10,
            image_w: 120,
            image_h: 68,
            focal_px: 130.0,
            heat_sigma_px: 1.0,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.area_w,
            self.area_h,
            self.camera_height,
            self.camera_ring_radius,
            self.focal_px,
            self.heat_sigma_px,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument("scene dimensions, focal and sigma must be positive".into()));
        }
        if self.n_cameras < 2 {
            return Err(Error::InvalidArgument("a scene needs at least two cameras".into()));
        }
        if self.n_frames == 0 || self.image_w == 0 || self.image_h == 0 {
            return Err(Error::InvalidArgument("frame count and image size must be positive".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.area_w / 2.0, self.area_h / 2.0)
    }

    /// Grid tiling the area with `cell_size` cells, cell centers inset by half a cell.
    pub fn grid(&self, cell_size: f64) -> Result<GroundGrid> {
        let cols = (self.area_w / cell_size).round() as usize;
        let rows = (self.area_h / cell_size).round() as usize;
        GroundGrid::new(rows, cols, cell_size, Point2::new(cell_size / 2.0, cell_size / 2.0))
    }

    /// The 90 × 40 grid of 0.4 m cells over the default 36 m × 16 m area.
    pub fn default_grid() -> GroundGrid {
        SceneConfig::default().grid(0.4).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub id: u64,
    /// Feet position on the ground, meters.
    pub world: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SceneConfig,
    pub cameras: Vec<CameraCalibration>,
    pub frames: Vec<Vec<Pedestrian>>,
}

/// World-to-camera rotation and translation for a camera at `cam_pos` looking
/// at `target`. Camera axes: x right, y down, z forward.
pub fn look_at_extrinsics(cam_pos: Vec3, target: Vec3, up: Vec3) -> Result<(Mat3, Vec3)> {
    let forward = normalize3([target[0] - cam_pos[0], target[1] - cam_pos[1], target[2] - cam_pos[2]])
        .ok_or_else(|| Error::DegenerateLookAt("camera position equals target".into()))?;
    let right = normalize3(cross3(&forward, &up))
        .ok_or_else(|| Error::DegenerateLookAt("up vector is parallel to the viewing direction".into()))?;
    let down = cross3(&forward, &right);
    let r = [right, down, forward];
    let rp = crate::geometry::mat_vec(&r, &cam_pos);
    Ok((r, [-rp[0], -rp[1], -rp[2]]))
}

fn intrinsics(cfg: &SceneConfig) -> Mat3 {
    [
        [cfg.focal_px, 0.0, (cfg.image_w as f64 - 1.0) / 2.0],
        [0.0, cfg.focal_px, (cfg.image_h as f64 - 1.0) / 2.0],
        [0.0, 0.0, 1.0],
    ]
}

/// Ring camera positions, evenly spaced starting on the +x side of the center.
pub fn camera_positions(cfg: &SceneConfig) -> Vec<Vec3> {
    let c = cfg.center();
    (0..cfg.n_cameras)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / cfg.n_cameras as f64;
            [
                c.x + cfg.camera_ring_radius * a.cos(),
                c.y + cfg.camera_ring_radius * a.sin(),
                cfg.camera_height,
            ]
        })
        .collect()
}

pub fn generate_scene(cfg: &SceneConfig) -> Result<SyntheticScene> {
    cfg.validate()?;
    let c = cfg.center();
    let target = [c.x, c.y, 0.0];
    let k = intrinsics(cfg);
    let cameras = camera_positions(cfg)
        .into_iter()
        .map(|pos| {
            let (r, t) = look_at_extrinsics(pos, target, [0.0, 0.0, 1.0])?;
            CameraCalibration::new(k, r, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let frames = (0..cfg.n_frames)
        .map(|f| {
            let mut r = rng::synth_stream(cfg.seed, f as u64);
            (0..cfg.n_pedestrians)
                .map(|id| Pedestrian {
                    id: id as u64,
                    world: Point2::new(r.random_range(0.0..cfg.area_w), r.random_range(0.0..cfg.area_h)),
                })
                .collect()
        })
        .collect();
    Ok(SyntheticScene {
        config: *cfg,
        cameras,
        frames,
    })
}

fn in_image(p: Point2, w: usize, h: usize) -> bool {
    p.x >= 0.0 && p.y >= 0.0 && p.x <= (w - 1) as f64 && p.y <= (h - 1) as f64
}

/// Splats peak-normalized Gaussians at `centers` into a single-channel raster, clamped to 1.
fn splat(width: usize, height: usize, centers: &[Point2], sigma: f64) -> ImageBuffer {
    let mut img = ImageBuffer::new(width, height, 1);
    let reach = (4.0 * sigma).ceil();
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut acc = vec![0.0_f64; width * height];
    for p in centers {
        let x0 = (p.x - reach).floor().max(0.0) as usize;
        let y0 = (p.y - reach).floor().max(0.0) as usize;
        let x1 = ((p.x + reach).ceil().max(0.0) as usize).min(width.saturating_sub(1));
        let y1 = ((p.y + reach).ceil().max(0.0) as usize).min(height.saturating_sub(1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 - p.x;
                let dy = y as f64 - p.y;
                acc[y * width + x] += (-(dx * dx + dy * dy) * inv).exp();
            }
        }
    }
    for (o, a) in img.data_mut().iter_mut().zip(acc) {
        *o = a.min(1.0) as f32;
    }
    img
}

impl SyntheticScene {
    pub fn n_views(&self) -> usize {
        self.cameras.len()
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Feet pixel of every pedestrian in `view`, `None` when behind the camera
    /// or outside the image.
    pub fn feet_pixels(&self, view: usize, frame: usize) -> Vec<Option<Point2>> {
        let cam = &self.cameras[view];
        let (w, h) = (self.config.image_w, self.config.image_h);
        self.frames[frame]
            .iter()
            .map(|p| cam.project([p.world.x, p.world.y, 0.0]).filter(|&px| in_image(px, w, h)))
            .collect()
    }

    /// Whether each pedestrian of `frame` is seen by at least one view.
    pub fn visible_anywhere(&self, frame: usize) -> Vec<bool> {
        let mut seen = vec![false; self.frames[frame].len()];
        for v in 0..self.n_views() {
            for (s, px) in seen.iter_mut().zip(self.feet_pixels(v, frame)) {
                *s |= px.is_some();
            }
        }
        seen
    }

    /// Idealized view detection heatmap: one Gaussian per visible pedestrian.
    pub fn render_view_heatmap(&self, view: usize, frame: usize, sigma_px: f64) -> Result<ImageBuffer> {
        if view >= self.n_views() || frame >= self.n_frames() {
            return Err(Error::InvalidArgument(format!("no view {view} / frame {frame} in scene")));
        }
        let centers: Vec<Point2> = self.feet_pixels(view, frame).into_iter().flatten().collect();
        Ok(splat(self.config.image_w, self.config.image_h, &centers, sigma_px))
    }

    /// Ground-truth occupancy map with Gaussians at each pedestrian's grid position.
    pub fn render_ground_truth(&self, frame: usize, grid: &GroundGrid, sigma_cells: f64) -> Result<GroundMap> {
        if frame >= self.n_frames() {
            return Err(Error::InvalidArgument(format!("no frame {frame} in scene")));
        }
        let centers: Vec<Point2> = self.frames[frame].iter().map(|p| grid.ground_to_grid(p.world)).collect();
        GroundMap::from_raster(*grid, splat(grid.cols, grid.rows, &centers, sigma_cells))
    }
}
