//! Geometric reference detector: project views to the ground, aggregate,
//! suppress non-maxima, and split true detections from noise by 2-means on
//! the scores. Also the ground and image MSE losses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GroundGrid, Homography, Point2};
use crate::warp::{project_to_ground_masked, GroundMap, ImageBuffer, ValidMask};

/// Default cap on NMS peaks.
pub const MAX_PEAKS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Grid position in cells.
    pub position: Point2,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionSet {
    pub frame: u64,
    pub detections: Vec<Detection>,
}

impl DetectionSet {
    pub fn new(frame: u64, detections: Vec<Detection>) -> Self {
        DetectionSet { frame, detections }
    }

    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.detections.iter().map(|d| d.position).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    #[default]
    Mean,
    Max,
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggregationMode::Mean => "mean",
            AggregationMode::Max => "max",
        })
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(AggregationMode::Mean),
            "max" => Ok(AggregationMode::Max),
            _ => Err(Error::InvalidArgument(format!("unknown aggregation {s:?} (expected mean or max)"))),
        }
    }
}

/// Suppression radius tied to the 0.5 m match threshold: `ceil(0.5 / cell_size)` cells.
pub fn default_nms_radius(grid: &GroundGrid) -> f64 {
    (0.5 / grid.cell_size).ceil()
}

/// Per-cell mean or max over the views whose mask is valid there; zero where no view is valid.
pub fn aggregate_ground_maps(maps: &[GroundMap], masks: &[ValidMask], mode: AggregationMode) -> Result<GroundMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("aggregation needs at least one map".into()))?;
    if masks.len() != maps.len() {
        return Err(Error::ShapeMismatch(format!("{} maps but {} masks", maps.len(), masks.len())));
    }
    let grid = *first.grid();
    let channels = first.channels();
    for (m, k) in maps.iter().zip(masks) {
        if *m.grid() != grid || m.channels() != channels {
            return Err(Error::GridMismatch("ground maps do not share one grid".into()));
        }
        if k.width() != grid.cols || k.height() != grid.rows {
            return Err(Error::GridMismatch("mask does not match the grid".into()));
        }
    }
    let mut out = GroundMap::zeros(grid, channels);
    let cells = grid.len();
    let data = out.raster_mut().data_mut();
    for cell in 0..cells {
        for ch in 0..channels {
            let mut acc = match mode {
                AggregationMode::Mean => 0.0_f64,
                AggregationMode::Max => f64::NEG_INFINITY,
            };
            let mut count = 0usize;
            for (m, k) in maps.iter().zip(masks) {
                if k.data()[cell] {
                    let v = m.data()[cell * channels + ch] as f64;
                    count += 1;
                    match mode {
                        AggregationMode::Mean => acc += v,
                        AggregationMode::Max => acc = acc.max(v),
                    }
                }
            }
            data[cell * channels + ch] = match (count, mode) {
                (0, _) => 0.0,
                (n, AggregationMode::Mean) => (acc / n as f64) as f32,
                (_, AggregationMode::Max) => acc as f32,
            };
        }
    }
    Ok(out)
}

/// Greedy NMS: take the highest remaining cell, emit it, suppress every cell
/// within `radius_cells` (Euclidean), repeat until `max_peaks` or no positive
/// value remains. Ties go to the lowest row-major index.
pub fn nms_heatmap(map: &GroundMap, radius_cells: f64, max_peaks: usize) -> Result<DetectionSet> {
    if map.channels() != 1 {
        return Err(Error::ShapeMismatch("NMS needs a single-channel map".into()));
    }
    if !(radius_cells > 0.0) {
        return Err(Error::InvalidArgument("NMS radius must be positive".into()));
    }
    let grid = map.grid();
    let (cols, rows) = (grid.cols, grid.rows);
    let data = map.data();
    let mut order: Vec<usize> = (0..data.len()).filter(|&i| data[i] > 0.0).collect();
    // stable sort keeps row-major order among equal values
    order.sort_by(|&a, &b| data[b].total_cmp(&data[a]));
    let mut suppressed = vec![false; data.len()];
    let r = radius_cells;
    let reach = r.floor() as isize;
    let mut out = Vec::new();
    for idx in order {
        if out.len() >= max_peaks {
            break;
        }
        if suppressed[idx] {
            continue;
        }
        let (col, row) = ((idx % cols) as isize, (idx / cols) as isize);
        out.push(Detection {
            position: Point2::new(col as f64, row as f64),
            score: (data[idx] as f64).min(1.0),
        });
        for dy in -reach..=reach {
            let y = row + dy;
            if y < 0 || y >= rows as isize {
                continue;
            }
            for dx in -reach..=reach {
                let x = col + dx;
                if x < 0 || x >= cols as isize {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64) <= r * r {
                    suppressed[y as usize * cols + x as usize] = true;
                }
            }
        }
    }
    Ok(DetectionSet::new(0, out))
}

/// Sub-cell peak positions from a 3-point parabola fit along each axis,
/// offsets clamped to half a cell. Axes touching the grid border are left as is.
pub fn refine_peaks(map: &GroundMap, dets: &DetectionSet) -> DetectionSet {
    let g = map.grid();
    let fit = |l: f32, c: f32, r: f32| {
        let (l, c, r) = (l as f64, c as f64, r as f64);
        let denom = l - 2.0 * c + r;
        if denom < 0.0 {
            (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let detections = dets
        .detections
        .iter()
        .map(|d| {
            let (col, row) = (d.position.x.round() as usize, d.position.y.round() as usize);
            let mut p = Point2::new(col as f64, row as f64);
            if col > 0 && col + 1 < g.cols {
                p.x += fit(map.at(col - 1, row), map.at(col, row), map.at(col + 1, row));
            }
            if row > 0 && row + 1 < g.rows {
                p.y += fit(map.at(col, row - 1), map.at(col, row), map.at(col, row + 1));
            }
            Detection { position: p, score: d.score }
        })
        .collect();
    DetectionSet::new(dets.frame, detections)
}

/// 2-means on the scores (centroids start at the min and max score, Lloyd
/// iterations until assignments stop changing); keeps the high cluster.
/// Fewer than two detections, or all scores equal, pass through unchanged.
pub fn kmeans2_score_filter(dets: &DetectionSet) -> DetectionSet {
    let scores: Vec<f64> = dets.detections.iter().map(|d| d.score).collect();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if scores.len() < 2 || lo == hi {
        return dets.clone();
    }
    let (mut c_lo, mut c_hi) = (lo, hi);
    let mut high: Vec<bool> = vec![false; scores.len()];
    loop {
        let next: Vec<bool> = scores.iter().map(|&s| (s - c_hi).abs() < (s - c_lo).abs()).collect();
        let changed = next != high;
        high = next;
        let (mut sum_hi, mut n_hi, mut sum_lo, mut n_lo) = (0.0, 0usize, 0.0, 0usize);
        for (&s, &h) in scores.iter().zip(&high) {
            if h {
                sum_hi += s;
                n_hi += 1;
            } else {
                sum_lo += s;
                n_lo += 1;
            }
        }
        if n_hi > 0 {
            c_hi = sum_hi / n_hi as f64;
        }
        if n_lo > 0 {
            c_lo = sum_lo / n_lo as f64;
        }
        if !changed {
            break;
        }
    }
    let kept = dets
        .detections
        .iter()
        .zip(&high)
        .filter(|(_, &h)| h)
        .map(|(d, _)| *d)
        .collect();
    DetectionSet::new(dets.frame, kept)
}

/// Mean over cells of `(x − x̂)²`.
pub fn mse_ground_loss(x: &GroundMap, x_hat: &GroundMap) -> Result<f64> {
    if x.grid() != x_hat.grid() || x.channels() != x_hat.channels() {
        return Err(Error::GridMismatch("loss inputs must share grid and channels".into()));
    }
    Ok(mse(x.data(), x_hat.data()))
}

fn mse(a: &[f32], b: &[f32]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter()
        .zip(b)
        .map(|(&p, &q)| {
            let d = p as f64 - q as f64;
            d * d
        })
        .sum::<f64>()
        / a.len() as f64
}

/// Average over views of the per-view image MSE.
pub fn mse_image_loss(r: &[ImageBuffer], r_hat: &[ImageBuffer]) -> Result<f64> {
    if r.len() != r_hat.len() {
        return Err(Error::ShapeMismatch(format!("{} predictions but {} targets", r.len(), r_hat.len())));
    }
    if r.is_empty() {
        return Err(Error::ShapeMismatch("image loss needs at least one view".into()));
    }
    let mut total = 0.0;
    for (a, b) in r.iter().zip(r_hat) {
        if !a.same_shape(b) {
            return Err(Error::ShapeMismatch("view heatmaps differ in shape".into()));
        }
        total += mse(a.data(), b.data());
    }
    Ok(total / r.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub nms_radius: f64,
    pub mode: AggregationMode,
    pub max_peaks: usize,
    /// Sub-cell refinement of the surviving peaks.
    pub refine: bool,
}

impl DetectionParams {
    pub fn for_grid(grid: &GroundGrid) -> Self {
        DetectionParams {
            nms_radius: default_nms_radius(grid),
            mode: AggregationMode::Mean,
            max_peaks: MAX_PEAKS,
            refine: true,
        }
    }
}

/// One input view: a heatmap, its optional validity mask, and its grid-to-pixel projection.
#[derive(Debug, Clone, Copy)]
pub struct ViewInput<'a> {
    pub image: &'a ImageBuffer,
    pub mask: Option<&'a ValidMask>,
    pub t_grid: Homography,
}

/// Aggregated ground heatmap of a set of views.
pub fn ground_heatmap(views: &[ViewInput<'_>], grid: &GroundGrid, mode: AggregationMode) -> Result<GroundMap> {
    if views.is_empty() {
        return Err(Error::InvalidArgument("detection needs at least one view".into()));
    }
    let (maps, masks): (Vec<_>, Vec<_>) = views
        .iter()
        .map(|v| project_to_ground_masked(v.image, v.mask, &v.t_grid, grid))
        .unzip();
    aggregate_ground_maps(&maps, &masks, mode)
}

/// project → aggregate → NMS (top `max_peaks`) → optional refinement → 2-means filter.
pub fn detect_views(views: &[ViewInput<'_>], grid: &GroundGrid, params: &DetectionParams) -> Result<DetectionSet> {
    let heat = ground_heatmap(views, grid, params.mode)?;
    let peaks = nms_heatmap(&heat, params.nms_radius, params.max_peaks)?;
    let peaks = if params.refine { refine_peaks(&heat, &peaks) } else { peaks };
    Ok(kmeans2_score_filter(&peaks))
}

pub fn run_detection(
    images: &[ImageBuffer],
    t_grids: &[Homography],
    grid: &GroundGrid,
    nms_radius: f64,
    mode: AggregationMode,
) -> Result<DetectionSet> {
    if images.len() != t_grids.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} images but {} projections",
            images.len(),
            t_grids.len()
        )));
    }
    let views: Vec<ViewInput<'_>> = images
        .iter()
        .zip(t_grids)
        .map(|(image, t)| ViewInput {
            image,
            mask: None,
            t_grid: *t,
        })
        .collect();
    let params = DetectionParams {
        nms_radius,
        mode,
        ..DetectionParams::for_grid(grid)
    };
    detect_views(&views, grid, &params)
}
