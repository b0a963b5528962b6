//! Geometric augmentation as homographies, and the two-level projection update.
//!
//! Every stored homography maps OUTPUT coordinates to SOURCE coordinates: the
//! augmented raster at `q` samples the original at `H·q`. Under that
//! convention a view augmentation `Hv` turns the grid-to-pixel projection `T`
//! into `Hv⁻¹·T`, a scene augmentation `Hs` turns it into `T·Hs`, and both
//! together give `Hv⁻¹·T·Hs`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GroundGrid, Homography, Mat3, Point2};
use crate::rng::AugRng;
use crate::warp::{warp_image_masked, ImageBuffer, ValidMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmentationKind {
    #[default]
    None,
    HFlip,
    VFlip,
    Affine,
    Perspective,
    Crop,
}

impl AugmentationKind {
    pub const ALL: [AugmentationKind; 6] = [
        AugmentationKind::None,
        AugmentationKind::HFlip,
        AugmentationKind::VFlip,
        AugmentationKind::Affine,
        AugmentationKind::Perspective,
        AugmentationKind::Crop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentationKind::None => "none",
            AugmentationKind::HFlip => "hflip",
            AugmentationKind::VFlip => "vflip",
            AugmentationKind::Affine => "affine",
            AugmentationKind::Perspective => "perspective",
            AugmentationKind::Crop => "crop",
        }
    }
}

impl fmt::Display for AugmentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AugmentationKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown augmentation kind {s:?} (expected none, hflip, vflip, affine, perspective or crop)"
                ))
            })
    }
}

/// Sampling ranges shared by view and scene augmentation.
///
/// Crop aspect ratios are relative to the aspect of the raster being cropped,
/// so an aspect of 1 keeps the raster's shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentationRanges {
    pub max_rotation_deg: f64,
    pub max_translate_frac: f64,
    pub scale_range: [f64; 2],
    pub max_shear_deg: f64,
    pub crop_area_range: [f64; 2],
    pub crop_aspect_range: [f64; 2],
    pub perspective_distortion: f64,
    pub view_proportion: f64,
    pub scene_proportion: f64,
}

impl Default for AugmentationRanges {
    fn default() -> Self {
        AugmentationRanges {
            max_rotation_deg: 45.0,
            max_translate_frac: 0.2,
            scale_range: [0.8, 1.2],
            max_shear_deg: 10.0,
            crop_area_range: [0.8, 1.0],
            crop_aspect_range: [0.75, 1.3333],
            perspective_distortion: 0.5,
            view_proportion: 0.5,
            scene_proportion: 0.5,
        }
    }
}

impl AugmentationRanges {
    /// Ranges whose every draw is the identity transform.
    pub fn degenerate() -> Self {
        AugmentationRanges {
            max_rotation_deg: 0.0,
            max_translate_frac: 0.0,
            scale_range: [1.0, 1.0],
            max_shear_deg: 0.0,
            crop_area_range: [1.0, 1.0],
            crop_aspect_range: [1.0, 1.0],
            perspective_distortion: 0.0,
            view_proportion: 1.0,
            scene_proportion: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("augmentation ranges: {what}")));
        let finite = [
            self.max_rotation_deg,
            self.max_translate_frac,
            self.max_shear_deg,
            self.perspective_distortion,
            self.view_proportion,
            self.scene_proportion,
        ]
        .iter()
        .chain(&self.scale_range)
        .chain(&self.crop_area_range)
        .chain(&self.crop_aspect_range)
        .all(|v| v.is_finite());
        if !finite {
            return bad("non-finite value");
        }
        if self.max_rotation_deg < 0.0 || self.max_translate_frac < 0.0 || self.max_shear_deg < 0.0 {
            return bad("maximum magnitudes must be non-negative");
        }
        if !(self.max_shear_deg < 90.0) {
            return bad("shear must be below 90 degrees");
        }
        if !(self.scale_range[0] > 0.0 && self.scale_range[0] <= self.scale_range[1]) {
            return bad("scale range must be positive and ordered");
        }
        if !(self.crop_area_range[0] > 0.0 && self.crop_area_range[0] <= self.crop_area_range[1] && self.crop_area_range[1] <= 1.0) {
            return bad("crop area range must lie in (0, 1] and be ordered");
        }
        if !(self.crop_aspect_range[0] > 0.0 && self.crop_aspect_range[0] <= self.crop_aspect_range[1]) {
            return bad("crop aspect range must be positive and ordered");
        }
        if !(0.0..=1.0).contains(&self.perspective_distortion) {
            return bad("perspective distortion must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.view_proportion) || !(0.0..=1.0).contains(&self.scene_proportion) {
            return bad("proportions must lie in [0, 1]");
        }
        Ok(())
    }
}

/// The sampled parameters behind an augmentation homography.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AugmentationParams {
    None,
    HFlip {
        width: f64,
    },
    VFlip {
        height: f64,
    },
    Affine {
        rotation_deg: f64,
        translate: [f64; 2],
        scale: f64,
        shear_deg: f64,
        center: [f64; 2],
    },
    Perspective {
        /// Raster corners (source).
        start: [[f64; 2]; 4],
        /// Displaced corners (output).
        end: [[f64; 2]; 4],
    },
    Crop {
        x: f64,
        y: f64,
        width: f64,
        height: f64,
    },
}

/// A per-view augmentation `Hv`, in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewAugmentation {
    pub kind: AugmentationKind,
    pub h: Homography,
    pub params: AugmentationParams,
}

/// A scene augmentation `Hs`, in grid-cell coordinates, shared by all views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneAugmentation {
    pub kind: AugmentationKind,
    pub h: Homography,
    pub params: AugmentationParams,
}

impl ViewAugmentation {
    pub fn identity() -> Self {
        ViewAugmentation {
            kind: AugmentationKind::None,
            h: Homography::identity(),
            params: AugmentationParams::None,
        }
    }
}

impl SceneAugmentation {
    pub fn identity() -> Self {
        SceneAugmentation {
            kind: AugmentationKind::None,
            h: Homography::identity(),
            params: AugmentationParams::None,
        }
    }
}

/// Output pixel `(x, y)` samples the source at `(width − 1 − x, y)`.
pub fn hflip_homography(width_px: f64) -> Homography {
    Homography::from_matrix_unchecked([[-1.0, 0.0, width_px - 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
}

/// Output pixel `(x, y)` samples the source at `(x, height − 1 − y)`.
pub fn vflip_homography(height_px: f64) -> Homography {
    Homography::from_matrix_unchecked([[1.0, 0.0, 0.0], [0.0, -1.0, height_px - 1.0], [0.0, 0.0, 1.0]])
}

/// Sampling homography of a random-affine transform.
///
/// The forward map takes source `p` to `center + t + R·S·Sh·(p − center)`:
/// shear along x first, then isotropic scale, then rotation (in pixel
/// coordinates, about `center`), then translation by `(tx, ty)`. The returned
/// matrix is its exact inverse with last row `(0, 0, 1)`.
pub fn affine_homography(rot_deg: f64, tx_px: f64, ty_px: f64, scale: f64, shear_deg: f64, center: Point2) -> Result<Homography> {
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument(format!("affine scale must be positive, got {scale}")));
    }
    let (s, c) = rot_deg.to_radians().sin_cos();
    let k = shear_deg.to_radians().tan();
    // A = R · diag(scale) · [[1, k], [0, 1]]
    let a = [[scale * c, scale * (c * k - s)], [scale * s, scale * (s * k + c)]];
    let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if !(d.abs() > crate::geometry::SINGULAR_EPS) {
        return Err(Error::SingularMatrix { det: d });
    }
    let inv = [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]];
    // p = center + A⁻¹·(q − center − t)
    let ox = center.x + tx_px;
    let oy = center.y + ty_px;
    let m: Mat3 = [
        [inv[0][0], inv[0][1], center.x - inv[0][0] * ox - inv[0][1] * oy],
        [inv[1][0], inv[1][1], center.y - inv[1][0] * ox - inv[1][1] * oy],
        [0.0, 0.0, 1.0],
    ];
    Homography::new(m)
}

/// Resized-crop: output `(x, y)` samples `(crop_x + x·crop_w/out_w, crop_y + y·crop_h/out_h)`.
pub fn crop_homography(crop_x: f64, crop_y: f64, crop_w: f64, crop_h: f64, out_w: f64, out_h: f64) -> Result<Homography> {
    if !(crop_w > 0.0 && crop_h > 0.0 && out_w > 0.0 && out_h > 0.0) {
        return Err(Error::InvalidArgument("crop and output sizes must be positive".into()));
    }
    Homography::new([
        [crop_w / out_w, 0.0, crop_x],
        [0.0, crop_h / out_h, crop_y],
        [0.0, 0.0, 1.0],
    ])
}

fn triangle_area2(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn check_quad(q: &[Point2; 4], which: &str) -> Result<()> {
    if q.iter().any(|p| !p.is_finite()) {
        return Err(Error::DegenerateQuad(format!("{which} has non-finite corners")));
    }
    let scale = q
        .iter()
        .flat_map(|p| q.iter().map(move |r| p.distance(r)))
        .fold(0.0_f64, f64::max);
    let eps = 1e-9 * scale * scale;
    for skip in 0..4 {
        let tri: Vec<Point2> = (0..4).filter(|&i| i != skip).map(|i| q[i]).collect();
        if !(triangle_area2(tri[0], tri[1], tri[2]).abs() > eps) {
            return Err(Error::DegenerateQuad(format!("three {which} corners are collinear")));
        }
    }
    Ok(())
}

/// Exact homography with `H·src[i] = dst[i]`, solved from the 8×8 system with `h₂₂ = 1`.
pub fn homography_from_4pt(src: &[Point2; 4], dst: &[Point2; 4]) -> Result<Homography> {
    check_quad(src, "source")?;
    check_quad(dst, "destination")?;

    // Condition both sides with a similarity so the system is well scaled.
    let (ts, s) = conditioning(src);
    let (td, d) = conditioning(dst);

    let mut a = [[0.0_f64; 9]; 8];
    for i in 0..4 {
        let (x, y, u, v) = (s[i].x, s[i].y, d[i].x, d[i].y);
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    let h = solve_8x8(a).ok_or_else(|| Error::DegenerateQuad("correspondence system is singular".into()))?;
    let hn = Homography::new([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])
        .map_err(|_| Error::DegenerateQuad("solved homography is singular".into()))?;
    // Undo conditioning: H = Td⁻¹ · Hn · Ts
    let full = td.invert()?.compose(&hn).compose(&ts).normalized();
    Homography::new(*full.matrix()).map_err(|_| Error::DegenerateQuad("solved homography is singular".into()))
}

/// Similarity moving the centroid to the origin with mean distance √2, and
/// the conditioned points.
fn conditioning(q: &[Point2; 4]) -> (Homography, [Point2; 4]) {
    let cx = q.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = q.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let mean = q.iter().map(|p| (p.x - cx).hypot(p.y - cy)).sum::<f64>() / 4.0;
    let s = if mean > 0.0 { std::f64::consts::SQRT_2 / mean } else { 1.0 };
    let t = Homography::from_matrix_unchecked([[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]);
    (t, q.map(|p| Point2::new(s * (p.x - cx), s * (p.y - cy))))
}

/// Gaussian elimination with partial pivoting on an augmented 8×9 system.
fn solve_8x8(mut a: [[f64; 9]; 8]) -> Option<[f64; 8]> {
    for col in 0..8 {
        let piv = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if !(a[piv][col].abs() > 1e-12) {
            return None;
        }
        a.swap(col, piv);
        for row in 0..8 {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..9 {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    let mut x = [0.0; 8];
    for i in 0..8 {
        x[i] = a[i][8] / a[i][i];
    }
    Some(x)
}

/// Raster corners at pixel centers: top-left, top-right, bottom-right, bottom-left.
fn corners(width: f64, height: f64) -> [Point2; 4] {
    [
        Point2::new(0.0, 0.0),
        Point2::new(width - 1.0, 0.0),
        Point2::new(width - 1.0, height - 1.0),
        Point2::new(0.0, height - 1.0),
    ]
}

/// Homography mapping the inward-displaced corner quad `end` (output) onto the
/// raster corners (source), sign-normalized so `w > 0` inside the quad.
pub fn perspective_from_corners(width: f64, height: f64, end: &[Point2; 4]) -> Result<Homography> {
    let start = corners(width, height);
    let h = homography_from_4pt(end, &start)?;
    let cx = end.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = end.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let w = h.apply_homogeneous(Point2::new(cx, cy))[2];
    Ok(if w < 0.0 { h.scaled(-1.0) } else { h })
}

fn sample_perspective_corners(distortion_scale: f64, width: f64, height: f64, rng: &mut AugRng) -> [Point2; 4] {
    let dx = distortion_scale * width / 2.0;
    let dy = distortion_scale * height / 2.0;
    let mut draw = |m: f64| if m > 0.0 { rng.random_range(0.0..=m) } else { 0.0 };
    let start = corners(width, height);
    // inward: +x on the left edge, −x on the right, likewise for y
    let sx = [1.0, -1.0, -1.0, 1.0];
    let sy = [1.0, 1.0, -1.0, -1.0];
    let mut end = start;
    for i in 0..4 {
        end[i].x += sx[i] * draw(dx);
        end[i].y += sy[i] * draw(dy);
    }
    end
}

/// Random perspective: each corner moves inward by up to
/// `distortion_scale · (width/2, height/2)`.
///
/// Degenerate draws are resampled up to 8 times before failing.
pub fn perspective_homography(distortion_scale: f64, width: f64, height: f64, rng: &mut AugRng) -> Result<Homography> {
    perspective_with_params(distortion_scale, width, height, rng).map(|(h, _)| h)
}

fn perspective_with_params(
    distortion_scale: f64,
    width: f64,
    height: f64,
    rng: &mut AugRng,
) -> Result<(Homography, AugmentationParams)> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::InvalidArgument("perspective needs a positive raster size".into()));
    }
    let mut last = None;
    for _ in 0..8 {
        let end = sample_perspective_corners(distortion_scale, width, height, rng);
        match perspective_from_corners(width, height, &end) {
            Ok(h) => {
                let params = AugmentationParams::Perspective {
                    start: corners(width, height).map(Into::into),
                    end: end.map(Into::into),
                };
                return Ok((h, params));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::DegenerateQuad("no valid perspective draw".into())))
}

fn symmetric(rng: &mut AugRng, max: f64) -> f64 {
    if max > 0.0 {
        rng.random_range(-max..=max)
    } else {
        0.0
    }
}

fn uniform(rng: &mut AugRng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..=range[1])
    } else {
        range[0]
    }
}

/// Random resized crop: area and relative aspect drawn from the ranges, with
/// up to 10 rejection rounds for crops that do not fit; falls back to the
/// whole raster.
fn sample_crop(ranges: &AugmentationRanges, width: f64, height: f64, rng: &mut AugRng) -> [f64; 4] {
    let [lo, hi] = ranges.crop_aspect_range;
    for _ in 0..10 {
        let area = uniform(rng, ranges.crop_area_range);
        let aspect = if hi > lo {
            (rng.random_range(lo.ln()..=hi.ln())).exp()
        } else {
            lo
        };
        let cw = width * (area * aspect).sqrt();
        let ch = height * (area / aspect).sqrt();
        if cw <= width * (1.0 + 1e-12) && ch <= height * (1.0 + 1e-12) {
            let cw = cw.min(width);
            let ch = ch.min(height);
            let x = uniform(rng, [0.0, width - cw]);
            let y = uniform(rng, [0.0, height - ch]);
            return [x, y, cw, ch];
        }
    }
    [0.0, 0.0, width, height]
}

fn build(
    kind: AugmentationKind,
    ranges: &AugmentationRanges,
    width: f64,
    height: f64,
    rng: &mut AugRng,
) -> Result<(Homography, AugmentationParams)> {
    Ok(match kind {
        AugmentationKind::None => (Homography::identity(), AugmentationParams::None),
        AugmentationKind::HFlip => (hflip_homography(width), AugmentationParams::HFlip { width }),
        AugmentationKind::VFlip => (vflip_homography(height), AugmentationParams::VFlip { height }),
        AugmentationKind::Affine => {
            let rotation_deg = symmetric(rng, ranges.max_rotation_deg);
            let tx = symmetric(rng, ranges.max_translate_frac * width);
            let ty = symmetric(rng, ranges.max_translate_frac * height);
            let scale = uniform(rng, ranges.scale_range);
            let shear_deg = symmetric(rng, ranges.max_shear_deg);
            let center = Point2::new((width - 1.0) / 2.0, (height - 1.0) / 2.0);
            let h = affine_homography(rotation_deg, tx, ty, scale, shear_deg, center)?;
            (
                h,
                AugmentationParams::Affine {
                    rotation_deg,
                    translate: [tx, ty],
                    scale,
                    shear_deg,
                    center: center.into(),
                },
            )
        }
        AugmentationKind::Perspective => perspective_with_params(ranges.perspective_distortion, width, height, rng)?,
        AugmentationKind::Crop => {
            let [x, y, w, h] = sample_crop(ranges, width, height, rng);
            (
                crop_homography(x, y, w, h, width, height)?,
                AugmentationParams::Crop { x, y, width: w, height: h },
            )
        }
    })
}

fn sample(
    kind: AugmentationKind,
    ranges: &AugmentationRanges,
    proportion: f64,
    width: f64,
    height: f64,
    rng: &mut AugRng,
) -> Result<(AugmentationKind, Homography, AugmentationParams)> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::InvalidArgument("augmentation needs a positive raster size".into()));
    }
    let apply = rng.random::<f64>() < proportion;
    if !apply || kind == AugmentationKind::None {
        return Ok((AugmentationKind::None, Homography::identity(), AugmentationParams::None));
    }
    let (h, params) = build(kind, ranges, width, height, rng)?;
    Ok((kind, h, params))
}

/// Draws a view augmentation of `kind`; with probability `1 − view_proportion`
/// the result is the identity with kind `None`.
pub fn sample_view_augmentation(
    kind: AugmentationKind,
    ranges: &AugmentationRanges,
    image_w: usize,
    image_h: usize,
    rng: &mut AugRng,
) -> Result<ViewAugmentation> {
    let (kind, h, params) = sample(kind, ranges, ranges.view_proportion, image_w as f64, image_h as f64, rng)?;
    Ok(ViewAugmentation { kind, h, params })
}

/// Draws a scene augmentation in grid-cell coordinates: translations are
/// fractions of the grid size and rotations turn about the grid center.
pub fn sample_scene_augmentation(
    kind: AugmentationKind,
    ranges: &AugmentationRanges,
    grid: &GroundGrid,
    rng: &mut AugRng,
) -> Result<SceneAugmentation> {
    let (kind, h, params) = sample(kind, ranges, ranges.scene_proportion, grid.cols as f64, grid.rows as f64, rng)?;
    Ok(SceneAugmentation { kind, h, params })
}

/// Augmented grid-to-pixel projection `Hv⁻¹ · T · Hs`.
pub fn augment_projection(t_grid: &Homography, hv: &Homography, hs: &Homography) -> Result<Homography> {
    Ok(hv.invert()?.compose(&t_grid.compose(hs)))
}

/// One view after augmentation: the warped raster, its validity, and the
/// compensated grid-to-pixel projection.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedView {
    pub image: ImageBuffer,
    pub mask: ValidMask,
    pub t_grid: Homography,
}

/// Warps `image` by `hv` (same output size) and updates its projection to
/// `Hv⁻¹ · T · Hs`. Samples touching masked-out source pixels become invalid.
pub fn augment_view(
    image: &ImageBuffer,
    mask: Option<&ValidMask>,
    t_grid: &Homography,
    hv: &Homography,
    hs: &Homography,
) -> Result<AugmentedView> {
    let t_grid = augment_projection(t_grid, hv, hs)?;
    let (image, mask) = warp_image_masked(image, mask, hv, image.width(), image.height());
    Ok(AugmentedView { image, mask, t_grid })
}

/// A transformed annotation; `point` is `None` when it maps to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedPoint {
    pub point: Option<Point2>,
    pub visible: bool,
}

fn map_all(points: &[Point2], h: &Homography, inside: impl Fn(Point2) -> bool) -> Result<Vec<MappedPoint>> {
    let inv = h.invert()?;
    Ok(points
        .iter()
        .map(|&p| match inv.apply_point(p) {
            Ok(q) => MappedPoint {
                point: Some(q),
                visible: inside(q),
            },
            Err(_) => MappedPoint {
                point: None,
                visible: false,
            },
        })
        .collect())
}

/// Moves image annotations into the augmented view: `u ↦ Hv⁻¹·u`. Points
/// that leave `[0, w−1] × [0, h−1]` are kept but flagged invisible.
pub fn transform_view_annotations(points_px: &[Point2], hv: &Homography, image_w: usize, image_h: usize) -> Result<Vec<MappedPoint>> {
    let (w, h) = (image_w as f64, image_h as f64);
    map_all(points_px, hv, |q| q.x >= 0.0 && q.y >= 0.0 && q.x <= w - 1.0 && q.y <= h - 1.0)
}

/// Moves ground-truth cells into the augmented scene: `g ↦ Hs⁻¹·g`.
pub fn transform_scene_annotations(cells: &[Point2], hs: &Homography, grid: &GroundGrid) -> Result<Vec<MappedPoint>> {
    map_all(cells, hs, |q| grid.contains(q))
}
