//! Inverse-mapping raster warps with bilinear sampling.
//!
//! Samples outside the source (any of the four bilinear neighbors out of
//! bounds, or masked out) produce zero and a `false` mask entry. Arithmetic
//! is done in `f64`, storage is `f32`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GroundGrid, Homography, Point2};

/// Projected samples with homogeneous `w` at or below this are behind the camera.
pub const BEHIND_CAMERA_EPS: f64 = 1e-9;

/// Dense row-major raster, channels interleaved, samples nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        assert!(channels >= 1, "image needs at least one channel");
        ImageBuffer {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::ShapeMismatch("image needs at least one channel".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}x{} image needs {} samples, got {}",
                width,
                height,
                channels,
                width * height * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("image samples must be finite".into()));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    /// Single-channel image from a function of `(x, y)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        ImageBuffer {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

/// Per-sample validity of a raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl ValidMask {
    pub fn new(width: usize, height: usize, value: bool) -> Self {
        ValidMask {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn and(&self, other: &ValidMask) -> ValidMask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        ValidMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect(),
        }
    }
}

/// A raster laid over a [`GroundGrid`]: `width = cols`, `height = rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMap {
    grid: GroundGrid,
    raster: ImageBuffer,
}

impl GroundMap {
    pub fn zeros(grid: GroundGrid, channels: usize) -> Self {
        GroundMap {
            grid,
            raster: ImageBuffer::new(grid.cols, grid.rows, channels),
        }
    }

    pub fn from_raster(grid: GroundGrid, raster: ImageBuffer) -> Result<Self> {
        if raster.width != grid.cols || raster.height != grid.rows {
            return Err(Error::GridMismatch(format!(
                "raster is {}x{}, grid is {}x{}",
                raster.width, raster.height, grid.cols, grid.rows
            )));
        }
        Ok(GroundMap { grid, raster })
    }

    pub fn grid(&self) -> &GroundGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.raster.channels
    }

    pub fn raster(&self) -> &ImageBuffer {
        &self.raster
    }

    pub fn raster_mut(&mut self) -> &mut ImageBuffer {
        &mut self.raster
    }

    pub fn into_raster(self) -> ImageBuffer {
        self.raster
    }

    pub fn data(&self) -> &[f32] {
        &self.raster.data
    }

    /// Single-channel value at `(col, row)`.
    #[inline]
    pub fn at(&self, col: usize, row: usize) -> f32 {
        self.raster.get(col, row, 0)
    }
}

#[inline]
fn neighbors(pos: f64, len: usize) -> Option<(usize, usize, f64)> {
    if !(pos >= 0.0 && pos <= (len - 1) as f64) {
        return None;
    }
    let i0 = (pos.floor() as usize).min(len.saturating_sub(2));
    let i1 = (i0 + 1).min(len - 1);
    Some((i0, i1, pos - i0 as f64))
}

/// Bilinear sample into `out`; returns validity. `out` is zeroed when invalid.
#[inline]
fn sample_into(img: &ImageBuffer, mask: Option<&ValidMask>, x: f64, y: f64, out: &mut [f32]) -> bool {
    if img.width == 0 || img.height == 0 {
        out.fill(0.0);
        return false;
    }
    let (Some((x0, x1, fx)), Some((y0, y1, fy))) = (neighbors(x, img.width), neighbors(y, img.height)) else {
        out.fill(0.0);
        return false;
    };
    let w = [
        ((1.0 - fx) * (1.0 - fy), x0, y0),
        (fx * (1.0 - fy), x1, y0),
        ((1.0 - fx) * fy, x0, y1),
        (fx * fy, x1, y1),
    ];
    // zero-weight neighbors are neither read nor required to be valid
    if let Some(m) = mask {
        if w.iter().any(|&(wt, x, y)| wt != 0.0 && !m.get(x, y)) {
            out.fill(0.0);
            return false;
        }
    }
    let c = img.channels;
    for (ch, o) in out.iter_mut().enumerate() {
        let mut v = 0.0_f64;
        for &(wt, x, y) in &w {
            if wt != 0.0 {
                v += wt * img.data[(y * img.width + x) * c + ch] as f64;
            }
        }
        *o = v as f32;
    }
    true
}

/// Four-neighbor bilinear blend at continuous pixel `(x, y)`.
///
/// Invalid (and zero) unless `0 ≤ x ≤ w−1` and `0 ≤ y ≤ h−1`.
pub fn bilinear_sample(img: &ImageBuffer, x: f64, y: f64) -> (Vec<f32>, bool) {
    let mut out = vec![0.0; img.channels];
    let valid = sample_into(img, None, x, y, &mut out);
    (out, valid)
}

/// How an output coordinate is rejected before sampling.
#[derive(Clone, Copy)]
enum DepthRule {
    /// `|w| < 1e-12` only.
    Finite,
    /// `w ≤ BEHIND_CAMERA_EPS`.
    InFront,
}

fn warp_core(
    img: &ImageBuffer,
    src_mask: Option<&ValidMask>,
    h: &Homography,
    out_w: usize,
    out_h: usize,
    rule: DepthRule,
) -> (ImageBuffer, ValidMask) {
    if let Some(m) = src_mask {
        assert_eq!((m.width, m.height), (img.width, img.height), "mask must match image");
    }
    let c = img.channels;
    let mut out = ImageBuffer::new(out_w, out_h, c);
    let mut mask = ValidMask::new(out_w, out_h, false);
    if out_w == 0 || out_h == 0 {
        return (out, mask);
    }
    let m = *h.matrix();
    out.data
        .par_chunks_mut(out_w * c)
        .zip(mask.data.par_chunks_mut(out_w))
        .enumerate()
        .for_each(|(row, (orow, mrow))| {
            let y = row as f64;
            // homogeneous coordinates are affine in x along a row
            let bx = m[0][1] * y + m[0][2];
            let by = m[1][1] * y + m[1][2];
            let bw = m[2][1] * y + m[2][2];
            for col in 0..out_w {
                let x = col as f64;
                let hx = m[0][0] * x + bx;
                let hy = m[1][0] * x + by;
                let hw = m[2][0] * x + bw;
                let ok = match rule {
                    DepthRule::Finite => hw.abs() >= crate::geometry::SINGULAR_EPS,
                    DepthRule::InFront => hw > BEHIND_CAMERA_EPS,
                };
                let dst = &mut orow[col * c..(col + 1) * c];
                mrow[col] = ok && sample_into(img, src_mask, hx / hw, hy / hw, dst);
            }
        });
    (out, mask)
}

/// Output pixel `q` samples `img` at `h·q`.
pub fn warp_image(img: &ImageBuffer, h: &Homography, out_w: usize, out_h: usize) -> (ImageBuffer, ValidMask) {
    warp_core(img, None, h, out_w, out_h, DepthRule::Finite)
}

/// [`warp_image`] that also rejects samples touching masked-out source pixels.
pub fn warp_image_masked(
    img: &ImageBuffer,
    src_mask: Option<&ValidMask>,
    h: &Homography,
    out_w: usize,
    out_h: usize,
) -> (ImageBuffer, ValidMask) {
    warp_core(img, src_mask, h, out_w, out_h, DepthRule::Finite)
}

/// Ground cell `(col, row)` samples `img` at `t_grid·(col, row, 1)`; cells
/// behind the camera are invalid.
pub fn project_to_ground(img: &ImageBuffer, t_grid: &Homography, grid: &GroundGrid) -> (GroundMap, ValidMask) {
    project_to_ground_masked(img, None, t_grid, grid)
}

pub fn project_to_ground_masked(
    img: &ImageBuffer,
    src_mask: Option<&ValidMask>,
    t_grid: &Homography,
    grid: &GroundGrid,
) -> (GroundMap, ValidMask) {
    let (raster, mask) = warp_core(img, src_mask, t_grid, grid.cols, grid.rows, DepthRule::InFront);
    (GroundMap { grid: *grid, raster }, mask)
}

/// Bilinear resize keeping pixel centers aligned, `x_src = (x + 0.5)·W/w − 0.5`,
/// with source coordinates clamped to the raster so every output is valid.
pub fn resize_image(img: &ImageBuffer, out_w: usize, out_h: usize) -> ImageBuffer {
    if (out_w, out_h) == (img.width, img.height) {
        return img.clone();
    }
    let c = img.channels;
    let mut out = ImageBuffer::new(out_w, out_h, c);
    if out_w == 0 || out_h == 0 || img.width == 0 || img.height == 0 {
        return out;
    }
    let sx = img.width as f64 / out_w as f64;
    let sy = img.height as f64 / out_h as f64;
    out.data.par_chunks_mut(out_w * c).enumerate().for_each(|(row, orow)| {
        let y = ((row as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        for col in 0..out_w {
            let x = ((col as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            sample_into(img, None, x, y, &mut orow[col * c..(col + 1) * c]);
        }
    });
    out
}

/// Grid coordinates of an image pixel under `t_grid`, if the pixel sees the ground.
pub fn pixel_to_grid(t_grid: &Homography, px: Point2) -> Option<Point2> {
    let inv = t_grid.invert().ok()?;
    let g = inv.apply_point(px).ok()?;
    let [_, _, w] = t_grid.apply_homogeneous(g);
    (w > BEHIND_CAMERA_EPS).then_some(g)
}
