//! Homography algebra, pinhole calibration and ground-plane projection.
//!
//! Pixel coordinates are continuous with pixel centers at integer positions:
//! the top-left pixel center is `(0, 0)`, `x` runs along columns and `y` along
//! rows. Grid coordinates follow the same rule with cells in place of pixels.
//! The world frame is right-handed with the ground plane at `z = 0`, in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinant magnitude below which a 3×3 matrix is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

pub type Mat3 = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inverse through the adjugate. Fails when `|det| <= SINGULAR_EPS`.
pub fn mat_inv(a: &Mat3) -> Result<Mat3> {
    let d = det(a);
    if !(d.abs() > SINGULAR_EPS) {
        return Err(Error::SingularMatrix { det: d });
    }
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let adj = [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ];
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = adj[i][j] / d;
        }
    }
    Ok(out)
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// A 2-D point; pixels, grid cells or meters depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// An invertible 3×3 matrix acting on homogeneous 2-D points.
///
/// Stored un-normalized. [`Homography::normalized`] scales so that
/// `m[2][2] = 1` (or the largest-magnitude entry is 1 when `m[2][2] ≈ 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Mat3,
}

impl Homography {
    pub const IDENTITY: Homography = Homography { m: IDENTITY };

    pub fn new(m: Mat3) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite homography entry".into()));
        }
        let d = det(&m);
        if !(d.abs() > SINGULAR_EPS) {
            return Err(Error::SingularMatrix { det: d });
        }
        Ok(Homography { m })
    }

    /// Skips the determinant check. Use only for products of invertible matrices.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Homography { m }
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    pub fn scaling(sx: f64, sy: f64) -> Result<Self> {
        Self::new([[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn det(&self) -> f64 {
        det(&self.m)
    }

    /// Row-major entries.
    pub fn to_array(&self) -> [f64; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn from_array(v: [f64; 9]) -> Result<Self> {
        Self::new([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    /// Matrix product `self · other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        Homography {
            m: mat_mul(&self.m, &other.m),
        }
    }

    pub fn invert(&self) -> Result<Homography> {
        mat_inv(&self.m).map(|m| Homography { m })
    }

    pub fn scaled(&self, s: f64) -> Homography {
        let mut m = self.m;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        Homography { m }
    }

    /// `m · (x, y, 1)` without division.
    #[inline]
    pub fn apply_homogeneous(&self, p: Point2) -> Vec3 {
        mat_vec(&self.m, &[p.x, p.y, 1.0])
    }

    pub fn apply_point(&self, p: Point2) -> Result<Point2> {
        let [x, y, w] = self.apply_homogeneous(p);
        if !(w.abs() >= SINGULAR_EPS) {
            return Err(Error::PointAtInfinity { w });
        }
        Ok(Point2::new(x / w, y / w))
    }

    pub fn normalized(&self) -> Homography {
        let m22 = self.m[2][2];
        let s = if m22.abs() > SINGULAR_EPS {
            m22
        } else {
            let big = self
                .m
                .iter()
                .flatten()
                .copied()
                .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
            if big == 0.0 {
                1.0
            } else {
                big
            }
        };
        self.scaled(1.0 / s)
    }

    /// Elementwise comparison after normalization.
    pub fn approx_eq(&self, other: &Homography, tol: f64) -> bool {
        let a = self.normalized();
        let b = other.normalized();
        a.m.iter()
            .flatten()
            .zip(b.m.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= tol)
    }

    /// True when the last row is exactly `(0, 0, 1)`.
    pub fn is_affine(&self) -> bool {
        self.m[2] == [0.0, 0.0, 1.0]
    }
}

impl Default for Homography {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Serialize for Homography {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homography {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 9]>::deserialize(d)?;
        Homography::from_array(v).map_err(serde::de::Error::custom)
    }
}

/// Rotation matrix from an axis-angle vector (radians).
pub fn rodrigues_to_rotation(r: Vec3) -> Mat3 {
    let theta = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if theta < 1e-12 {
        return IDENTITY;
    }
    let k = [r[0] / theta, r[1] / theta, r[2] / theta];
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    let kx2 = mat_mul(&kx, &kx);
    let (s, c) = theta.sin_cos();
    let mut out = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += s * kx[i][j] + (1.0 - c) * kx2[i][j];
        }
    }
    out
}

/// Largest deviation of `RᵀR` from the identity.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    let rtr = mat_mul(&transpose(r), r);
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((rtr[i][j] - want).abs());
        }
    }
    worst
}

/// Nearest rotation via the Newton polar iteration `R ← (R + R⁻ᵀ) / 2`.
pub fn orthonormalize(r: &Mat3) -> Result<Mat3> {
    let mut cur = *r;
    for _ in 0..32 {
        let inv_t = transpose(&mat_inv(&cur)?);
        let mut next = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                next[i][j] = 0.5 * (cur[i][j] + inv_t[i][j]);
            }
        }
        let done = orthonormality_error(&next) < 1e-15;
        cur = next;
        if done {
            break;
        }
    }
    Ok(cur)
}

/// Pinhole camera: intrinsics `k`, world-to-camera rotation `r` and translation `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraCalibration {
    k: Mat3,
    r: Mat3,
    t: Vec3,
}

impl CameraCalibration {
    pub fn new(k: Mat3, r: Mat3, t: Vec3) -> Result<Self> {
        if k.iter().flatten().chain(r.iter().flatten()).chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCalibration("non-finite entry".into()));
        }
        if k[1][0] != 0.0 || k[2][0] != 0.0 || k[2][1] != 0.0 {
            return Err(Error::InvalidCalibration("K must be upper-triangular".into()));
        }
        if k[2][2] != 1.0 {
            return Err(Error::InvalidCalibration("K[2][2] must be 1".into()));
        }
        if !(k[0][0] > 0.0 && k[1][1] > 0.0) {
            return Err(Error::InvalidCalibration("focal lengths must be positive".into()));
        }
        let ortho = orthonormality_error(&r);
        let d = det(&r);
        if ortho >= 1e-9 || (d - 1.0).abs() >= 1e-9 {
            return Err(Error::InvalidCalibration(format!(
                "R is not a rotation (|RᵀR − I|∞ = {ortho:e}, det = {d})"
            )));
        }
        Ok(CameraCalibration { k, r, t })
    }

    pub fn k(&self) -> &Mat3 {
        &self.k
    }

    pub fn r(&self) -> &Mat3 {
        &self.r
    }

    pub fn t(&self) -> &Vec3 {
        &self.t
    }

    /// World point to camera frame: `R·p + t`.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let rp = mat_vec(&self.r, &p);
        [rp[0] + self.t[0], rp[1] + self.t[1], rp[2] + self.t[2]]
    }

    /// Optical center in world coordinates, `−Rᵀt`.
    pub fn center(&self) -> Vec3 {
        let c = mat_vec(&transpose(&self.r), &self.t);
        [-c[0], -c[1], -c[2]]
    }

    /// Full 3×4 projection; `None` for points at or behind the camera.
    pub fn project(&self, p: Vec3) -> Option<Point2> {
        let pc = self.to_camera(p);
        if pc[2] <= 1e-9 {
            return None;
        }
        let h = mat_vec(&self.k, &pc);
        Some(Point2::new(h[0] / h[2], h[1] / h[2]))
    }

    /// Intrinsics after resizing the image by `(sx, sy)`, pixel centers kept
    /// at integer positions: `x' = (x + 0.5)·sx − 0.5`.
    pub fn with_scaled_intrinsics(&self, sx: f64, sy: f64) -> Result<Self> {
        let mut k = self.k;
        k[0][0] *= sx;
        k[0][1] *= sx;
        k[0][2] = (k[0][2] + 0.5) * sx - 0.5;
        k[1][1] *= sy;
        k[1][2] = (k[1][2] + 0.5) * sy - 0.5;
        Self::new(k, self.r, self.t)
    }
}

/// Ground-plane (`z = 0`) restriction of the camera projection, `K·[r₁ r₂ t]`.
///
/// Maps world ground coordinates in meters to homogeneous pixels.
pub fn ground_projection_matrix(c: &CameraCalibration) -> Result<Homography> {
    let r = &c.r;
    let rt = [
        [r[0][0], r[0][1], c.t[0]],
        [r[1][0], r[1][1], c.t[1]],
        [r[2][0], r[2][1], c.t[2]],
    ];
    let m = mat_mul(&c.k, &rt);
    let d = det(&m);
    if !(d.abs() > SINGULAR_EPS) {
        return Err(Error::DegenerateProjection { det: d });
    }
    Ok(Homography { m })
}

/// Discretization of the ground plane into square cells.
///
/// Cell `(col, row)` is the grid point `Point2 { x: col, y: row }`; its center
/// lies at world `origin + (col, row) · cell_size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundGrid {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub origin: Point2,
}

impl GroundGrid {
    pub fn new(rows: usize, cols: usize, cell_size: f64, origin: Point2) -> Result<Self> {
        let g = GroundGrid {
            rows,
            cols,
            cell_size,
            origin,
        };
        g.validate()?;
        Ok(g)
    }

    /// 180 × 80 cells of 20 cm, the WILDTRACK ground map.
    pub fn wildtrack() -> Self {
        GroundGrid {
            rows: 80,
            cols: 180,
            cell_size: 0.2,
            origin: Point2::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid must have at least one cell, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) || !self.origin.is_finite() {
            return Err(Error::InvalidArgument("grid cell size and origin must be finite, cell size > 0".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid_to_ground(&self, cell: Point2) -> Point2 {
        Point2::new(
            self.origin.x + cell.x * self.cell_size,
            self.origin.y + cell.y * self.cell_size,
        )
    }

    pub fn ground_to_grid(&self, world: Point2) -> Point2 {
        Point2::new(
            (world.x - self.origin.x) / self.cell_size,
            (world.y - self.origin.y) / self.cell_size,
        )
    }

    /// True when `cell` lies inside the closed extent of cell centers.
    pub fn contains(&self, cell: Point2) -> bool {
        cell.x >= 0.0 && cell.y >= 0.0 && cell.x <= (self.cols - 1) as f64 && cell.y <= (self.rows - 1) as f64
    }

    /// Affine map from grid cells to world meters.
    pub fn grid_homography(&self) -> Homography {
        Homography {
            m: [
                [self.cell_size, 0.0, self.origin.x],
                [0.0, self.cell_size, self.origin.y],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    /// Grid-to-pixel projection `T · G` for one camera.
    pub fn projection_for(&self, c: &CameraCalibration) -> Result<Homography> {
        Ok(ground_projection_matrix(c)?.compose(&self.grid_homography()))
    }
}

pub(crate) fn normalize3(v: Vec3) -> Option<Vec3> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

pub(crate) fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    cross(a, b)
}
