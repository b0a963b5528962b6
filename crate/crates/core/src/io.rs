//! File formats: calibration JSON, annotation and detection JSON lines,
//! MVGRID1 rasters, PNG images, tool configuration and dataset descriptors.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::augmentation::AugmentationRanges;
use crate::error::{Error, Result};
use crate::geometry::{orthonormality_error, orthonormalize, rodrigues_to_rotation, CameraCalibration, GroundGrid, Homography, Point2};
use crate::pipeline::DetectionSet;
use crate::synth::SceneConfig;
use crate::warp::{resize_image, ImageBuffer, ValidMask};

pub const GRID_MAGIC: &[u8; 8] = b"MVGRID1\0";
const GRID_HEADER_LEN: usize = 20;

/// Rotations within this of orthonormal are repaired on load; beyond it they are rejected.
pub const ORTHONORMAL_REPAIR_TOL: f64 = 1e-6;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::io(path, e))
}

pub fn create_dir_all(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn check_finite(path: &Path, line: Option<usize>, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::parse(path, line, "non-finite number"))
    }
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str, line: Option<usize>) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(path, line, e))
}

fn to_json_pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("value serializes");
    s.push(b'\n');
    s
}

// ---------------------------------------------------------------- calibration

/// On-disk calibration: `K` and `R` row-major; either `R` or `rvec` (axis-angle).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    #[serde(rename = "K")]
    pub k: [f64; 9],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rvec: Option<[f64; 3]>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 9]>,
    pub t: [f64; 3],
}

fn rows3(v: &[f64; 9]) -> [[f64; 3]; 3] {
    [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]
}

fn flat3(m: &[[f64; 3]; 3]) -> [f64; 9] {
    [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
}

impl CalibrationFile {
    pub fn from_calibration(c: &CameraCalibration) -> Self {
        CalibrationFile {
            k: flat3(c.k()),
            rvec: None,
            r: Some(flat3(c.r())),
            t: *c.t(),
        }
    }

    pub fn to_calibration(&self) -> Result<CameraCalibration> {
        let r = match (self.r, self.rvec) {
            (Some(r), None) => rows3(&r),
            (None, Some(v)) => rodrigues_to_rotation(v),
            (Some(_), Some(_)) => return Err(Error::InvalidCalibration("give either R or rvec, not both".into())),
            (None, None) => return Err(Error::InvalidCalibration("missing R or rvec".into())),
        };
        let err = orthonormality_error(&r);
        let r = if err < 1e-9 {
            r
        } else if err < ORTHONORMAL_REPAIR_TOL {
            orthonormalize(&r)?
        } else {
            return Err(Error::InvalidCalibration(format!(
                "R is not orthonormal (|RᵀR − I|∞ = {err:e})"
            )));
        };
        CameraCalibration::new(rows3(&self.k), r, self.t)
    }
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<CameraCalibration> {
    let path = path.as_ref();
    let file: CalibrationFile = parse_json(path, &read_string(path)?, None)?;
    check_finite(
        path,
        None,
        file.k
            .iter()
            .chain(file.t.iter())
            .chain(file.r.iter().flatten())
            .chain(file.rvec.iter().flatten())
            .copied(),
    )?;
    file.to_calibration()
}

pub fn save_calibration(path: impl AsRef<Path>, c: &CameraCalibration) -> Result<()> {
    write_atomic(path.as_ref(), &to_json_pretty(&CalibrationFile::from_calibration(c)))
}

// ---------------------------------------------------------------- annotations

/// One annotated person in one frame. `views` maps view ids to feet pixels;
/// a missing view means the person is not visible there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub frame: u64,
    pub id: u64,
    pub world: [f64; 2],
    #[serde(default)]
    pub views: BTreeMap<String, [f64; 2]>,
}

impl AnnotationRecord {
    pub fn world_point(&self) -> Point2 {
        self.world.into()
    }

    pub fn view_pixel(&self, view: usize) -> Option<Point2> {
        self.views.get(&view.to_string()).map(|&p| p.into())
    }
}

fn load_jsonl<T: DeserializeOwned>(path: &Path, finite: impl Fn(&T) -> Vec<f64>) -> Result<Vec<T>> {
    let text = read_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = parse_json(path, line, Some(i + 1))?;
        check_finite(path, Some(i + 1), finite(&rec))?;
        out.push(rec);
    }
    Ok(out)
}

fn save_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("record serializes");
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    load_jsonl(path.as_ref(), |r: &AnnotationRecord| {
        r.world.iter().chain(r.views.values().flatten()).copied().collect()
    })
}

pub fn save_annotations(path: impl AsRef<Path>, records: &[AnnotationRecord]) -> Result<()> {
    save_jsonl(path.as_ref(), records)
}

/// Records grouped by frame, in frame order.
pub fn annotations_by_frame(records: &[AnnotationRecord]) -> BTreeMap<u64, Vec<&AnnotationRecord>> {
    let mut out: BTreeMap<u64, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.frame).or_default().push(r);
    }
    out
}

// ---------------------------------------------------------------- detections

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame: u64,
    /// Grid position in cells.
    pub cell: [f64; 2],
    /// Ground position in meters.
    pub world: [f64; 2],
    pub score: f64,
}

pub fn detection_records(set: &DetectionSet, grid: &GroundGrid) -> Vec<DetectionRecord> {
    set.detections
        .iter()
        .map(|d| DetectionRecord {
            frame: set.frame,
            cell: d.position.into(),
            world: grid.grid_to_ground(d.position).into(),
            score: d.score,
        })
        .collect()
}

pub fn save_detections(path: impl AsRef<Path>, sets: &[DetectionSet], grid: &GroundGrid) -> Result<()> {
    let records: Vec<DetectionRecord> = sets.iter().flat_map(|s| detection_records(s, grid)).collect();
    save_jsonl(path.as_ref(), &records)
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<Vec<DetectionRecord>> {
    let path = path.as_ref();
    let recs = load_jsonl(path, |r: &DetectionRecord| {
        r.cell.iter().chain(&r.world).chain([&r.score]).copied().collect()
    })?;
    if let Some(bad) = recs.iter().position(|r| !(0.0..=1.0).contains(&r.score)) {
        return Err(Error::parse(path, None, format!("record {} has a score outside [0, 1]", bad + 1)));
    }
    Ok(recs)
}

// ---------------------------------------------------------------- MVGRID1

/// Encodes a raster as MVGRID1: magic, `u32` rows, cols, channels, then
/// little-endian `f32` samples, row-major, channels interleaved.
pub fn encode_grid_raster(img: &ImageBuffer) -> Result<Vec<u8>> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::InvalidArgument("MVGRID1 rasters must have at least one cell".into()));
    }
    let dims = [img.height(), img.width(), img.channels()];
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + 4 * img.data().len());
    out.extend_from_slice(GRID_MAGIC);
    for d in dims {
        let d = u32::try_from(d).map_err(|_| Error::InvalidArgument("raster dimension exceeds u32".into()))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_grid_raster(path: &Path, bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.len() < 8 || &bytes[..8] != GRID_MAGIC {
        return Err(Error::VersionMismatch {
            path: path.into(),
            msg: "missing MVGRID1 magic".into(),
        });
    }
    if bytes.len() < GRID_HEADER_LEN {
        return Err(Error::parse(path, None, "truncated MVGRID1 header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let (rows, cols, channels) = (u32_at(8), u32_at(12), u32_at(16));
    if rows == 0 || cols == 0 || channels == 0 {
        return Err(Error::parse(path, None, format!("empty raster {rows}x{cols}x{channels}")));
    }
    let n = rows
        .checked_mul(cols)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::parse(path, None, "raster too large"))?;
    if bytes.len() != GRID_HEADER_LEN + 4 * n {
        return Err(Error::parse(
            path,
            None,
            format!("expected {} bytes, found {}", GRID_HEADER_LEN + 4 * n, bytes.len()),
        ));
    }
    let data: Vec<f32> = bytes[GRID_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::parse(path, None, "non-finite sample"));
    }
    ImageBuffer::from_vec(cols, rows, channels, data)
}

pub fn save_grid_raster(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<()> {
    write_atomic(path.as_ref(), &encode_grid_raster(img)?)
}

pub fn load_grid_raster(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    decode_grid_raster(path, &read_bytes(path)?)
}

// ---------------------------------------------------------------- PNG

/// Loads an 8-bit PNG as normalized samples (gray → 1 channel, RGB → 3, RGBA → 4).
pub fn load_png(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let img = image::load_from_memory_with_format(&read_bytes(path)?, image::ImageFormat::Png)
        .map_err(|e| Error::parse(path, None, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, raw) = match img {
        image::DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        image::DynamicImage::ImageRgba8(b) => (4, b.into_raw()),
        other if other.color().has_color() => (3, other.into_rgb8().into_raw()),
        other => (1, other.into_luma8().into_raw()),
    };
    ImageBuffer::from_vec(w, h, channels, raw.into_iter().map(|v| v as f32 / 255.0).collect())
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>> {
    let color = match img.channels() {
        1 => image::ExtendedColorType::L8,
        3 => image::ExtendedColorType::Rgb8,
        4 => image::ExtendedColorType::Rgba8,
        c => return Err(Error::ShapeMismatch(format!("cannot write a {c}-channel PNG"))),
    };
    let raw: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    let mut out = Vec::new();
    image::ImageEncoder::write_image(
        image::codecs::png::PngEncoder::new(&mut out),
        &raw,
        img.width() as u32,
        img.height() as u32,
        color,
    )
    .map_err(|e| Error::InvalidArgument(format!("PNG encoding failed: {e}")))?;
    Ok(out)
}

pub fn save_png(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<()> {
    write_atomic(path.as_ref(), &encode_png(img)?)
}

/// Loads a raster by extension: `.mvgrid` as MVGRID1, anything else as PNG.
pub fn load_raster(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "mvgrid") {
        load_grid_raster(path)
    } else {
        load_png(path)
    }
}

// ---------------------------------------------------------------- config

/// Everything a batch run needs besides its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub scene: SceneConfig,
    pub ranges: AugmentationRanges,
    pub grid: GroundGrid,
    pub seed: u64,
    /// Ground-truth splat width in cells.
    pub gt_sigma_cells: f64,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            scene: SceneConfig::default(),
            ranges: AugmentationRanges::default(),
            grid: SceneConfig::default_grid(),
            seed: 0,
            gt_sigma_cells: 1.0,
        }
    }
}

impl ToolConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.ranges.validate()?;
        self.grid.validate()?;
        if !(self.gt_sigma_cells > 0.0 && self.gt_sigma_cells.is_finite()) {
            return Err(Error::InvalidArgument("gt_sigma_cells must be positive".into()));
        }
        Ok(())
    }
}

pub fn load_tool_config(path: impl AsRef<Path>) -> Result<ToolConfig> {
    let path = path.as_ref();
    let cfg: ToolConfig = parse_json(path, &read_string(path)?, None)?;
    cfg.validate().map_err(|e| Error::parse(path, None, e))?;
    Ok(cfg)
}

pub fn save_tool_config(path: impl AsRef<Path>, cfg: &ToolConfig) -> Result<()> {
    write_atomic(path.as_ref(), &to_json_pretty(cfg))
}

// ---------------------------------------------------------------- projections

/// Per-frame grid-to-pixel projection override for one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRecord {
    pub frame: u64,
    pub view: usize,
    pub t_grid: Homography,
}

pub fn load_projections(path: impl AsRef<Path>) -> Result<Vec<ProjectionRecord>> {
    load_jsonl(path.as_ref(), |r: &ProjectionRecord| r.t_grid.to_array().to_vec())
}

pub fn save_projections(path: impl AsRef<Path>, records: &[ProjectionRecord]) -> Result<()> {
    save_jsonl(path.as_ref(), records)
}

pub fn save_homography(path: impl AsRef<Path>, h: &Homography) -> Result<()> {
    write_atomic(path.as_ref(), &to_json_pretty(h))
}

pub fn load_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    parse_json(path, &read_string(path)?, None)
}

// ---------------------------------------------------------------- datasets

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewEntry {
    pub calibration: PathBuf,
    /// Directory of `frame_NNNNN.{png,mvgrid}` rasters.
    pub images: PathBuf,
    /// Optional directory of `frame_NNNNN.png` validity masks (nonzero = valid).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<PathBuf>,
}

/// Dataset layout; relative paths resolve against the descriptor's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDescriptor {
    pub views: Vec<ViewEntry>,
    pub grid: GroundGrid,
    pub annotations: PathBuf,
    /// Images are resized to `[width, height]` before use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resize: Option<[usize; 2]>,
    /// Optional per-frame projection overrides (augmented datasets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<PathBuf>,
}

impl DatasetDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one view".into()));
        }
        self.grid.validate()?;
        if let Some([w, h]) = self.resize {
            if w == 0 || h == 0 {
                return Err(Error::InvalidArgument("resize target must be positive".into()));
            }
        }
        Ok(())
    }
}

pub const DATASET_FILE: &str = "dataset.json";

/// A loaded descriptor with its base directory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub descriptor: DatasetDescriptor,
}

/// Opens `path`, which may be the descriptor file or its directory.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = if path.is_dir() { path.join(DATASET_FILE) } else { path.to_path_buf() };
    let descriptor: DatasetDescriptor = parse_json(&file, &read_string(&file)?, None)?;
    descriptor.validate().map_err(|e| Error::parse(&file, None, e))?;
    let root = file.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Dataset { root, descriptor })
}

pub fn save_dataset(dir: impl AsRef<Path>, d: &DatasetDescriptor) -> Result<()> {
    write_atomic(&dir.as_ref().join(DATASET_FILE), &to_json_pretty(d))
}

pub fn frame_file_name(frame: u64, ext: &str) -> String {
    format!("frame_{frame:05}.{ext}")
}

fn parse_frame_name(name: &str) -> Option<u64> {
    let stem = name.strip_prefix("frame_")?;
    let (num, ext) = stem.split_once('.')?;
    matches!(ext, "png" | "mvgrid").then_some(())?;
    num.parse().ok()
}

impl Dataset {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn n_views(&self) -> usize {
        self.descriptor.views.len()
    }

    pub fn grid(&self) -> &GroundGrid {
        &self.descriptor.grid
    }

    pub fn calibration(&self, view: usize) -> Result<CameraCalibration> {
        load_calibration(self.resolve(&self.descriptor.views[view].calibration))
    }

    /// Frame ids present in the first view's image directory, ascending.
    pub fn frames(&self) -> Result<Vec<u64>> {
        let dir = self.resolve(&self.descriptor.views[0].images);
        let mut frames: Vec<u64> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .filter_map(|e| parse_frame_name(&e.file_name().to_string_lossy()))
            .collect();
        frames.sort_unstable();
        frames.dedup();
        Ok(frames)
    }

    pub fn image_path(&self, view: usize, frame: u64) -> Result<PathBuf> {
        let dir = self.resolve(&self.descriptor.views[view].images);
        ["mvgrid", "png"]
            .iter()
            .map(|ext| dir.join(frame_file_name(frame, ext)))
            .find(|p| p.exists())
            .ok_or_else(|| Error::io(dir.join(frame_file_name(frame, "png")), std::io::ErrorKind::NotFound.into()))
    }

    pub fn load_image(&self, view: usize, frame: u64) -> Result<ImageBuffer> {
        load_raster(self.image_path(view, frame)?)
    }

    /// Working size of `view`: the resize target, or the size of its first frame.
    pub fn view_size(&self, view: usize) -> Result<(usize, usize)> {
        match self.descriptor.resize {
            Some([w, h]) => Ok((w, h)),
            None => self.native_size(view),
        }
    }

    /// The image of `view` at `frame`, resized to the working size if requested.
    pub fn view_image(&self, view: usize, frame: u64) -> Result<ImageBuffer> {
        let img = self.load_image(view, frame)?;
        Ok(match self.descriptor.resize {
            Some([w, h]) => resize_image(&img, w, h),
            None => img,
        })
    }

    /// Validity mask of `view` at `frame`, when the dataset carries masks.
    pub fn view_mask(&self, view: usize, frame: u64) -> Result<Option<ValidMask>> {
        let Some(dir) = &self.descriptor.views[view].masks else {
            return Ok(None);
        };
        let path = self.resolve(dir).join(frame_file_name(frame, "png"));
        let img = load_png(&path)?;
        let mut mask = ValidMask::new(img.width(), img.height(), false);
        for y in 0..img.height() {
            for x in 0..img.width() {
                mask.set(x, y, img.get(x, y, 0) > 0.0);
            }
        }
        if let Some([w, h]) = self.descriptor.resize {
            if (w, h) != (mask.width(), mask.height()) {
                return Err(Error::ShapeMismatch(format!("{} does not match the resize target", path.display())));
            }
        }
        Ok(Some(mask))
    }

    /// Grid-to-pixel projections of every view at the working image size.
    pub fn base_projections(&self) -> Result<Vec<Homography>> {
        (0..self.n_views())
            .map(|v| {
                let cal = self.calibration(v)?;
                let cal = match self.descriptor.resize {
                    Some([w, h]) => {
                        let (w0, h0) = self.native_size(v)?;
                        cal.with_scaled_intrinsics(w as f64 / w0 as f64, h as f64 / h0 as f64)?
                    }
                    None => cal,
                };
                self.grid().projection_for(&cal)
            })
            .collect()
    }

    fn native_size(&self, view: usize) -> Result<(usize, usize)> {
        let first = *self
            .frames()?
            .first()
            .ok_or_else(|| Error::InvalidArgument("dataset has no frames".into()))?;
        let img = self.load_image(view, first)?;
        Ok((img.width(), img.height()))
    }

    /// Projection of `view` at `frame`: the override when present, else `base`.
    pub fn projection(&self, overrides: &BTreeMap<(u64, usize), Homography>, base: &[Homography], view: usize, frame: u64) -> Homography {
        overrides.get(&(frame, view)).copied().unwrap_or(base[view])
    }

    pub fn annotations(&self) -> Result<Vec<AnnotationRecord>> {
        load_annotations(self.resolve(&self.descriptor.annotations))
    }

    /// `(frame, view) → T_grid` overrides, if the dataset carries them.
    pub fn projection_overrides(&self) -> Result<BTreeMap<(u64, usize), Homography>> {
        match &self.descriptor.projections {
            None => Ok(BTreeMap::new()),
            Some(p) => Ok(load_projections(self.resolve(p))?
                .into_iter()
                .map(|r| ((r.frame, r.view), r.t_grid))
                .collect()),
        }
    }
}
