//! The `mvaug` command line: batch commands composing the library.
//!
//! Every command is a pure function of its inputs, flags and seed. A summary
//! goes to stdout (`key=value` lines, or one JSON object with `--json`) and
//! diagnostics go to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::augmentation::{
    augment_view, sample_scene_augmentation, sample_view_augmentation, transform_scene_annotations,
    transform_view_annotations, AugmentationKind, AugmentationRanges, SceneAugmentation, ViewAugmentation,
};
use crate::error::Error;
use crate::eval::{compute_metrics, match_detections, DEFAULT_THRESHOLD_M};
use crate::geometry::{GroundGrid, Homography, Point2};
use crate::io::{self, AnnotationRecord, Dataset, DatasetDescriptor, ProjectionRecord, ViewEntry};
use crate::pipeline::{default_nms_radius, detect_views, AggregationMode, DetectionParams, DetectionSet, ViewInput};
use crate::rng;
use crate::synth::{generate_scene, SceneConfig};
use crate::warp::{project_to_ground_masked, resize_image, ImageBuffer, ValidMask};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  usage error (bad flags, unknown augmentation kind, missing config)
  2  data error (unreadable or malformed input, unwritable output, mismatched data)
  3  numeric failure (singular or degenerate geometry)";

#[derive(Debug, Parser)]
#[command(name = "mvaug", version, about = "Two-level augmentation for multi-view ground-plane detection", after_help = EXIT_CODES)]
struct Cli {
    /// Print the result summary as one JSON object.
    #[arg(long, global = true)]
    json: bool,
    /// Cap the number of worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic multi-camera dataset.
    Synth(SynthArgs),
    /// Apply view and scene augmentation to a dataset.
    Augment(AugmentArgs),
    /// Run the reference detector on every frame of a dataset.
    Detect(DetectArgs),
    /// Score detections against ground-truth annotations.
    Eval(EvalArgs),
    /// Render original view, augmented view and ground projection side by side.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// JSON tool configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_name = "KIND", default_value = "affine", value_parser = parse_kind)]
    view_aug: AugmentationKind,
    #[arg(long, value_name = "KIND", default_value = "affine", value_parser = parse_kind)]
    scene_aug: AugmentationKind,
    /// Probability that each view and each frame's scene is augmented.
    #[arg(long, default_value_t = 0.5)]
    proportion: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_name = "MODE", default_value = "mean", value_parser = parse_mode)]
    aggregation: AggregationMode,
    /// Suppression radius in cells (default: 0.5 m in cells, rounded up).
    #[arg(long, value_name = "R")]
    nms_radius: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    detections: PathBuf,
    /// Ground-truth annotations (line-delimited JSON).
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD_M)]
    threshold_m: f64,
    /// Also write the metrics report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    frame: u64,
    #[arg(long)]
    view: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_name = "KIND", default_value = "affine", value_parser = parse_kind)]
    view_aug: AugmentationKind,
    #[arg(long, value_name = "KIND", default_value = "affine", value_parser = parse_kind)]
    scene_aug: AugmentationKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_kind(s: &str) -> Result<AugmentationKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<AggregationMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Lib(e) if e.is_numeric() => EXIT_NUMERIC,
            Failure::Lib(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type CmdResult = Result<Value, Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let json = cli.json;
    let result = match cli.threads {
        Some(0) => Err(Failure::Usage("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Usage(format!("cannot build thread pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(summary) => {
            if json {
                println!("{summary}");
            } else {
                print_key_values(&summary);
            }
            EXIT_OK
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

/// [`run`] on the process arguments.
pub fn main_from_env() -> i32 {
    run(std::env::args_os())
}

fn print_key_values(v: &Value) {
    if let Value::Object(map) = v {
        for (k, v) in map {
            match v {
                Value::String(s) => println!("{k}={s}"),
                other => println!("{k}={other}"),
            }
        }
    } else {
        println!("{v}");
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Synth(a) => cmd_synth(&a),
        Command::Augment(a) => cmd_augment(&a),
        Command::Detect(a) => cmd_detect(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Render(a) => cmd_render(&a),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

// ---------------------------------------------------------------- synth

fn cmd_synth(a: &SynthArgs) -> CmdResult {
    if !a.config.is_file() {
        return Err(Failure::Usage(format!("config file {} not found", a.config.display())));
    }
    let mut cfg = io::load_tool_config(&a.config)?;
    let seed = a.seed.unwrap_or(cfg.seed);
    cfg.seed = seed;
    let scene_cfg = SceneConfig { seed, ..cfg.scene };
    let scene = generate_scene(&scene_cfg)?;
    let grid = cfg.grid;
    let n_views = scene.n_views();

    let out = &a.out;
    io::create_dir_all(&out.join("calibrations"))?;
    io::create_dir_all(&out.join("ground_truth"))?;
    for v in 0..n_views {
        io::create_dir_all(&out.join("views").join(v.to_string()))?;
    }
    io::save_tool_config(out.join("config.json"), &cfg)?;

    let mut views = Vec::with_capacity(n_views);
    for (v, cam) in scene.cameras.iter().enumerate() {
        let calibration = PathBuf::from("calibrations").join(format!("view_{v}.json"));
        io::save_calibration(out.join(&calibration), cam)?;
        views.push(ViewEntry {
            calibration,
            images: PathBuf::from("views").join(v.to_string()),
            masks: None,
        });
    }

    let annotations: Vec<Vec<AnnotationRecord>> = (0..scene.n_frames())
        .into_par_iter()
        .map(|f| -> Result<Vec<AnnotationRecord>, Error> {
            let name = io::frame_file_name(f as u64, "mvgrid");
            for v in 0..n_views {
                let heat = scene.render_view_heatmap(v, f, scene_cfg.heat_sigma_px)?;
                io::save_grid_raster(out.join("views").join(v.to_string()).join(&name), &heat)?;
            }
            let gt = scene.render_ground_truth(f, &grid, cfg.gt_sigma_cells)?;
            io::save_grid_raster(out.join("ground_truth").join(&name), gt.raster())?;
            let feet: Vec<_> = (0..n_views).map(|v| scene.feet_pixels(v, f)).collect();
            // people seen by no camera cannot be annotated
            Ok(scene.frames[f]
                .iter()
                .enumerate()
                .filter_map(|(i, p)| {
                    let seen: BTreeMap<String, [f64; 2]> = feet
                        .iter()
                        .enumerate()
                        .filter_map(|(v, px)| px[i].map(|q| (v.to_string(), q.into())))
                        .collect();
                    (!seen.is_empty()).then(|| AnnotationRecord {
                        frame: f as u64,
                        id: p.id,
                        world: p.world.into(),
                        views: seen,
                    })
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    let annotations: Vec<AnnotationRecord> = annotations.into_iter().flatten().collect();
    io::save_annotations(out.join("annotations.jsonl"), &annotations)?;
    io::save_dataset(
        out,
        &DatasetDescriptor {
            views,
            grid,
            annotations: "annotations.jsonl".into(),
            resize: None,
            projections: None,
        },
    )?;
    Ok(json!({
        "command": "synth",
        "out": path_str(out),
        "seed": seed,
        "views": n_views,
        "frames": scene.n_frames(),
        "annotations": annotations.len(),
    }))
}

// ---------------------------------------------------------------- augment

struct AugmentContext {
    ds: Dataset,
    overrides: BTreeMap<(u64, usize), Homography>,
    base: Vec<Homography>,
    sizes: Vec<(usize, usize)>,
}

impl AugmentContext {
    fn load(path: &Path) -> Result<Self, Failure> {
        let ds = io::load_dataset(path)?;
        let overrides = ds.projection_overrides()?;
        let base = ds.base_projections()?;
        let sizes = (0..ds.n_views()).map(|v| ds.view_size(v)).collect::<Result<_, _>>()?;
        Ok(AugmentContext {
            ds,
            overrides,
            base,
            sizes,
        })
    }

    fn t_grid(&self, view: usize, frame: u64) -> Homography {
        self.ds.projection(&self.overrides, &self.base, view, frame)
    }
}

/// The augmentations of one frame, drawn from the frame's scene and view streams.
fn draw_frame(
    ranges: &AugmentationRanges,
    view_kind: AugmentationKind,
    scene_kind: AugmentationKind,
    seed: u64,
    frame: u64,
    grid: &GroundGrid,
    sizes: &[(usize, usize)],
) -> Result<(SceneAugmentation, Vec<ViewAugmentation>), Error> {
    let hs = sample_scene_augmentation(scene_kind, ranges, grid, &mut rng::scene_stream(seed, frame))?;
    let hvs = sizes
        .iter()
        .enumerate()
        .map(|(v, &(w, h))| sample_view_augmentation(view_kind, ranges, w, h, &mut rng::view_stream(seed, frame, v as u64)))
        .collect::<Result<_, _>>()?;
    Ok((hs, hvs))
}

/// Moves one annotation into the augmented frame; `None` when it leaves the
/// grid or every view that saw it.
fn augment_annotation(
    rec: &AnnotationRecord,
    hs: &SceneAugmentation,
    hvs: &[ViewAugmentation],
    sizes: &[(usize, usize)],
    grid: &GroundGrid,
) -> Result<Option<AnnotationRecord>, Error> {
    let world = if hs.kind == AugmentationKind::None {
        rec.world
    } else {
        let cell = grid.ground_to_grid(rec.world_point());
        match transform_scene_annotations(&[cell], &hs.h, grid)?[0] {
            crate::augmentation::MappedPoint {
                point: Some(q),
                visible: true,
            } => grid.grid_to_ground(q).into(),
            _ => return Ok(None),
        }
    };
    let mut views = BTreeMap::new();
    for (key, &px) in &rec.views {
        let Some(v) = key.parse::<usize>().ok().filter(|&v| v < hvs.len()) else {
            continue;
        };
        if hvs[v].kind == AugmentationKind::None {
            views.insert(key.clone(), px);
            continue;
        }
        let (w, h) = sizes[v];
        let m = transform_view_annotations(&[px.into()], &hvs[v].h, w, h)?[0];
        if let (Some(q), true) = (m.point, m.visible) {
            views.insert(key.clone(), q.into());
        }
    }
    // cropped out of every view that saw it: no longer annotatable
    if views.is_empty() && !rec.views.is_empty() {
        return Ok(None);
    }
    Ok(Some(AnnotationRecord {
        frame: rec.frame,
        id: rec.id,
        world,
        views,
    }))
}

fn mask_image(mask: &ValidMask) -> ImageBuffer {
    ImageBuffer::from_fn(mask.width(), mask.height(), |x, y| if mask.get(x, y) { 1.0 } else { 0.0 })
}

fn check_proportion(p: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--proportion must lie in [0, 1], got {p}")))
    }
}

fn cmd_augment(a: &AugmentArgs) -> CmdResult {
    check_proportion(a.proportion)?;
    let ctx = AugmentContext::load(&a.dataset)?;
    let ds = &ctx.ds;
    let grid = *ds.grid();
    let frames = ds.frames()?;
    let records = ds.annotations()?;
    let by_frame = io::annotations_by_frame(&records);
    let ranges = AugmentationRanges {
        view_proportion: a.proportion,
        scene_proportion: a.proportion,
        ..AugmentationRanges::default()
    };

    let out = &a.out;
    let n_views = ds.n_views();
    io::create_dir_all(&out.join("calibrations"))?;
    let mut views = Vec::with_capacity(n_views);
    for v in 0..n_views {
        let images = PathBuf::from("views").join(v.to_string());
        let masks = PathBuf::from("masks").join(v.to_string());
        io::create_dir_all(&out.join(&images))?;
        io::create_dir_all(&out.join(&masks))?;
        let calibration = PathBuf::from("calibrations").join(format!("view_{v}.json"));
        let src = ds.resolve(&ds.descriptor.views[v].calibration);
        match ds.descriptor.resize {
            // calibrations describe the rasters actually written
            Some(_) => {
                let cal = ds.calibration(v)?;
                let native = native_size(ds, v, &frames)?;
                let (w, h) = ctx.sizes[v];
                let scaled = cal.with_scaled_intrinsics(w as f64 / native.0 as f64, h as f64 / native.1 as f64)?;
                io::save_calibration(out.join(&calibration), &scaled)?;
            }
            None => {
                let bytes = fs::read(&src).map_err(|e| Error::io(&src, e))?;
                io::write_atomic(&out.join(&calibration), &bytes)?;
            }
        }
        views.push(ViewEntry {
            calibration,
            images,
            masks: Some(masks),
        });
    }

    type FrameOutput = (Vec<ProjectionRecord>, Vec<AnnotationRecord>, Value, usize, bool);
    let per_frame: Vec<FrameOutput> = frames
        .par_iter()
        .map(|&frame| -> Result<FrameOutput, Error> {
            let (hs, hvs) = draw_frame(&ranges, a.view_aug, a.scene_aug, a.seed, frame, &grid, &ctx.sizes)?;
            let name = io::frame_file_name(frame, "png");
            let mut projections = Vec::with_capacity(n_views);
            for (v, hv) in hvs.iter().enumerate() {
                let img = ds.view_image(v, frame)?;
                let mask = ds.view_mask(v, frame)?;
                let (w, h) = ctx.sizes[v];
                if (img.width(), img.height()) != (w, h) {
                    return Err(Error::ShapeMismatch(format!("view {v} frame {frame} has a different size")));
                }
                let aug = augment_view(&img, mask.as_ref(), &ctx.t_grid(v, frame), &hv.h, &hs.h)?;
                io::save_png(out.join("views").join(v.to_string()).join(&name), &aug.image)?;
                io::save_png(out.join("masks").join(v.to_string()).join(&name), &mask_image(&aug.mask))?;
                projections.push(ProjectionRecord {
                    frame,
                    view: v,
                    t_grid: aug.t_grid,
                });
            }
            let mut annotations = Vec::new();
            for rec in by_frame.get(&frame).into_iter().flatten() {
                if let Some(r) = augment_annotation(rec, &hs, &hvs, &ctx.sizes, &grid)? {
                    annotations.push(r);
                }
            }
            let n_aug_views = hvs.iter().filter(|h| h.kind != AugmentationKind::None).count();
            let scene_augmented = hs.kind != AugmentationKind::None;
            let meta = json!({ "frame": frame, "scene": hs, "views": hvs });
            Ok((projections, annotations, meta, n_aug_views, scene_augmented))
        })
        .collect::<Result<_, _>>()?;

    let mut projections = Vec::new();
    let mut annotations = Vec::new();
    let mut meta = Vec::new();
    let (mut aug_views, mut aug_scenes) = (0usize, 0usize);
    for (p, an, m, nv, s) in per_frame {
        projections.extend(p);
        annotations.extend(an);
        let mut line = serde_json::to_vec(&m).expect("metadata serializes");
        line.push(b'\n');
        meta.extend(line);
        aug_views += nv;
        aug_scenes += usize::from(s);
    }
    io::save_projections(out.join("projections.jsonl"), &projections)?;
    io::save_annotations(out.join("annotations.jsonl"), &annotations)?;
    io::write_atomic(&out.join("augmentations.jsonl"), &meta)?;
    io::save_dataset(
        out,
        &DatasetDescriptor {
            views,
            grid,
            annotations: "annotations.jsonl".into(),
            resize: None,
            projections: Some("projections.jsonl".into()),
        },
    )?;
    Ok(json!({
        "command": "augment",
        "out": path_str(out),
        "seed": a.seed,
        "view_aug": a.view_aug.name(),
        "scene_aug": a.scene_aug.name(),
        "proportion": a.proportion,
        "frames": frames.len(),
        "views": n_views,
        "augmented_views": aug_views,
        "augmented_scenes": aug_scenes,
    }))
}

fn native_size(ds: &Dataset, view: usize, frames: &[u64]) -> Result<(usize, usize), Failure> {
    let first = *frames.first().ok_or_else(|| Failure::Data("dataset has no frames".into()))?;
    let img = ds.load_image(view, first)?;
    Ok((img.width(), img.height()))
}

// ---------------------------------------------------------------- detect

fn cmd_detect(a: &DetectArgs) -> CmdResult {
    if let Some(r) = a.nms_radius {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Failure::Usage(format!("--nms-radius must be positive, got {r}")));
        }
    }
    let ctx = AugmentContext::load(&a.dataset)?;
    let ds = &ctx.ds;
    let grid = *ds.grid();
    let radius = a.nms_radius.unwrap_or_else(|| default_nms_radius(&grid));
    let params = DetectionParams {
        nms_radius: radius,
        mode: a.aggregation,
        ..DetectionParams::for_grid(&grid)
    };
    let frames = ds.frames()?;
    let sets: Vec<DetectionSet> = frames
        .par_iter()
        .map(|&frame| -> Result<DetectionSet, Error> {
            let images = (0..ds.n_views()).map(|v| ds.view_image(v, frame)).collect::<Result<Vec<_>, _>>()?;
            let masks = (0..ds.n_views()).map(|v| ds.view_mask(v, frame)).collect::<Result<Vec<_>, _>>()?;
            for (v, (img, m)) in images.iter().zip(&masks).enumerate() {
                if let Some(m) = m {
                    if (m.width(), m.height()) != (img.width(), img.height()) {
                        return Err(Error::GridMismatch(format!("view {v} frame {frame}: mask and image sizes differ")));
                    }
                }
            }
            let inputs: Vec<ViewInput<'_>> = images
                .iter()
                .zip(&masks)
                .enumerate()
                .map(|(v, (image, mask))| ViewInput {
                    image,
                    mask: mask.as_ref(),
                    t_grid: ctx.t_grid(v, frame),
                })
                .collect();
            let set = detect_views(&inputs, &grid, &params)?;
            Ok(DetectionSet::new(frame, set.detections))
        })
        .collect::<Result<_, _>>()?;
    io::save_detections(&a.out, &sets, &grid)?;
    Ok(json!({
        "command": "detect",
        "out": path_str(&a.out),
        "aggregation": a.aggregation.to_string(),
        "nms_radius": radius,
        "frames": sets.len(),
        "detections": sets.iter().map(DetectionSet::len).sum::<usize>(),
    }))
}

// ---------------------------------------------------------------- eval

fn cmd_eval(a: &EvalArgs) -> CmdResult {
    if !(a.threshold_m > 0.0 && a.threshold_m.is_finite()) {
        return Err(Failure::Usage(format!("--threshold-m must be positive, got {}", a.threshold_m)));
    }
    let dets = io::load_detections(&a.detections)?;
    let gts = io::load_annotations(&a.gt)?;
    let mut gt_frames: BTreeMap<u64, Vec<Point2>> = BTreeMap::new();
    for r in &gts {
        gt_frames.entry(r.frame).or_default().push(r.world_point());
    }
    let mut det_frames: BTreeMap<u64, Vec<Point2>> = BTreeMap::new();
    for d in &dets {
        det_frames.entry(d.frame).or_default().push(d.world.into());
    }
    if let Some(f) = det_frames.keys().find(|f| !gt_frames.contains_key(f)) {
        return Err(Failure::Data(format!("detections reference frame {f}, which has no ground truth")));
    }
    if gt_frames.is_empty() {
        return Err(Failure::Data("ground truth is empty".into()));
    }
    let matches = gt_frames
        .iter()
        .map(|(f, g)| match_detections(det_frames.get(f).map_or(&[][..], Vec::as_slice), g, a.threshold_m))
        .collect::<Result<Vec<_>, _>>()?;
    let report = compute_metrics(&matches, a.threshold_m)?;
    if let Some(p) = &a.report {
        io::write_atomic(p, report.to_json().as_bytes())?;
    }
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["threshold_m"] = json!(a.threshold_m);
    v["frames"] = json!(matches.len());
    Ok(v)
}

// ---------------------------------------------------------------- render

const MARKER: [f32; 3] = [1.0, 0.0, 0.0];

fn to_rgb(img: &ImageBuffer) -> ImageBuffer {
    let c = img.channels();
    let mut out = ImageBuffer::new(img.width(), img.height(), 3);
    for y in 0..img.height() {
        for x in 0..img.width() {
            for ch in 0..3 {
                let src = if c >= 3 { ch } else { 0 };
                out.set(x, y, ch, img.get(x, y, src));
            }
        }
    }
    out
}

fn blit(dst: &mut ImageBuffer, src: &ImageBuffer, x0: usize) {
    for y in 0..src.height().min(dst.height()) {
        for x in 0..src.width() {
            for ch in 0..3 {
                dst.set(x0 + x, y, ch, src.get(x, y, ch));
            }
        }
    }
}

/// Grid cell → pixel of a `w × h` panel showing the whole grid.
pub fn cell_to_panel(cell: Point2, grid: &GroundGrid, w: usize, h: usize) -> Point2 {
    Point2::new(
        (cell.x + 0.5) * w as f64 / grid.cols as f64 - 0.5,
        (cell.y + 0.5) * h as f64 / grid.rows as f64 - 0.5,
    )
}

fn cmd_render(a: &RenderArgs) -> CmdResult {
    let ctx = AugmentContext::load(&a.dataset)?;
    let ds = &ctx.ds;
    let grid = *ds.grid();
    if a.view >= ds.n_views() {
        return Err(Failure::Data(format!("view {} out of range (dataset has {})", a.view, ds.n_views())));
    }
    let frames = ds.frames()?;
    if !frames.contains(&a.frame) {
        return Err(Failure::Data(format!("frame {} not in dataset", a.frame)));
    }
    let ranges = AugmentationRanges {
        view_proportion: 1.0,
        scene_proportion: 1.0,
        ..AugmentationRanges::default()
    };
    let (hs, hvs) = draw_frame(&ranges, a.view_aug, a.scene_aug, a.seed, a.frame, &grid, &ctx.sizes)?;
    let hv = &hvs[a.view];
    let (w, h) = ctx.sizes[a.view];
    let img = ds.view_image(a.view, a.frame)?;
    let mask = ds.view_mask(a.view, a.frame)?;
    let aug = augment_view(&img, mask.as_ref(), &ctx.t_grid(a.view, a.frame), &hv.h, &hs.h)?;
    let (ground, _) = project_to_ground_masked(&aug.image, Some(&aug.mask), &aug.t_grid, &grid);
    let mut panel = to_rgb(&resize_image(ground.raster(), w, h));

    let records = ds.annotations()?;
    let cells: Vec<Point2> = records
        .iter()
        .filter(|r| r.frame == a.frame)
        .map(|r| grid.ground_to_grid(r.world_point()))
        .collect();
    let mut markers = 0;
    for m in transform_scene_annotations(&cells, &hs.h, &grid)? {
        let (Some(q), true) = (m.point, m.visible) else {
            continue;
        };
        let p = cell_to_panel(q, &grid, w, h);
        let (cx, cy) = (p.x.round() as isize, p.y.round() as isize);
        for (dx, dy) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
            let (x, y) = (cx + dx, cy + dy);
            if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                for (ch, &v) in MARKER.iter().enumerate() {
                    panel.set(x as usize, y as usize, ch, v);
                }
            }
        }
        markers += 1;
    }

    let mut canvas = ImageBuffer::new(3 * w, h, 3);
    blit(&mut canvas, &to_rgb(&img), 0);
    blit(&mut canvas, &to_rgb(&aug.image), w);
    blit(&mut canvas, &panel, 2 * w);
    io::save_png(&a.out, &canvas)?;
    Ok(json!({
        "command": "render",
        "out": path_str(&a.out),
        "seed": a.seed,
        "width": 3 * w,
        "height": h,
        "markers": markers,
        "view_aug": hv.kind.name(),
        "scene_aug": hs.kind.name(),
    }))
}
