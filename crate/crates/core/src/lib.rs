//! Calibration-preserving two-level data augmentation for multi-view
//! ground-plane detection.
//!
//! A view augmentation warps one camera image by a homography `Hv` and
//! compensates its grid-to-pixel projection with `Hv⁻¹`; a scene augmentation
//! `Hs` warps the ground plane itself by right-multiplying every view's
//! projection. Either way the views stay aligned on the ground grid and each
//! raster is resampled exactly once.
//!
//! Modules:
//!
//! - [`geometry`]: homographies, pinhole calibration, ground grids
//! - [`augmentation`]: augmentation homographies, sampling, projection update
//! - [`warp`]: bilinear inverse warping and ground projection with validity masks
//! - [`synth`]: synthetic multi-camera scenes and idealized heatmaps
//! - [`pipeline`]: geometric reference detector and MSE losses
//! - [`eval`]: optimal matching and MODA / MODP / precision / recall
//! - [`io`]: file formats
//! - [`cli`]: the `mvaug` command line

// Negated float comparisons are how NaN gets rejected; index loops read
// better than iterator chains in the small matrix routines.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod augmentation;
pub mod cli;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod warp;

pub use augmentation::{
    augment_projection, sample_scene_augmentation, sample_view_augmentation, AugmentationKind, AugmentationRanges,
    SceneAugmentation, ViewAugmentation,
};
pub use error::{Error, Result};
pub use eval::{compute_metrics, match_detections, FrameMatch, MetricsReport};
pub use geometry::{ground_projection_matrix, CameraCalibration, GroundGrid, Homography, Point2};
pub use pipeline::{run_detection, AggregationMode, Detection, DetectionSet};
pub use synth::{generate_scene, SceneConfig, SyntheticScene};
pub use warp::{project_to_ground, warp_image, GroundMap, ImageBuffer, ValidMask};
