use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix (|det| = {det:e})")]
    SingularMatrix { det: f64 },
    #[error("point maps to infinity (w = {w:e})")]
    PointAtInfinity { w: f64 },
    #[error("degenerate ground projection (|det| = {det:e})")]
    DegenerateProjection { det: f64 },
    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),
    #[error("degenerate look-at: {0}")]
    DegenerateLookAt(String),
    #[error("invalid calibration: {0}")]
    InvalidCalibration(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parse error in {path}{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },
    #[error("version mismatch in {path}: {msg}")]
    VersionMismatch { path: PathBuf, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: Option<usize>, msg: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numeric kind (singular or degenerate geometry).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. }
                | Error::PointAtInfinity { .. }
                | Error::DegenerateProjection { .. }
                | Error::DegenerateQuad(_)
                | Error::DegenerateLookAt(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
