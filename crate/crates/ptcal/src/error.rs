use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage that produced an error, attached by [`crate::estimators::calibrate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    FocalV,
    FocalU,
    PrincipalPoint,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::FocalV => "focal-v",
            Stage::FocalU => "focal-u",
            Stage::PrincipalPoint => "principal-point",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("rotation angle {angle_rad} rad is out of range (must be finite, |angle| <= pi/2)")]
    AngleOutOfRange { angle_rad: f64 },

    #[error("degenerate rotation: {detail}")]
    DegenerateRotation { detail: String },

    #[error("wrong motion: expected {expected}, got pan={pan_deg} deg, tilt={tilt_deg} deg")]
    WrongMotion {
        expected: &'static str,
        pan_deg: f64,
        tilt_deg: f64,
    },

    #[error("estimation failed: focal-length estimate {value} is not positive")]
    EstimationFailed { value: f64 },

    #[error("degenerate configuration: least-squares system is rank deficient (condition {condition:.3e})")]
    DegenerateConfiguration { condition: f64 },

    #[error("projected point at infinity (homogeneous scale {scale:.3e})")]
    PointAtInfinity { scale: f64 },

    #[error("empty correspondence set")]
    EmptyCorrespondences,

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("{stage} stage failed")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o failure at {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, unwrapping any stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
