//! On-disk JSON formats: correspondence files, the ground-truth sidecar, and
//! the calibration result.
//!
//! Angles are stored in degrees (matching how people talk about PTZ motions)
//! and converted to radians exactly once, at this boundary.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{CalibrationResult, Correspondence, CorrespondenceSet};
use crate::geometry::{ImageGeometry, ImagePoint, RotationSpec};
use crate::simulator::{Aabb, GroundTruthCamera, NoiseSpec};

/// `{ "width": .., "height": .. }`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub width: u32,
    pub height: u32,
}

/// `{ "pan_deg": .., "tilt_deg": .. }`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationDegrees {
    pub pan_deg: f64,
    pub tilt_deg: f64,
}

/// One matched point pair in file form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub v: f64,
    pub u: f64,
    pub v_prime: f64,
    pub u_prime: f64,
}

/// A correspondence set as stored on disk:
///
/// ```json
/// {
///   "image": { "width": 640, "height": 480 },
///   "rotation": { "pan_deg": -0.5, "tilt_deg": 0.0 },
///   "points": [ { "v": 1.0, "u": 2.0, "v_prime": 3.0, "u_prime": 4.0 } ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceFile {
    pub image: ImageDims,
    pub rotation: RotationDegrees,
    pub points: Vec<PointPair>,
}

impl CorrespondenceFile {
    pub fn from_set(set: &CorrespondenceSet) -> Self {
        Self {
            image: ImageDims {
                width: set.image().width(),
                height: set.image().height(),
            },
            rotation: RotationDegrees {
                pan_deg: set.rotation().pan_degrees(),
                tilt_deg: set.rotation().tilt_degrees(),
            },
            points: set
                .points()
                .iter()
                .map(|c| PointPair {
                    v: c.reference.v,
                    u: c.reference.u,
                    v_prime: c.moved.v,
                    u_prime: c.moved.u,
                })
                .collect(),
        }
    }

    /// Validates and converts to the in-memory representation.
    pub fn into_set(self) -> Result<CorrespondenceSet> {
        let image = ImageGeometry::new(self.image.width, self.image.height)?;
        let rotation = RotationSpec::from_degrees(self.rotation.pan_deg, self.rotation.tilt_deg)?;
        let points = self
            .points
            .into_iter()
            .map(|p| {
                Correspondence::new(ImagePoint::new(p.v, p.u), ImagePoint::new(p.v_prime, p.u_prime))
            })
            .collect();
        CorrespondenceSet::new(rotation, image, points)
    }
}

/// Sidecar written next to simulated datasets so downstream tools can compute
/// errors against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub camera: GroundTruthCamera,
    pub seed: u64,
    pub scene: SceneDescriptor,
    pub noise: NoiseSpec,
    pub pan_rotation: RotationDegrees,
    pub tilt_rotation: RotationDegrees,
    pub pantilt_rotation: RotationDegrees,
}

/// How the simulated scene was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SceneDescriptor {
    Random { n: usize, bounds: Aabb },
    Teapot,
    TeapotQuadrants,
}

/// Calibration result plus diagnostics, as written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResultFile {
    pub result: CalibrationResult,
    pub warnings: Vec<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a correspondence file and converts it, attaching the path to parse
/// and validation failures.
pub fn load_correspondences(path: &Path) -> Result<CorrespondenceSet> {
    let file: CorrespondenceFile = read_json(path)?;
    file.into_set().map_err(|e| match e {
        parse @ (Error::InvalidInput(_) | Error::AngleOutOfRange { .. } | Error::EmptyCorrespondences) => {
            Error::InvalidInput(format!("{}: {parse}", path.display()))
        }
        other => other,
    })
}
