//! Closed-form intrinsic calibration for pan-tilt cameras.
//!
//! A camera that rotates in place maps one image onto another through the
//! homography `K R^T K^{-1}`. When the rotation angles are known -- a PTZ
//! rig, a robot head, an IMU-equipped phone -- three small rotations are
//! enough to recover the four main intrinsics without any calibration
//! target:
//!
//! 1. a pure **pan** pair gives the focal length `f_v` in closed form,
//! 2. a pure **tilt** pair gives `f_u` the same way,
//! 3. a **pan-tilt** pair gives the principal point `(v_0, u_0)` from a
//!    small linear least-squares system, after rewriting the principal point
//!    as the image center plus a small shift.
//!
//! The estimates are accurate for small rotations and are intended as a
//! close initial guess for a later nonlinear refinement.
//!
//! The crate also ships a synthetic pan-tilt camera ([`simulator`]) and an
//! experiment harness ([`harness`]) that reproduces the standard error
//! studies: angle sweeps, principal-point grids, Monte Carlo statistics, and
//! angular/pixel noise curves, with CSV and SVG output.
//!
//! ```
//! use ptcal::estimators::{calibrate_with, CalibrateOptions, FocalOptions, PointSelection};
//! use ptcal::geometry::RotationSpec;
//! use ptcal::simulator::{default_bounds, generate_scene, image_pair, GroundTruthCamera, NoiseSpec};
//!
//! # fn main() -> ptcal::Result<()> {
//! let camera = GroundTruthCamera::default_simulated();
//! let scene = generate_scene(500, &default_bounds(), 42)?;
//! let noise = NoiseSpec::none();
//!
//! let pan = image_pair(&scene, &camera, &RotationSpec::from_degrees(-0.5, 0.0)?, &noise)?;
//! let tilt = image_pair(&scene, &camera, &RotationSpec::from_degrees(0.0, 0.5)?, &noise)?;
//! let pantilt = image_pair(&scene, &camera, &RotationSpec::from_degrees(-0.5, 0.5)?, &noise)?;
//!
//! // Focal lengths from the correspondence nearest the image center (their
//! // formulas are exact there), principal point from all 500 points.
//! let options = CalibrateOptions {
//!     focal: FocalOptions {
//!         selection: PointSelection::NearestCenter,
//!         ..FocalOptions::default()
//!     },
//! };
//! let result = calibrate_with(&pan, &tilt, &pantilt, &options)?;
//! assert!((result.intrinsics.f_v - 772.55).abs() < 1.0);
//! assert!((result.intrinsics.v_0 - 314.0).abs() < 0.5);
//! # Ok(())
//! # }
//! ```

pub mod error;
pub mod estimators;
pub mod files;
pub mod geometry;
pub mod harness;
pub mod simulator;

pub use error::{Error, Result, Stage};
pub use estimators::{
    calibrate, calibrate_with, estimate_fu, estimate_fv, estimate_principal_point,
    CalibrateOptions, CalibrationResult, Correspondence, CorrespondenceSet, FocalOptions,
    FocalStat, PointSelection,
};
pub use geometry::{
    Homography, ImageGeometry, ImagePoint, Intrinsics, RotationMatrix, RotationSpec,
};
pub use simulator::{GroundTruthCamera, NoiseSpec, Scene};
