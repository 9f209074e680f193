//! Rotation construction, the pinhole intrinsic matrix, and the pure-rotation
//! homography between two images of a rotating camera.
//!
//! # Conventions
//!
//! Image coordinates are `(v, u)` where `v` is the column (increases to the
//! right) and `u` is the row. The pixel mapping from normalized camera
//! coordinates `(x, y)` is `v = f_v * x + v_0` and `u = -f_u * y + u_0`; the
//! sign flip on the `u` axis is why the assembled intrinsic matrix carries
//! `-f_u` in its middle diagonal entry.
//!
//! Pan is a rotation about the camera's y axis (positive pans the camera to
//! the right), tilt a rotation about the x axis (positive tilts upward), and
//! roll is never used. A combined motion composes as `R = R_y(pan) * R_x(tilt)`.
//!
//! Two images taken before and after a rotation `R` of the camera are related
//! by the homography `H = K * R^T * K^{-1}` acting on homogeneous pixel
//! coordinates: the camera motion is equivalent to the opposite motion of the
//! scene, hence the transpose. The closed-form estimators expand this mapping
//! into scalar projection equations whose coefficients are read through
//! [`RotationMatrix::transposed_elements`]; see that method for the exact
//! indexing convention, which is easy to get wrong by one transpose.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used by validity checks on rotation matrices.
pub const ROTATION_TOL: f64 = 1e-12;

/// Homogeneous scales below this are treated as points at infinity.
pub const MIN_HOMOGENEOUS_SCALE: f64 = 1e-12;

/// A pixel location. May lie outside the image bounds: projections of
/// peripheral 3D points are legitimate inputs to the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    /// Column coordinate in pixels.
    pub v: f64,
    /// Row coordinate in pixels.
    pub u: f64,
}

impl ImagePoint {
    pub fn new(v: f64, u: f64) -> Self {
        Self { v, u }
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.u.is_finite()
    }
}

/// Image dimensions and the derived center `(c_v, c_u) = (w/2, h/2)`.
///
/// The center is always recomputed from the stored dimensions so it cannot
/// drift out of sync with them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageGeometry {
    width: u32,
    height: u32,
}

impl ImageGeometry {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Column coordinate of the image center, `w/2`.
    pub fn center_v(&self) -> f64 {
        f64::from(self.width) / 2.0
    }

    /// Row coordinate of the image center, `h/2`.
    pub fn center_u(&self) -> f64 {
        f64::from(self.height) / 2.0
    }

    /// Whether a point lies inside the image rectangle (borders included).
    pub fn contains(&self, p: &ImagePoint) -> bool {
        p.v >= 0.0 && p.v <= f64::from(self.width) && p.u >= 0.0 && p.u <= f64::from(self.height)
    }
}

/// Camera-internal parameters: focal lengths in pixels, principal point in
/// pixels, skew fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    /// Focal length along the v (column) direction, pixels.
    pub f_v: f64,
    /// Focal length along the u (row) direction, pixels.
    pub f_u: f64,
    /// Principal point column, pixels.
    pub v_0: f64,
    /// Principal point row, pixels.
    pub u_0: f64,
}

impl Intrinsics {
    pub fn new(f_v: f64, f_u: f64, v_0: f64, u_0: f64) -> Result<Self> {
        if !(f_v.is_finite() && f_u.is_finite() && v_0.is_finite() && u_0.is_finite()) {
            return Err(Error::InvalidInput("intrinsics must be finite".into()));
        }
        if f_v <= 0.0 || f_u <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive, got f_v={f_v}, f_u={f_u}"
            )));
        }
        Ok(Self { f_v, f_u, v_0, u_0 })
    }

    /// The intrinsic matrix
    ///
    /// ```text
    ///     [ f_v   0    v_0 ]
    /// K = [  0   -f_u  u_0 ]
    ///     [  0    0     1  ]
    /// ```
    ///
    /// The `-f_u` entry comes from the row axis running opposite to the
    /// camera's y axis.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.f_v, 0.0, self.v_0, //
            0.0, -self.f_u, self.u_0, //
            0.0, 0.0, 1.0,
        )
    }

    /// Closed-form inverse of [`Intrinsics::matrix`]; exact for this
    /// upper-triangular structure.
    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.f_v,
            0.0,
            -self.v_0 / self.f_v,
            0.0,
            -1.0 / self.f_u,
            self.u_0 / self.f_u,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Pixel coordinates of a point on the normalized image plane.
    pub fn project_normalized(&self, x: f64, y: f64) -> ImagePoint {
        ImagePoint::new(self.f_v * x + self.v_0, -self.f_u * y + self.u_0)
    }
}

/// A pan/tilt motion in radians.
///
/// Positive pan rotates the camera to the right, positive tilt upward.
/// Degrees appear only at CLI and file boundaries; everything internal is
/// radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    pan: f64,
    tilt: f64,
}

impl RotationSpec {
    pub fn new(pan: f64, tilt: f64) -> Result<Self> {
        validate_angle(pan)?;
        validate_angle(tilt)?;
        Ok(Self { pan, tilt })
    }

    pub fn from_degrees(pan_deg: f64, tilt_deg: f64) -> Result<Self> {
        Self::new(pan_deg.to_radians(), tilt_deg.to_radians())
    }

    pub fn pan(&self) -> f64 {
        self.pan
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn pan_degrees(&self) -> f64 {
        self.pan.to_degrees()
    }

    pub fn tilt_degrees(&self) -> f64 {
        self.tilt.to_degrees()
    }
}

fn validate_angle(angle: f64) -> Result<()> {
    if !angle.is_finite() || angle.abs() > FRAC_PI_2 {
        return Err(Error::AngleOutOfRange { angle_rad: angle });
    }
    Ok(())
}

/// The nine rotation elements in the indexing used by the projection
/// equations.
///
/// See [`RotationMatrix::transposed_elements`] for the convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationElements {
    pub r11: f64,
    pub r12: f64,
    pub r13: f64,
    pub r21: f64,
    pub r22: f64,
    pub r23: f64,
    pub r31: f64,
    pub r32: f64,
    pub r33: f64,
}

/// A proper rotation (orthonormal, determinant +1).
///
/// Instances can only be built through the pan/tilt constructors and
/// [`RotationMatrix::compose`], which guarantee the invariants by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    m: Matrix3<f64>,
}

impl RotationMatrix {
    /// Rotation about the y axis by `theta_p` radians (a pan):
    ///
    /// ```text
    ///       [ cos   0  -sin ]
    /// R_y = [  0    1    0  ]
    ///       [ sin   0   cos ]
    /// ```
    pub fn pan(theta_p: f64) -> Result<Self> {
        validate_angle(theta_p)?;
        let (s, c) = theta_p.sin_cos();
        Ok(Self {
            m: Matrix3::new(c, 0.0, -s, 0.0, 1.0, 0.0, s, 0.0, c),
        })
    }

    /// Rotation about the x axis by `theta_t` radians (a tilt):
    ///
    /// ```text
    ///       [ 1    0    0  ]
    /// R_x = [ 0   cos  sin ]
    ///       [ 0  -sin  cos ]
    /// ```
    pub fn tilt(theta_t: f64) -> Result<Self> {
        validate_angle(theta_t)?;
        let (s, c) = theta_t.sin_cos();
        Ok(Self {
            m: Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c),
        })
    }

    /// The combined motion `R_y(pan) * R_x(tilt)`.
    ///
    /// The roll factor is the identity, so this fixed evaluation order is the
    /// full composition. A pan-then-tilt image sequence is modeled by this
    /// single matrix.
    pub fn compose(spec: &RotationSpec) -> Self {
        // Angles were validated by the RotationSpec constructor.
        let pan = Self::pan(spec.pan()).expect("validated pan angle");
        let tilt = Self::tilt(spec.tilt()).expect("validated tilt angle");
        Self {
            m: pan.m * tilt.m,
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// The transpose, also a proper rotation.
    pub fn transposed(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    /// Rotation elements as consumed by the projection formulas.
    ///
    /// The two-view mapping applies `R^T` (see [`Homography::new`]). Expanding
    /// `K R^T K^{-1}` into scalar equations writes each coefficient `r_ij` as
    /// the entry of `R^T` at row `j`, column `i` -- which is the same number
    /// as the `(i, j)` entry of `R` itself. All estimator formulas index
    /// through this accessor rather than touching the raw matrix, so the
    /// transpose bookkeeping lives in exactly one place.
    ///
    /// For a pure pan by `theta` this yields `r11 = cos`, `r31 = sin`,
    /// `r13 = -sin`; for a pure tilt `r22 = cos`, `r23 = sin`, `r32 = -sin`.
    pub fn transposed_elements(&self) -> RotationElements {
        RotationElements {
            r11: self.m[(0, 0)],
            r12: self.m[(0, 1)],
            r13: self.m[(0, 2)],
            r21: self.m[(1, 0)],
            r22: self.m[(1, 1)],
            r23: self.m[(1, 2)],
            r31: self.m[(2, 0)],
            r32: self.m[(2, 1)],
            r33: self.m[(2, 2)],
        }
    }

    /// Rotates a 3D direction by the transpose of this rotation.
    ///
    /// This is the scene-equivalent motion of a camera rotation: a ray seen
    /// by the rotated camera is the original ray rotated by `R^T`.
    pub fn rotate_ray_inverse(&self, ray: &Vector3<f64>) -> Vector3<f64> {
        self.m.transpose() * ray
    }
}

/// The pure-rotation homography `H = K * R^T * K^{-1}` mapping reference-image
/// points to rotated-image points up to scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: Matrix3<f64>,
}

impl Homography {
    pub fn new(k: &Intrinsics, r: &RotationMatrix) -> Self {
        Self {
            h: k.matrix() * r.matrix().transpose() * k.inverse_matrix(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    /// Applies the homography and dehomogenizes by the third component.
    ///
    /// Fails with [`Error::PointAtInfinity`] if the homogeneous scale is
    /// below [`MIN_HOMOGENEOUS_SCALE`].
    pub fn apply(&self, p: &ImagePoint) -> Result<ImagePoint> {
        let mapped = self.h * Vector3::new(p.v, p.u, 1.0);
        let w = mapped.z;
        if w.abs() < MIN_HOMOGENEOUS_SCALE {
            return Err(Error::PointAtInfinity { scale: w });
        }
        Ok(ImagePoint::new(mapped.x / w, mapped.y / w))
    }
}
