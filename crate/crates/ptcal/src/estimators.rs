//! The three-step calibration pipeline.
//!
//! Step 1 recovers the column-direction focal length `f_v` from one image
//! pair related by a pure pan; after a pan the row coordinates barely move,
//! which collapses the projection equation's denominator to one and leaves a
//! closed form per correspondence. Step 2 repeats the argument for `f_u`
//! with a pure tilt. Step 3 takes a pan-plus-tilt pair, rewrites the
//! principal point as the image center plus a small shift
//! `(v_0, u_0) = (c_v + delta_v, c_u + delta_u)`, and drops the now-tiny
//! quadratic terms in the shift, leaving a linear system solved by least
//! squares.
//!
//! The focal-length formulas divide by `1 - r11 ~ 0`-adjacent quantities when
//! rotations are tiny, so rotations below [`MIN_ROTATION_RAD`] are rejected
//! as degenerate rather than silently amplifying noise.
//!
//! Hatted coordinates measure offsets from the image center, with the row
//! axis flipped: `v_hat = v - c_v` but `u_hat = c_u - u`, and likewise for
//! the primed (post-rotation) image. The flip mirrors the `-f_u` entry of the
//! intrinsic matrix and is load-bearing in every formula below.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::geometry::{
    ImageGeometry, ImagePoint, Intrinsics, RotationElements, RotationMatrix, RotationSpec,
};

/// Rotations with all required angles below this magnitude (0.01 degrees) are
/// rejected as degenerate: the formulas divide by `sin(angle)`.
pub const MIN_ROTATION_RAD: f64 = 0.01 * std::f64::consts::PI / 180.0;

/// A matched pixel pair: the same scene point seen in the reference image and
/// in the image taken after the rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub reference: ImagePoint,
    pub moved: ImagePoint,
}

impl Correspondence {
    pub fn new(reference: ImagePoint, moved: ImagePoint) -> Self {
        Self { reference, moved }
    }
}

/// Correspondences that all share one declared rotation and image geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    rotation: RotationSpec,
    image: ImageGeometry,
    points: Vec<Correspondence>,
}

impl CorrespondenceSet {
    pub fn new(
        rotation: RotationSpec,
        image: ImageGeometry,
        points: Vec<Correspondence>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCorrespondences);
        }
        if let Some(bad) = points
            .iter()
            .find(|c| !(c.reference.is_finite() && c.moved.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "correspondence contains non-finite coordinates: {bad:?}"
            )));
        }
        Ok(Self {
            rotation,
            image,
            points,
        })
    }

    pub fn rotation(&self) -> &RotationSpec {
        &self.rotation
    }

    pub fn image(&self) -> &ImageGeometry {
        &self.image
    }

    pub fn points(&self) -> &[Correspondence] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same set with the declared rotation replaced. Used by the angular
    /// uncertainty study, where the estimator is fed a wrong rotation on
    /// purpose.
    pub fn with_rotation(&self, rotation: RotationSpec) -> Self {
        Self {
            rotation,
            image: self.image,
            points: self.points.clone(),
        }
    }
}

/// How per-point focal estimates are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FocalStat {
    /// Arithmetic mean of the per-point estimates.
    #[default]
    Mean,
    /// Median; more robust when the matcher produces outliers.
    Median,
}

/// Which correspondences feed the focal-length formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointSelection {
    /// Use every correspondence.
    #[default]
    All,
    /// Use only the correspondence whose reference point is closest to the
    /// image center (ties broken by lowest index). Off-center points carry a
    /// quadratic bias in their center offset, so this is the accuracy-
    /// preserving choice when a single good match is enough.
    NearestCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FocalOptions {
    pub stat: FocalStat,
    pub selection: PointSelection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CalibrateOptions {
    pub focal: FocalOptions,
}

/// Full calibration output with per-stage diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub intrinsics: Intrinsics,
    pub fv_points_used: usize,
    pub fu_points_used: usize,
    pub pp_points_used: usize,
    /// Euclidean norm of the principal-point least-squares residual, pixels.
    pub pp_residual_norm: f64,
    /// Condition number of the least-squares system (largest over smallest
    /// singular value).
    pub pp_condition_estimate: f64,
    /// Solved shift of the principal point from the image center, pixels.
    pub delta_v: f64,
    pub delta_u: f64,
}

/// Principal-point solution plus solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalPointEstimate {
    pub v_0: f64,
    pub u_0: f64,
    pub delta_v: f64,
    pub delta_u: f64,
    pub residual_norm: f64,
    pub condition: f64,
    pub points_used: usize,
}

/// Per-point coefficient block of the principal-point equations.
///
/// `a`, `b`, `d`, `e`, `g`, `h` depend only on the rotation and focal
/// lengths; `c`, `f`, `i` also depend on the point's hatted coordinates.
/// For small rotations and points near the center, `i` is close to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub i: f64,
}

/// Coefficients of the centered projection equations for one correspondence.
///
/// With `v_hat = v - c_v` and `u_hat = c_u - u` measured in the reference
/// image:
///
/// ```text
/// a = -r11               b = r21 f_v / f_u
/// c = r11 v_hat + r21 u_hat f_v / f_u + r31 f_v
/// d = -r12 f_u / f_v     e = r22
/// f = r12 v_hat f_u / f_v + r22 u_hat + r32 f_u
/// g = -r13 / f_v         h = r23 / f_u
/// i = r13 v_hat / f_v + r23 u_hat / f_u + r33
/// ```
pub fn pp_coefficients(
    point: &Correspondence,
    r: &RotationElements,
    f_v: f64,
    f_u: f64,
    image: &ImageGeometry,
) -> PpCoefficients {
    let v_hat = point.reference.v - image.center_v();
    let u_hat = image.center_u() - point.reference.u;
    PpCoefficients {
        a: -r.r11,
        b: r.r21 * f_v / f_u,
        c: r.r11 * v_hat + r.r21 * u_hat * f_v / f_u + r.r31 * f_v,
        d: -r.r12 * f_u / f_v,
        e: r.r22,
        f: r.r12 * v_hat * f_u / f_v + r.r22 * u_hat + r.r32 * f_u,
        g: -r.r13 / f_v,
        h: r.r23 / f_u,
        i: r.r13 * v_hat / f_v + r.r23 * u_hat / f_u + r.r33,
    }
}

/// Evaluates the full quadratic principal-point equations (including the
/// terms the linear solver drops) minus their right-hand sides.
///
/// Returns `(res_v, res_u)` in pixels. On exact correspondences both vanish
/// at the true shift, which makes this the oracle for both the coefficient
/// algebra and the linearization error.
pub fn pp_residual(
    point: &Correspondence,
    image: &ImageGeometry,
    coeffs: &PpCoefficients,
    delta_v: f64,
    delta_u: f64,
) -> (f64, f64) {
    let v_hat_prime = point.moved.v - image.center_v();
    let u_hat_prime = image.center_u() - point.moved.u;
    let c = coeffs;

    let res_v = c.g * delta_v * delta_v
        + c.h * delta_v * delta_u
        + (c.a + c.i - c.g * v_hat_prime) * delta_v
        + (c.b - c.h * v_hat_prime) * delta_u
        - (c.i * v_hat_prime - c.c);

    let res_u = -c.h * delta_u * delta_u
        - c.g * delta_v * delta_u
        + (c.d - c.g * u_hat_prime) * delta_v
        + (c.e - c.i - c.h * u_hat_prime) * delta_u
        - (c.i * u_hat_prime - c.f);

    (res_v, res_u)
}

fn require_finite_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "{name} must be finite and positive, got {value}"
        )));
    }
    Ok(())
}

/// Selects the correspondences feeding a focal-length estimate.
fn select_points(set: &CorrespondenceSet, selection: PointSelection) -> Vec<&Correspondence> {
    match selection {
        PointSelection::All => set.points().iter().collect(),
        PointSelection::NearestCenter => {
            let c_v = set.image().center_v();
            let c_u = set.image().center_u();
            let nearest = set
                .points()
                .iter()
                .enumerate()
                .min_by(|(ia, a), (ib, b)| {
                    let da = (a.reference.v - c_v).powi(2) + (a.reference.u - c_u).powi(2);
                    let db = (b.reference.v - c_v).powi(2) + (b.reference.u - c_u).powi(2);
                    da.partial_cmp(&db)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(ia.cmp(ib))
                })
                .map(|(_, c)| c)
                .expect("set is non-empty");
            vec![nearest]
        }
    }
}

fn combine(estimates: &mut [f64], stat: FocalStat) -> f64 {
    match stat {
        FocalStat::Mean => estimates.iter().sum::<f64>() / estimates.len() as f64,
        FocalStat::Median => {
            estimates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let n = estimates.len();
            if n % 2 == 1 {
                estimates[n / 2]
            } else {
                0.5 * (estimates[n / 2 - 1] + estimates[n / 2])
            }
        }
    }
}

/// Closed-form `f_v` from a pan-only pair, default options (all points,
/// mean).
pub fn estimate_fv(pair: &CorrespondenceSet) -> Result<f64> {
    estimate_fv_with(pair, &FocalOptions::default())
}

/// Closed-form `f_v` from a pan-only pair.
///
/// Per correspondence
///
/// ```text
/// f_v = (v' - r11 v - (1 - r11) c_v) / r31
/// ```
///
/// then combined across the selected points. The estimate is exact when the
/// pan is small and the point sits on the center column; elsewhere the
/// dropped denominator contributes a bias that grows with the point's offset
/// from the center.
pub fn estimate_fv_with(pair: &CorrespondenceSet, options: &FocalOptions) -> Result<f64> {
    let rot = pair.rotation();
    if rot.tilt() != 0.0 {
        return Err(Error::WrongMotion {
            expected: "pan-only rotation",
            pan_deg: rot.pan_degrees(),
            tilt_deg: rot.tilt_degrees(),
        });
    }
    if rot.pan().abs() < MIN_ROTATION_RAD {
        return Err(Error::DegenerateRotation {
            detail: format!(
                "pan of {:.5} deg is below the {:.2e} deg floor",
                rot.pan_degrees(),
                MIN_ROTATION_RAD.to_degrees()
            ),
        });
    }
    let r = RotationMatrix::compose(rot).transposed_elements();
    if r.r31.abs() < 1e-8 {
        return Err(Error::DegenerateRotation {
            detail: "r31 vanishes for a zero pan".into(),
        });
    }
    let c_v = pair.image().center_v();
    let mut estimates: Vec<f64> = select_points(pair, options.selection)
        .iter()
        .map(|p| (p.moved.v - r.r11 * p.reference.v - (1.0 - r.r11) * c_v) / r.r31)
        .collect();
    let estimate = combine(&mut estimates, options.stat);
    if !estimate.is_finite() || estimate <= 0.0 {
        return Err(Error::EstimationFailed { value: estimate });
    }
    Ok(estimate)
}

/// Closed-form `f_u` from a tilt-only pair, default options.
pub fn estimate_fu(pair: &CorrespondenceSet) -> Result<f64> {
    estimate_fu_with(pair, &FocalOptions::default())
}

/// Closed-form `f_u` from a tilt-only pair.
///
/// Per correspondence
///
/// ```text
/// f_u = (r22 u - u' + (1 - r22) c_u) / r32
/// ```
pub fn estimate_fu_with(pair: &CorrespondenceSet, options: &FocalOptions) -> Result<f64> {
    let rot = pair.rotation();
    if rot.pan() != 0.0 {
        return Err(Error::WrongMotion {
            expected: "tilt-only rotation",
            pan_deg: rot.pan_degrees(),
            tilt_deg: rot.tilt_degrees(),
        });
    }
    if rot.tilt().abs() < MIN_ROTATION_RAD {
        return Err(Error::DegenerateRotation {
            detail: format!(
                "tilt of {:.5} deg is below the {:.2e} deg floor",
                rot.tilt_degrees(),
                MIN_ROTATION_RAD.to_degrees()
            ),
        });
    }
    let r = RotationMatrix::compose(rot).transposed_elements();
    if r.r32.abs() < 1e-8 {
        return Err(Error::DegenerateRotation {
            detail: "r32 vanishes for a zero tilt".into(),
        });
    }
    let c_u = pair.image().center_u();
    let mut estimates: Vec<f64> = select_points(pair, options.selection)
        .iter()
        .map(|p| (r.r22 * p.reference.u - p.moved.u + (1.0 - r.r22) * c_u) / r.r32)
        .collect();
    let estimate = combine(&mut estimates, options.stat);
    if !estimate.is_finite() || estimate <= 0.0 {
        return Err(Error::EstimationFailed { value: estimate });
    }
    Ok(estimate)
}

/// Least-squares principal point from a pan-plus-tilt pair and known focal
/// lengths.
///
/// Stacks two rows per correspondence,
///
/// ```text
/// [ a + i - g v_hat'   b - h v_hat' ] [delta_v]   [ v_hat' i - c ]
/// [ d - g u_hat'   e - i - h u_hat' ] [delta_u] = [ u_hat' i - f ]
/// ```
///
/// and solves by SVD, which stays stable when tiny rotations make the rows
/// nearly parallel. Even a single correspondence determines both unknowns.
pub fn estimate_principal_point(
    pair: &CorrespondenceSet,
    f_v: f64,
    f_u: f64,
) -> Result<PrincipalPointEstimate> {
    require_finite_positive("f_v", f_v)?;
    require_finite_positive("f_u", f_u)?;
    let rot = pair.rotation();
    if rot.pan().abs() < MIN_ROTATION_RAD || rot.tilt().abs() < MIN_ROTATION_RAD {
        return Err(Error::DegenerateRotation {
            detail: format!(
                "principal-point estimation needs both angles above the floor, got pan={:.5} deg, tilt={:.5} deg",
                rot.pan_degrees(),
                rot.tilt_degrees()
            ),
        });
    }

    let r = RotationMatrix::compose(rot).transposed_elements();
    let image = pair.image();
    let c_v = image.center_v();
    let c_u = image.center_u();
    let n = pair.len();

    let mut a = DMatrix::<f64>::zeros(2 * n, 2);
    let mut b = DVector::<f64>::zeros(2 * n);
    for (idx, point) in pair.points().iter().enumerate() {
        let coef = pp_coefficients(point, &r, f_v, f_u, image);
        let v_hat_prime = point.moved.v - c_v;
        let u_hat_prime = c_u - point.moved.u;

        a[(2 * idx, 0)] = coef.a + coef.i - coef.g * v_hat_prime;
        a[(2 * idx, 1)] = coef.b - coef.h * v_hat_prime;
        b[2 * idx] = v_hat_prime * coef.i - coef.c;

        a[(2 * idx + 1, 0)] = coef.d - coef.g * u_hat_prime;
        a[(2 * idx + 1, 1)] = coef.e - coef.i - coef.h * u_hat_prime;
        b[2 * idx + 1] = u_hat_prime * coef.i - coef.f;
    }

    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !s_min.is_finite() || s_min <= s_max * 1e-12 {
        return Err(Error::DegenerateConfiguration { condition });
    }
    let solution = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::DegenerateConfiguration { condition })?;
    let delta_v = solution[0];
    let delta_u = solution[1];
    let residual_norm = (&a * &solution - &b).norm();

    Ok(PrincipalPointEstimate {
        v_0: c_v + delta_v,
        u_0: c_u + delta_u,
        delta_v,
        delta_u,
        residual_norm,
        condition,
        points_used: n,
    })
}

/// Runs the full three-step pipeline with default options.
pub fn calibrate(
    pan_pair: &CorrespondenceSet,
    tilt_pair: &CorrespondenceSet,
    pantilt_pair: &CorrespondenceSet,
) -> Result<CalibrationResult> {
    calibrate_with(pan_pair, tilt_pair, pantilt_pair, &CalibrateOptions::default())
}

/// Runs the full three-step pipeline: `f_v` from the pan pair, `f_u` from
/// the tilt pair, then the principal point from the pan-tilt pair using the
/// estimated focal lengths. Errors are tagged with the failing stage.
pub fn calibrate_with(
    pan_pair: &CorrespondenceSet,
    tilt_pair: &CorrespondenceSet,
    pantilt_pair: &CorrespondenceSet,
    options: &CalibrateOptions,
) -> Result<CalibrationResult> {
    if pan_pair.image() != tilt_pair.image() || pan_pair.image() != pantilt_pair.image() {
        return Err(Error::InvalidInput(
            "the three correspondence sets must share one image geometry".into(),
        ));
    }

    let f_v = estimate_fv_with(pan_pair, &options.focal).map_err(|e| e.in_stage(Stage::FocalV))?;
    let f_u = estimate_fu_with(tilt_pair, &options.focal).map_err(|e| e.in_stage(Stage::FocalU))?;
    let pp = estimate_principal_point(pantilt_pair, f_v, f_u)
        .map_err(|e| e.in_stage(Stage::PrincipalPoint))?;

    let intrinsics = Intrinsics::new(f_v, f_u, pp.v_0, pp.u_0)
        .map_err(|e| e.in_stage(Stage::PrincipalPoint))?;

    let focal_count = |set: &CorrespondenceSet| match options.focal.selection {
        PointSelection::All => set.len(),
        PointSelection::NearestCenter => 1,
    };

    Ok(CalibrationResult {
        intrinsics,
        fv_points_used: focal_count(pan_pair),
        fu_points_used: focal_count(tilt_pair),
        pp_points_used: pp.points_used,
        pp_residual_norm: pp.residual_norm,
        pp_condition_estimate: pp.condition,
        delta_v: pp.delta_v,
        delta_u: pp.delta_u,
    })
}
