//! Synthetic pan-tilt camera: seeded 3D scenes, exact forward projection
//! before/after a rotation, and angular/pixel noise injection.
//!
//! The rotated view is produced by rotating the viewing rays with `R^T` and
//! projecting in 3D -- deliberately *not* by applying the homography, so the
//! two projection paths stay independent and can be checked against each
//! other in tests.
//!
//! All randomness flows through a seedable, portable generator (ChaCha) with
//! one stream per purpose (scene, reference-view noise, moved-view noise),
//! so every experiment is reproducible bit-for-bit from its seed.

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Correspondence, CorrespondenceSet};
use crate::geometry::{ImageGeometry, ImagePoint, Intrinsics, RotationMatrix, RotationSpec};

const SCENE_STREAM: u64 = 0;
const REF_NOISE_STREAM: u64 = 1;
const MOVED_NOISE_STREAM: u64 = 2;

/// Points closer than this to the camera plane are treated as behind it.
const MIN_DEPTH: f64 = 1e-9;

/// Axis-aligned box in camera coordinates (x right, y up, z forward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        let finite = min.iter().chain(max.iter()).all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidScene("bounds must be finite".into()));
        }
        if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
            return Err(Error::InvalidScene(format!(
                "inverted bounds: min {min:?} exceeds max {max:?}"
            )));
        }
        if min[2] <= 0.0 {
            return Err(Error::InvalidScene(
                "bounds must lie entirely in front of the camera (min depth > 0)".into(),
            ));
        }
        Ok(Self { min, max })
    }

    fn of_points(points: &[Vector3<f64>]) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in points {
            for axis in 0..3 {
                min[axis] = min[axis].min(p[axis]);
                max[axis] = max[axis].max(p[axis]);
            }
        }
        Self { min, max }
    }
}

/// The default scene box: a shallow wall of points whose projections fill
/// nearly the whole default image.
///
/// A wide image footprint matters for principal-point estimation: the
/// least-squares rows are spanned by the points' center offsets, and a
/// tight cluster leaves the system weakly determined, strongly amplifying
/// any focal-length error. Focal-length estimation prefers the opposite
/// (points near the center), which is what the nearest-center selection is
/// for. Points near the image border drift out of view under the larger
/// sweep rotations and are simply dropped for those cells.
pub fn default_bounds() -> Aabb {
    Aabb::new([-2.0, -1.5, 5.5], [2.0, 1.5, 6.5]).expect("static bounds are valid")
}

/// A 3D point cloud plus the seed and bounds it was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    points: Vec<Vector3<f64>>,
    seed: u64,
    bounds: Aabb,
}

impl Scene {
    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Noise injected by [`image_pair`].
///
/// `sigma_pixel` is the standard deviation of isotropic Gaussian noise added
/// independently to every coordinate of both views. The angle errors perturb
/// the rotation actually applied while the produced correspondence set keeps
/// the nominal rotation, which is exactly the situation of an estimator fed
/// inaccurate angle readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_pixel: f64,
    pub angle_error_pan: f64,
    pub angle_error_tilt: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            sigma_pixel: 0.0,
            angle_error_pan: 0.0,
            angle_error_tilt: 0.0,
            seed: 0,
        }
    }

    pub fn pixel(sigma_pixel: f64, seed: u64) -> Self {
        Self {
            sigma_pixel,
            angle_error_pan: 0.0,
            angle_error_tilt: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.sigma_pixel.is_finite() || self.sigma_pixel < 0.0 {
            return Err(Error::InvalidInput(format!(
                "sigma_pixel must be non-negative, got {}",
                self.sigma_pixel
            )));
        }
        if !self.angle_error_pan.is_finite() || !self.angle_error_tilt.is_finite() {
            return Err(Error::InvalidInput("angle errors must be finite".into()));
        }
        Ok(())
    }
}

/// The camera whose parameters the experiments try to recover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthCamera {
    pub intrinsics: Intrinsics,
    pub image: ImageGeometry,
}

impl GroundTruthCamera {
    pub fn new(intrinsics: Intrinsics, image: ImageGeometry) -> Self {
        Self { intrinsics, image }
    }

    /// The default simulated camera: 640x480 image, square focal length
    /// 772.55 px, principal point (314, 244) -- slightly off the (320, 240)
    /// center, so the shift being estimated is nonzero.
    pub fn default_simulated() -> Self {
        Self {
            intrinsics: Intrinsics::new(772.55, 772.55, 314.0, 244.0)
                .expect("static intrinsics are valid"),
            image: ImageGeometry::new(640, 480).expect("static image geometry is valid"),
        }
    }

    /// Projects a camera-frame 3D point; `None` if it is not in front of the
    /// camera.
    pub fn project(&self, point: &Vector3<f64>) -> Option<ImagePoint> {
        if point.z <= MIN_DEPTH {
            return None;
        }
        Some(
            self.intrinsics
                .project_normalized(point.x / point.z, point.y / point.z),
        )
    }
}

/// Derives an independent child seed; splitmix64 finalizer.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9e3779b97f4a7c15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// `n` points uniformly distributed in `bounds`, deterministic per seed.
pub fn generate_scene(n: usize, bounds: &Aabb, seed: u64) -> Result<Scene> {
    if n == 0 {
        return Err(Error::InvalidScene("scene needs at least one point".into()));
    }
    // Re-validate: callers may have built the box by hand.
    let bounds = Aabb::new(bounds.min, bounds.max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SCENE_STREAM);
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut coords = [0.0_f64; 3];
        for (axis, coord) in coords.iter_mut().enumerate() {
            *coord = if bounds.min[axis] == bounds.max[axis] {
                bounds.min[axis]
            } else {
                rng.random_range(bounds.min[axis]..=bounds.max[axis])
            };
        }
        points.push(Vector3::new(coords[0], coords[1], coords[2]));
    }
    Ok(Scene {
        points,
        seed,
        bounds,
    })
}

/// Projects the scene into a reference view and a rotated view and packages
/// the visible matches.
///
/// Points that fall outside the image rectangle or behind the camera in
/// either view are dropped, mirroring what a real matcher would deliver.
/// Pixel noise is then added to the surviving matches from two independent
/// seeded streams, one per view. The returned set records the *nominal*
/// rotation; projection uses the angle-perturbed one.
pub fn image_pair(
    scene: &Scene,
    cam: &GroundTruthCamera,
    rot: &RotationSpec,
    noise: &NoiseSpec,
) -> Result<CorrespondenceSet> {
    noise.validate()?;
    let applied = RotationSpec::new(
        rot.pan() + noise.angle_error_pan,
        rot.tilt() + noise.angle_error_tilt,
    )?;
    let rotation = RotationMatrix::compose(&applied);

    let mut matches = Vec::with_capacity(scene.len());
    for point in scene.points() {
        let Some(reference) = cam.project(point) else {
            continue;
        };
        if !cam.image.contains(&reference) {
            continue;
        }
        let rotated_ray = rotation.rotate_ray_inverse(point);
        let Some(moved) = cam.project(&rotated_ray) else {
            continue;
        };
        if !cam.image.contains(&moved) {
            continue;
        }
        matches.push(Correspondence::new(reference, moved));
    }
    if matches.is_empty() {
        return Err(Error::EmptyCorrespondences);
    }

    if noise.sigma_pixel > 0.0 {
        let mut ref_rng = ChaCha8Rng::seed_from_u64(noise.seed);
        ref_rng.set_stream(REF_NOISE_STREAM);
        let mut moved_rng = ChaCha8Rng::seed_from_u64(noise.seed);
        moved_rng.set_stream(MOVED_NOISE_STREAM);
        for m in &mut matches {
            let jitter_ref: [f64; 2] = [ref_rng.sample(StandardNormal), ref_rng.sample(StandardNormal)];
            let jitter_moved: [f64; 2] =
                [moved_rng.sample(StandardNormal), moved_rng.sample(StandardNormal)];
            m.reference.v += noise.sigma_pixel * jitter_ref[0];
            m.reference.u += noise.sigma_pixel * jitter_ref[1];
            m.moved.v += noise.sigma_pixel * jitter_moved[0];
            m.moved.u += noise.sigma_pixel * jitter_moved[1];
        }
    }

    CorrespondenceSet::new(*rot, cam.image, matches)
}

/// A deterministic structured point cloud shaped like a teapot: an ellipsoid
/// body with a spout, a handle arc, and a lid knob, 500 points total.
///
/// Every point projects inside the default 640x480 image at rotation zero,
/// and the cloud covers all four image quadrants, so a four-point
/// quadrant subsample is always available.
pub fn teapot_like_scene() -> Scene {
    let mut points = Vec::with_capacity(500);
    let center_z = 6.0;
    // Overall size; chosen so the cloud spans most of the default image.
    let scale = 1.45;

    // Body: Fibonacci-lattice ellipsoid, semi-axes scale * (1.1, 0.75, 0.75).
    let body_n = 330;
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    for i in 0..body_n {
        let y = 1.0 - 2.0 * (i as f64 + 0.5) / body_n as f64;
        let ring = (1.0 - y * y).sqrt();
        let angle = golden * i as f64;
        points.push(Vector3::new(
            scale * 1.1 * angle.cos() * ring,
            scale * 0.75 * y,
            center_z + scale * 0.75 * angle.sin() * ring,
        ));
    }

    // Spout: tapered rings marching out along +x.
    for ring in 0..8 {
        let t = ring as f64 / 7.0;
        let cx = 1.05 + 0.55 * t;
        let cy = -0.05 + 0.38 * t;
        let radius = 0.085 * (1.0 - 0.45 * t);
        for k in 0..10 {
            let phi = std::f64::consts::TAU * k as f64 / 10.0;
            points.push(Vector3::new(
                scale * cx,
                scale * (cy + radius * phi.cos()),
                center_z + scale * radius * phi.sin(),
            ));
        }
    }

    // Handle: tube along an arc on the -x side.
    for step in 0..10 {
        let psi = -1.25 + 2.5 * step as f64 / 9.0;
        let cx = -0.95 - 0.35 * psi.cos();
        let cy = 0.05 + 0.42 * psi.sin();
        for k in 0..8 {
            let phi = std::f64::consts::TAU * k as f64 / 8.0;
            points.push(Vector3::new(
                scale * (cx + 0.05 * phi.cos()),
                scale * cy,
                center_z + scale * 0.05 * phi.sin(),
            ));
        }
    }

    // Lid knob.
    for i in 0..10 {
        let y = 1.0 - 2.0 * (i as f64 + 0.5) / 10.0;
        let ring = (1.0 - y * y).sqrt();
        let angle = golden * i as f64;
        points.push(Vector3::new(
            scale * 0.12 * angle.cos() * ring,
            scale * (0.80 + 0.12 * y),
            center_z + scale * 0.12 * angle.sin() * ring,
        ));
    }

    debug_assert_eq!(points.len(), 500);
    let bounds = Aabb::of_points(&points);
    Scene {
        points,
        seed: 0,
        bounds,
    }
}

/// Picks one scene point per image quadrant, as balanced as the cloud
/// allows.
///
/// The anchor is the point reaching deepest into its quadrant (largest min
/// of the absolute center offsets); the other three quadrants contribute the
/// points closest to the anchor's mirrored positions. A near-symmetric
/// four-point pattern is the canonical "uniformly distributed" sample, and
/// symmetry also cancels most of the principal-point solver's sensitivity to
/// focal-length error. Ties go to the lowest point index.
pub fn quadrant_subsample(scene: &Scene, cam: &GroundTruthCamera) -> Result<Scene> {
    let c_v = cam.image.center_v();
    let c_u = cam.image.center_u();

    // Visible points with their center offsets, per quadrant.
    let mut offsets: [Vec<(usize, f64, f64)>; 4] = [vec![], vec![], vec![], vec![]];
    for (idx, point) in scene.points().iter().enumerate() {
        let Some(px) = cam.project(point) else {
            continue;
        };
        if !cam.image.contains(&px) {
            continue;
        }
        let dv = px.v - c_v;
        let du = px.u - c_u;
        let quadrant = match (dv >= 0.0, du >= 0.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        offsets[quadrant].push((idx, dv, du));
    }
    for (quadrant, list) in offsets.iter().enumerate() {
        if list.is_empty() {
            return Err(Error::InvalidScene(format!(
                "no visible point in image quadrant {quadrant}"
            )));
        }
    }

    let anchor = offsets[0]
        .iter()
        .copied()
        .max_by(|a, b| {
            let depth_a = a.1.abs().min(a.2.abs());
            let depth_b = b.1.abs().min(b.2.abs());
            depth_a.partial_cmp(&depth_b).unwrap().then(b.0.cmp(&a.0))
        })
        .expect("quadrant checked non-empty");

    let closest_to = |quadrant: usize, target_v: f64, target_u: f64| -> usize {
        offsets[quadrant]
            .iter()
            .copied()
            .min_by(|a, b| {
                let da = (a.1 - target_v).powi(2) + (a.2 - target_u).powi(2);
                let db = (b.1 - target_v).powi(2) + (b.2 - target_u).powi(2);
                da.partial_cmp(&db).unwrap().then(a.0.cmp(&b.0))
            })
            .expect("quadrant checked non-empty")
            .0
    };

    let (_, av, au) = anchor;
    let picks = [
        anchor.0,
        closest_to(1, -av, au),
        closest_to(2, -av, -au),
        closest_to(3, av, -au),
    ];
    let points: Vec<Vector3<f64>> = picks.iter().map(|&idx| scene.points()[idx]).collect();
    let bounds = Aabb::of_points(&points);
    Ok(Scene {
        points,
        seed: scene.seed,
        bounds,
    })
}
