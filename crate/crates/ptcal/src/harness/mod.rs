//! Experiment harness: angle sweeps, principal-point grids, Monte Carlo
//! statistics, and angular/pixel noise studies, with CSV and SVG output.
//!
//! Every run function is deterministic given its configuration: scenes and
//! noise draw from seeds derived with [`mix_seed`](crate::simulator::mix_seed),
//! and parallel cells are gathered in configuration order regardless of
//! completion order. Failed cells (degenerate rotations, empty pairs) are
//! recorded with a status token and excluded from aggregate statistics
//! rather than imputed.

pub mod report;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    calibrate_with, estimate_fu_with, estimate_fv_with, estimate_principal_point,
    CalibrateOptions, CorrespondenceSet, FocalOptions, MIN_ROTATION_RAD,
};
use crate::geometry::RotationSpec;
use crate::simulator::{
    default_bounds, generate_scene, image_pair, mix_seed, quadrant_subsample, teapot_like_scene,
    Aabb, GroundTruthCamera, NoiseSpec, Scene,
};

pub use report::{
    compute_aggregates, Aggregate, CellStatus, EvalRecord, ExperimentKind, ExperimentReport, Param,
};

/// Where the scene points for an experiment come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneSource {
    /// `n` points uniform in the default bounds, seeded from the config.
    Random { n: usize },
    /// The fixed 500-point structured cloud.
    Teapot,
    /// Four points of the structured cloud, one per image quadrant.
    TeapotQuadrants,
}

/// Which focal lengths feed principal-point estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalMode {
    /// Estimate per cell from pan-only and tilt-only pairs.
    Estimated,
    /// Use the ground-truth values.
    GroundTruth,
    /// Use a fixed, possibly wrong, pair. Reproduces the inaccurate-focal
    /// comparisons.
    Fixed { f_v: f64, f_u: f64 },
}

/// Shared configuration for the sweep-style studies.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub camera: GroundTruthCamera,
    pub angle_min_deg: f64,
    pub angle_max_deg: f64,
    pub steps: usize,
    pub scene: SceneSource,
    pub noise: NoiseSpec,
    pub focal_mode: FocalMode,
    pub focal_options: FocalOptions,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            camera: GroundTruthCamera::default_simulated(),
            angle_min_deg: -7.5,
            angle_max_deg: 7.5,
            steps: 30,
            scene: SceneSource::Random { n: 500 },
            noise: NoiseSpec::none(),
            focal_mode: FocalMode::GroundTruth,
            focal_options: FocalOptions::default(),
            seed: 1,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.angle_min_deg >= self.angle_max_deg {
            return Err(Error::InvalidInput(format!(
                "angle_min ({}) must be below angle_max ({})",
                self.angle_min_deg, self.angle_max_deg
            )));
        }
        if self.angle_min_deg < -90.0 || self.angle_max_deg > 90.0 {
            return Err(Error::InvalidInput(
                "angle range must stay within [-90, 90] degrees".into(),
            ));
        }
        if self.steps < 2 {
            return Err(Error::InvalidInput("sweep needs at least 2 steps".into()));
        }
        if let SceneSource::Random { n: 0 } = self.scene {
            return Err(Error::InvalidInput("scene needs at least one point".into()));
        }
        if let FocalMode::Fixed { f_v, f_u } = self.focal_mode {
            if f_v <= 0.0 || f_u <= 0.0 {
                return Err(Error::InvalidInput(
                    "fixed focal lengths must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    fn angle_grid(&self) -> Vec<f64> {
        linspace(self.angle_min_deg, self.angle_max_deg, self.steps)
    }

    fn build_scene(&self) -> Result<Scene> {
        match self.scene {
            SceneSource::Random { n } => {
                generate_scene(n, &default_bounds(), mix_seed(self.seed, 0))
            }
            SceneSource::Teapot => Ok(teapot_like_scene()),
            SceneSource::TeapotQuadrants => quadrant_subsample(&teapot_like_scene(), &self.camera),
        }
    }

    fn cell_noise(&self, salt: u64) -> NoiseSpec {
        NoiseSpec {
            seed: mix_seed(self.seed, salt),
            ..self.noise
        }
    }
}

/// Evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    let span = max - min;
    (0..steps)
        .map(|i| min + span * i as f64 / (steps - 1) as f64)
        .collect()
}

fn status_of(outcome: &Result<f64>) -> Option<CellStatus> {
    outcome.as_ref().err().map(CellStatus::from)
}

/// Focal-length estimates across an angle grid: one pan pair per angle for
/// `f_v`, one tilt pair for `f_u`.
pub fn run_focal_sweep(experiment_id: &str, cfg: &SweepConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let scene = cfg.build_scene()?;
    let angles = cfg.angle_grid();

    let records: Vec<EvalRecord> = angles
        .par_iter()
        .enumerate()
        .map(|(idx, &angle_deg)| {
            let salt = idx as u64 * 2;
            let fv = pan_pair(&scene, cfg, angle_deg, salt)
                .and_then(|pair| estimate_fv_with(&pair, &cfg.focal_options));
            let fu = tilt_pair(&scene, cfg, angle_deg, salt + 1)
                .and_then(|pair| estimate_fu_with(&pair, &cfg.focal_options));
            let status = status_of(&fv)
                .or_else(|| status_of(&fu))
                .unwrap_or(CellStatus::Ok);
            EvalRecord {
                pan_deg: angle_deg,
                tilt_deg: angle_deg,
                sigma_pixel: cfg.noise.sigma_pixel,
                angle_err_deg: cfg.noise.angle_error_pan.to_degrees(),
                fv_est: fv.ok(),
                fu_est: fu.ok(),
                v0_est: None,
                u0_est: None,
                status,
            }
        })
        .collect();

    Ok(ExperimentReport::new(
        experiment_id,
        ExperimentKind::FocalSweep,
        cfg.seed,
        cfg.camera,
        records,
        Vec::new(),
    ))
}

/// Principal-point estimation over the full pan x tilt grid.
///
/// Cells where either angle falls below the rotation floor are recorded as
/// degenerate and never enter the aggregates.
pub fn run_pp_grid(experiment_id: &str, cfg: &SweepConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let scene = cfg.build_scene()?;
    let angles = cfg.angle_grid();
    let cells: Vec<(f64, f64)> = angles
        .iter()
        .flat_map(|&pan| angles.iter().map(move |&tilt| (pan, tilt)))
        .collect();

    let records: Vec<EvalRecord> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(pan_deg, tilt_deg))| pp_grid_cell(cfg, &scene, idx, pan_deg, tilt_deg))
        .collect();

    Ok(ExperimentReport::new(
        experiment_id,
        ExperimentKind::PpGrid,
        cfg.seed,
        cfg.camera,
        records,
        Vec::new(),
    ))
}

fn pp_grid_cell(
    cfg: &SweepConfig,
    scene: &Scene,
    idx: usize,
    pan_deg: f64,
    tilt_deg: f64,
) -> EvalRecord {
    let fail = |status| EvalRecord::failed(pan_deg, tilt_deg, cfg.noise.sigma_pixel, 0.0, status);

    if pan_deg.to_radians().abs() < MIN_ROTATION_RAD
        || tilt_deg.to_radians().abs() < MIN_ROTATION_RAD
    {
        return fail(CellStatus::DegenerateRotation);
    }

    let salt = idx as u64 * 3;
    let (f_v, f_u, fv_est, fu_est) = match cfg.focal_mode {
        FocalMode::GroundTruth => (
            cfg.camera.intrinsics.f_v,
            cfg.camera.intrinsics.f_u,
            None,
            None,
        ),
        FocalMode::Fixed { f_v, f_u } => (f_v, f_u, None, None),
        FocalMode::Estimated => {
            let fv = pan_pair(scene, cfg, pan_deg, salt)
                .and_then(|pair| estimate_fv_with(&pair, &cfg.focal_options));
            let fu = tilt_pair(scene, cfg, tilt_deg, salt + 1)
                .and_then(|pair| estimate_fu_with(&pair, &cfg.focal_options));
            match (fv, fu) {
                (Ok(f_v), Ok(f_u)) => (f_v, f_u, Some(f_v), Some(f_u)),
                (fv, fu) => {
                    let status = status_of(&fv).or_else(|| status_of(&fu)).unwrap();
                    return fail(status);
                }
            }
        }
    };

    let rotation = match RotationSpec::from_degrees(pan_deg, tilt_deg) {
        Ok(r) => r,
        Err(e) => return fail(CellStatus::from(&e)),
    };
    let pair = match image_pair(scene, &cfg.camera, &rotation, &cfg.cell_noise(salt + 2)) {
        Ok(p) => p,
        Err(e) => return fail(CellStatus::from(&e)),
    };
    match estimate_principal_point(&pair, f_v, f_u) {
        Ok(pp) => EvalRecord {
            pan_deg,
            tilt_deg,
            sigma_pixel: cfg.noise.sigma_pixel,
            angle_err_deg: 0.0,
            fv_est,
            fu_est,
            v0_est: Some(pp.v_0),
            u0_est: Some(pp.u_0),
            status: CellStatus::Ok,
        },
        Err(e) => fail(CellStatus::from(&e)),
    }
}

/// Monte Carlo configuration: repeated full calibrations on fresh random
/// scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub camera: GroundTruthCamera,
    /// Pan feeds the pan pair, tilt the tilt pair, both the pan-tilt pair.
    pub rotation: RotationSpec,
    pub runs: usize,
    pub points_per_run: usize,
    pub bounds: Aabb,
    pub noise: NoiseSpec,
    pub options: CalibrateOptions,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            camera: GroundTruthCamera::default_simulated(),
            rotation: RotationSpec::from_degrees(-0.5, 0.5).expect("static rotation is valid"),
            runs: 1000,
            points_per_run: 500,
            bounds: default_bounds(),
            noise: NoiseSpec::none(),
            options: CalibrateOptions::default(),
            seed: 1,
        }
    }
}

/// Full `calibrate` on `runs` fresh random scenes; per-parameter mean, SD,
/// and error aggregates. Failed runs are recorded and excluded from the
/// statistics.
pub fn run_monte_carlo(experiment_id: &str, cfg: &MonteCarloConfig) -> Result<ExperimentReport> {
    if cfg.runs == 0 {
        return Err(Error::InvalidInput("monte carlo needs at least one run".into()));
    }
    if cfg.points_per_run == 0 {
        return Err(Error::InvalidInput("runs need at least one point".into()));
    }
    let pan_deg = cfg.rotation.pan_degrees();
    let tilt_deg = cfg.rotation.tilt_degrees();

    let records: Vec<EvalRecord> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let salt = run as u64 * 4;
            let outcome = monte_carlo_run(cfg, salt);
            match outcome {
                Ok(result) => EvalRecord {
                    pan_deg,
                    tilt_deg,
                    sigma_pixel: cfg.noise.sigma_pixel,
                    angle_err_deg: cfg.noise.angle_error_pan.to_degrees(),
                    fv_est: Some(result.intrinsics.f_v),
                    fu_est: Some(result.intrinsics.f_u),
                    v0_est: Some(result.intrinsics.v_0),
                    u0_est: Some(result.intrinsics.u_0),
                    status: CellStatus::Ok,
                },
                Err(e) => EvalRecord::failed(
                    pan_deg,
                    tilt_deg,
                    cfg.noise.sigma_pixel,
                    cfg.noise.angle_error_pan.to_degrees(),
                    CellStatus::from(&e),
                ),
            }
        })
        .collect();

    let mut warnings = Vec::new();
    if cfg.runs == 1 {
        warnings.push("single run: standard deviation is reported as 0".into());
    }
    Ok(ExperimentReport::new(
        experiment_id,
        ExperimentKind::MonteCarlo,
        cfg.seed,
        cfg.camera,
        records,
        warnings,
    ))
}

fn monte_carlo_run(cfg: &MonteCarloConfig, salt: u64) -> Result<crate::estimators::CalibrationResult> {
    let scene = generate_scene(cfg.points_per_run, &cfg.bounds, mix_seed(cfg.seed, salt))?;
    let sub_noise = |offset: u64| NoiseSpec {
        seed: mix_seed(cfg.seed, salt + offset),
        ..cfg.noise
    };
    let pan_rot = RotationSpec::new(cfg.rotation.pan(), 0.0)?;
    let tilt_rot = RotationSpec::new(0.0, cfg.rotation.tilt())?;
    let pan = image_pair(&scene, &cfg.camera, &pan_rot, &sub_noise(1))?;
    let tilt = image_pair(&scene, &cfg.camera, &tilt_rot, &sub_noise(2))?;
    let pantilt = image_pair(&scene, &cfg.camera, &cfg.rotation, &sub_noise(3))?;
    calibrate_with(&pan, &tilt, &pantilt, &cfg.options)
}

/// Sensitivity of the estimates to errors in the declared angles.
///
/// The correspondences are generated with the *true* base rotation and held
/// fixed; the estimators are then fed nominal angles offset by each entry of
/// `angle_errors_deg` (both axes). A zero entry reproduces the noise-free
/// estimates exactly.
pub fn run_angular_noise_study(
    experiment_id: &str,
    cfg: &SweepConfig,
    angle_errors_deg: &[f64],
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if angle_errors_deg.is_empty() {
        return Err(Error::InvalidInput("angle error list must be non-empty".into()));
    }
    let scene = cfg.build_scene()?;
    let angles = cfg.angle_grid();
    let cells: Vec<(f64, f64)> = angles
        .iter()
        .flat_map(|&base| angle_errors_deg.iter().map(move |&err| (base, err)))
        .collect();

    let records: Vec<EvalRecord> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(base_deg, err_deg))| angular_noise_cell(cfg, &scene, idx, base_deg, err_deg))
        .collect();

    Ok(ExperimentReport::new(
        experiment_id,
        ExperimentKind::AngularNoise,
        cfg.seed,
        cfg.camera,
        records,
        Vec::new(),
    ))
}

fn angular_noise_cell(
    cfg: &SweepConfig,
    scene: &Scene,
    idx: usize,
    base_deg: f64,
    err_deg: f64,
) -> EvalRecord {
    let fail = |status| {
        EvalRecord::failed(base_deg, base_deg, cfg.noise.sigma_pixel, err_deg, status)
    };
    let declared_deg = base_deg + err_deg;
    let err_rad = err_deg.to_radians();
    let salt = idx as u64 * 3;

    // The pair is built with nominal = declared and an angular perturbation
    // of -err, so the projection uses the true base angle while the set
    // declares the contaminated one.
    let build = |pan_nominal: f64, tilt_nominal: f64, pan_err: f64, tilt_err: f64, sub: u64| {
        let rotation = RotationSpec::from_degrees(pan_nominal, tilt_nominal)?;
        let noise = NoiseSpec {
            sigma_pixel: cfg.noise.sigma_pixel,
            angle_error_pan: pan_err,
            angle_error_tilt: tilt_err,
            seed: mix_seed(cfg.seed, salt + sub),
        };
        image_pair(scene, &cfg.camera, &rotation, &noise)
    };

    let fv = build(declared_deg, 0.0, -err_rad, 0.0, 0)
        .and_then(|pair| estimate_fv_with(&pair, &cfg.focal_options));
    let fu = build(0.0, declared_deg, 0.0, -err_rad, 1)
        .and_then(|pair| estimate_fu_with(&pair, &cfg.focal_options));

    let focals = match cfg.focal_mode {
        FocalMode::GroundTruth => Ok((cfg.camera.intrinsics.f_v, cfg.camera.intrinsics.f_u)),
        FocalMode::Fixed { f_v, f_u } => Ok((f_v, f_u)),
        FocalMode::Estimated => match (&fv, &fu) {
            (Ok(f_v), Ok(f_u)) => Ok((*f_v, *f_u)),
            _ => Err(()),
        },
    };

    let pp = match focals {
        Ok((f_v, f_u)) => build(declared_deg, declared_deg, -err_rad, -err_rad, 2)
            .and_then(|pair| estimate_principal_point(&pair, f_v, f_u)),
        Err(()) => {
            let status = status_of(&fv).or_else(|| status_of(&fu)).unwrap();
            return fail(status);
        }
    };

    let status = status_of(&fv)
        .or_else(|| status_of(&fu))
        .or_else(|| pp.as_ref().err().map(CellStatus::from))
        .unwrap_or(CellStatus::Ok);
    EvalRecord {
        pan_deg: base_deg,
        tilt_deg: base_deg,
        sigma_pixel: cfg.noise.sigma_pixel,
        angle_err_deg: err_deg,
        fv_est: fv.ok(),
        fu_est: fu.ok(),
        v0_est: pp.as_ref().ok().map(|p| p.v_0),
        u0_est: pp.as_ref().ok().map(|p| p.u_0),
        status,
    }
}

/// Sensitivity of the full pipeline to pixel noise, over a grid of base
/// angles and noise levels, with `reps` independently seeded repetitions per
/// cell.
///
/// Noise levels outside the studied `[0, 3]` range are allowed but flagged
/// in the report warnings.
pub fn run_pixel_noise_study(
    experiment_id: &str,
    cfg: &SweepConfig,
    sigmas: &[f64],
    reps: usize,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if sigmas.is_empty() {
        return Err(Error::InvalidInput("sigma list must be non-empty".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidInput("need at least one repetition".into()));
    }
    if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidInput("sigmas must be non-negative".into()));
    }
    let mut warnings = Vec::new();
    if sigmas.iter().any(|s| *s > 3.0) {
        warnings.push("sigma above the studied [0, 3] pixel range".into());
    }

    let scene = cfg.build_scene()?;
    let angles = cfg.angle_grid();
    let cells: Vec<(f64, f64, usize)> = angles
        .iter()
        .flat_map(|&base| {
            sigmas
                .iter()
                .flat_map(move |&sigma| (0..reps).map(move |rep| (base, sigma, rep)))
        })
        .collect();

    let records: Vec<EvalRecord> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(base_deg, sigma, _rep))| pixel_noise_cell(cfg, &scene, idx, base_deg, sigma))
        .collect();

    Ok(ExperimentReport::new(
        experiment_id,
        ExperimentKind::PixelNoise,
        cfg.seed,
        cfg.camera,
        records,
        warnings,
    ))
}

fn pixel_noise_cell(
    cfg: &SweepConfig,
    scene: &Scene,
    idx: usize,
    base_deg: f64,
    sigma: f64,
) -> EvalRecord {
    let fail = |status| EvalRecord::failed(base_deg, base_deg, sigma, 0.0, status);
    let salt = idx as u64 * 3;
    let noise = |sub: u64| NoiseSpec {
        sigma_pixel: sigma,
        angle_error_pan: 0.0,
        angle_error_tilt: 0.0,
        seed: mix_seed(cfg.seed, salt + sub),
    };

    let run = || -> Result<EvalRecord> {
        let pan_rot = RotationSpec::from_degrees(base_deg, 0.0)?;
        let tilt_rot = RotationSpec::from_degrees(0.0, base_deg)?;
        let both_rot = RotationSpec::from_degrees(base_deg, base_deg)?;
        let pan = image_pair(scene, &cfg.camera, &pan_rot, &noise(0))?;
        let tilt = image_pair(scene, &cfg.camera, &tilt_rot, &noise(1))?;
        let pantilt = image_pair(scene, &cfg.camera, &both_rot, &noise(2))?;

        let f_v = estimate_fv_with(&pan, &cfg.focal_options)?;
        let f_u = estimate_fu_with(&tilt, &cfg.focal_options)?;
        let (pp_fv, pp_fu) = match cfg.focal_mode {
            FocalMode::GroundTruth => (cfg.camera.intrinsics.f_v, cfg.camera.intrinsics.f_u),
            FocalMode::Fixed { f_v, f_u } => (f_v, f_u),
            FocalMode::Estimated => (f_v, f_u),
        };
        let pp = estimate_principal_point(&pantilt, pp_fv, pp_fu)?;
        Ok(EvalRecord {
            pan_deg: base_deg,
            tilt_deg: base_deg,
            sigma_pixel: sigma,
            angle_err_deg: 0.0,
            fv_est: Some(f_v),
            fu_est: Some(f_u),
            v0_est: Some(pp.v_0),
            u0_est: Some(pp.u_0),
            status: CellStatus::Ok,
        })
    };
    run().unwrap_or_else(|e| fail(CellStatus::from(&e)))
}

fn pan_pair(scene: &Scene, cfg: &SweepConfig, pan_deg: f64, salt: u64) -> Result<CorrespondenceSet> {
    let rotation = RotationSpec::from_degrees(pan_deg, 0.0)?;
    image_pair(scene, &cfg.camera, &rotation, &cfg.cell_noise(salt))
}

fn tilt_pair(scene: &Scene, cfg: &SweepConfig, tilt_deg: f64, salt: u64) -> Result<CorrespondenceSet> {
    let rotation = RotationSpec::from_degrees(0.0, tilt_deg)?;
    image_pair(scene, &cfg.camera, &rotation, &cfg.cell_noise(salt))
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
}

/// Writes a report to `dir` and returns the created paths.
///
/// CSV emission produces `<id>_records.csv` and `<id>_summary.csv`; SVG
/// emission produces the figure analogs appropriate to the experiment kind.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        ReportFormat::Csv => {
            let records = dir.join(format!("{}_records.csv", report.experiment_id));
            let summary = dir.join(format!("{}_summary.csv", report.experiment_id));
            write_text(&records, &report.records_csv())?;
            write_text(&summary, &report.summary_csv())?;
            Ok(vec![records, summary])
        }
        ReportFormat::Svg => emit_svgs(report, dir),
    }
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit_svgs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |name: String, content: String| -> Result<()> {
        let path = dir.join(name);
        write_text(&path, &content)?;
        written.push(path);
        Ok(())
    };
    let id = &report.experiment_id;
    let gt = &report.ground_truth.intrinsics;

    match report.kind {
        ExperimentKind::FocalSweep => {
            for (param, suffix) in [(Param::Fv, "fv"), (Param::Fu, "fu")] {
                let points: Vec<(f64, f64)> = report
                    .records
                    .iter()
                    .filter(|r| r.status.is_ok())
                    .filter_map(|r| param.estimate(r).map(|est| (r.pan_deg, est)))
                    .collect();
                let gt_value = param.ground_truth(&report.ground_truth);
                let gt_line = points
                    .first()
                    .zip(points.last())
                    .map(|(first, last)| vec![(first.0, gt_value), (last.0, gt_value)])
                    .unwrap_or_default();
                let plot = svg::Plot::new(
                    format!("{} estimate vs rotation angle", param.name()),
                    "rotation angle (deg)",
                    format!("{} (px)", param.name()),
                )
                .with_series(svg::Series::line(gt_line, "#888888"))
                .with_series(svg::Series::line(points, svg::angle_color(1.0)));
                emit(format!("{id}_{suffix}.svg"), plot.render())?;
            }
        }
        ExperimentKind::PpGrid => {
            // Grid view: cells colored by principal-point error magnitude.
            let errors: Vec<(f64, f64, f64)> = report
                .records
                .iter()
                .filter(|r| r.status.is_ok())
                .filter_map(|r| {
                    let v0 = r.v0_est?;
                    let u0 = r.u0_est?;
                    let err = ((v0 - gt.v_0).powi(2) + (u0 - gt.u_0).powi(2)).sqrt();
                    Some((r.pan_deg, r.tilt_deg, err))
                })
                .collect();
            let max_err = errors.iter().map(|e| e.2).fold(f64::MIN_POSITIVE, f64::max);
            let mut grid =
                svg::Plot::new("principal-point error over the rotation grid", "pan (deg)", "tilt (deg)");
            for bucket in color_buckets(&errors, |e| e.2 / max_err) {
                grid = grid.with_series(bucket);
            }
            emit(format!("{id}_grid.svg"), grid.render())?;

            // Image-plane view: estimated principal points colored by the
            // rotation magnitude, truth marked with a cross.
            let max_norm = report
                .records
                .iter()
                .map(|r| r.pan_deg.hypot(r.tilt_deg))
                .fold(f64::MIN_POSITIVE, f64::max);
            let estimates: Vec<(f64, f64, f64)> = report
                .records
                .iter()
                .filter(|r| r.status.is_ok())
                .filter_map(|r| {
                    Some((r.v0_est?, r.u0_est?, r.pan_deg.hypot(r.tilt_deg) / max_norm))
                })
                .collect();
            let mut scatter = svg::Plot::new(
                "estimated principal points (red: small angles, blue: large)",
                "v_0 (px)",
                "u_0 (px)",
            )
            .with_cross(gt.v_0, gt.u_0, "#000000");
            for bucket in color_buckets(&estimates, |e| e.2) {
                scatter = scatter.with_series(bucket);
            }
            emit(format!("{id}_scatter.svg"), scatter.render())?;
        }
        ExperimentKind::MonteCarlo => {
            let estimates: Vec<(f64, f64)> = report
                .records
                .iter()
                .filter(|r| r.status.is_ok())
                .filter_map(|r| Some((r.v0_est?, r.u0_est?)))
                .collect();
            let plot = svg::Plot::new(
                "principal-point estimates across runs",
                "v_0 (px)",
                "u_0 (px)",
            )
            .with_cross(gt.v_0, gt.u_0, "#000000")
            .with_series(svg::Series::scatter(estimates, svg::angle_color(0.8)));
            emit(format!("{id}_scatter.svg"), plot.render())?;
        }
        ExperimentKind::AngularNoise | ExperimentKind::PixelNoise => {
            let pixel = report.kind == ExperimentKind::PixelNoise;
            let (x_label, x_of): (&str, fn(&EvalRecord) -> f64) = if pixel {
                ("pixel noise sigma (px)", |r| r.sigma_pixel)
            } else {
                ("angle error (deg)", |r| r.angle_err_deg)
            };
            for (param, suffix) in [
                (Param::Fv, "fv"),
                (Param::Fu, "fu"),
                (Param::V0, "v0"),
                (Param::U0, "u0"),
            ] {
                let mut by_base: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
                for r in report.records.iter().filter(|r| r.status.is_ok()) {
                    if let Some(est) = param.estimate(r) {
                        let err = (est - param.ground_truth(&report.ground_truth)).abs();
                        by_base
                            .entry(r.pan_deg.to_bits())
                            .or_default()
                            .push((x_of(r), err));
                    }
                }
                if by_base.is_empty() {
                    continue;
                }
                let max_base = by_base
                    .keys()
                    .map(|bits| f64::from_bits(*bits).abs())
                    .fold(f64::MIN_POSITIVE, f64::max);
                let mut plot = svg::Plot::new(
                    format!("|{} error| per base angle", param.name()),
                    x_label,
                    "absolute error (px)",
                );
                for (bits, mut points) in by_base {
                    let base = f64::from_bits(bits);
                    // Average repetitions sharing one x value.
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut averaged: Vec<(f64, f64)> = Vec::new();
                    for (x, y) in points {
                        match averaged.last_mut() {
                            Some(last) if last.0 == x => {
                                last.1 = (last.1 + y) / 2.0;
                            }
                            _ => averaged.push((x, y)),
                        }
                    }
                    plot = plot.with_series(svg::Series::line(
                        averaged,
                        svg::angle_color(base.abs() / max_base),
                    ));
                }
                emit(format!("{id}_{suffix}.svg"), plot.render())?;
            }
        }
    }
    Ok(written)
}

/// Groups colored points into a bounded number of scatter series (one per
/// color bucket) so plots stay small.
fn color_buckets(
    points: &[(f64, f64, f64)],
    normalized: impl Fn(&(f64, f64, f64)) -> f64,
) -> Vec<svg::Series> {
    const BUCKETS: usize = 12;
    let mut grouped: Vec<Vec<(f64, f64)>> = vec![Vec::new(); BUCKETS];
    for p in points {
        let t = normalized(p).clamp(0.0, 1.0);
        let bucket = ((t * (BUCKETS - 1) as f64).round() as usize).min(BUCKETS - 1);
        grouped[bucket].push((p.0, p.1));
    }
    grouped
        .into_iter()
        .enumerate()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(bucket, pts)| {
            svg::Series::scatter(pts, svg::angle_color(bucket as f64 / (BUCKETS - 1) as f64))
        })
        .collect()
}
