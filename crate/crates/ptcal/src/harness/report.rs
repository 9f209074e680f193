//! Experiment records, aggregate statistics, and CSV emission.
//!
//! One record per evaluation; aggregates are always recomputable from the
//! records, and the CSV writers are plain string builders so that identical
//! reports serialize to identical bytes.

use std::fmt;

use crate::error::Error;
use crate::simulator::GroundTruthCamera;

/// Which study produced a report; selects the SVG plots to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    FocalSweep,
    PpGrid,
    MonteCarlo,
    AngularNoise,
    PixelNoise,
}

/// Outcome of one evaluation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    DegenerateRotation,
    WrongMotion,
    EstimationFailed,
    DegenerateConfiguration,
    EmptyPair,
    Error,
}

impl CellStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, CellStatus::Ok)
    }
}

impl From<&Error> for CellStatus {
    fn from(error: &Error) -> Self {
        match error.root() {
            Error::DegenerateRotation { .. } => CellStatus::DegenerateRotation,
            Error::WrongMotion { .. } => CellStatus::WrongMotion,
            Error::EstimationFailed { .. } => CellStatus::EstimationFailed,
            Error::DegenerateConfiguration { .. } => CellStatus::DegenerateConfiguration,
            Error::EmptyCorrespondences => CellStatus::EmptyPair,
            _ => CellStatus::Error,
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            CellStatus::Ok => "ok",
            CellStatus::DegenerateRotation => "degenerate-rotation",
            CellStatus::WrongMotion => "wrong-motion",
            CellStatus::EstimationFailed => "estimation-failed",
            CellStatus::DegenerateConfiguration => "degenerate-configuration",
            CellStatus::EmptyPair => "empty-pair",
            CellStatus::Error => "error",
        };
        f.write_str(token)
    }
}

/// One evaluated configuration. Absent estimates (a focal sweep has no
/// principal point, for instance) stay `None` and serialize as empty cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRecord {
    pub pan_deg: f64,
    pub tilt_deg: f64,
    pub sigma_pixel: f64,
    pub angle_err_deg: f64,
    pub fv_est: Option<f64>,
    pub fu_est: Option<f64>,
    pub v0_est: Option<f64>,
    pub u0_est: Option<f64>,
    pub status: CellStatus,
}

impl EvalRecord {
    pub fn failed(pan_deg: f64, tilt_deg: f64, sigma_pixel: f64, angle_err_deg: f64, status: CellStatus) -> Self {
        Self {
            pan_deg,
            tilt_deg,
            sigma_pixel,
            angle_err_deg,
            fv_est: None,
            fu_est: None,
            v0_est: None,
            u0_est: None,
            status,
        }
    }
}

/// The four estimated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Fv,
    Fu,
    V0,
    U0,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::Fv, Param::Fu, Param::V0, Param::U0];

    pub fn name(&self) -> &'static str {
        match self {
            Param::Fv => "f_v",
            Param::Fu => "f_u",
            Param::V0 => "v_0",
            Param::U0 => "u_0",
        }
    }

    pub fn estimate(&self, record: &EvalRecord) -> Option<f64> {
        match self {
            Param::Fv => record.fv_est,
            Param::Fu => record.fu_est,
            Param::V0 => record.v0_est,
            Param::U0 => record.u0_est,
        }
    }

    pub fn ground_truth(&self, camera: &GroundTruthCamera) -> f64 {
        match self {
            Param::Fv => camera.intrinsics.f_v,
            Param::Fu => camera.intrinsics.f_u,
            Param::V0 => camera.intrinsics.v_0,
            Param::U0 => camera.intrinsics.u_0,
        }
    }
}

/// Statistics of one parameter over the successful records.
///
/// `mse` is the mean of squared deviations from ground truth, the grid
/// studies' headline number; `bias` is `mean - ground truth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub parameter: Param,
    pub n: usize,
    pub ground_truth: f64,
    pub mean: f64,
    pub sd: f64,
    pub bias: f64,
    pub mean_abs_err: f64,
    pub mse: f64,
}

/// Computes per-parameter aggregates over records with `Ok` status.
///
/// Parameters absent from every successful record produce no aggregate.
/// The standard deviation uses the sample (n-1) normalizer and is reported
/// as 0 for a single value.
pub fn compute_aggregates(records: &[EvalRecord], camera: &GroundTruthCamera) -> Vec<Aggregate> {
    let mut aggregates = Vec::new();
    for param in Param::ALL {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.status.is_ok())
            .filter_map(|r| param.estimate(r))
            .collect();
        if values.is_empty() {
            continue;
        }
        let gt = param.ground_truth(camera);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mean_abs_err = values.iter().map(|v| (v - gt).abs()).sum::<f64>() / n as f64;
        let mse = values.iter().map(|v| (v - gt).powi(2)).sum::<f64>() / n as f64;
        aggregates.push(Aggregate {
            parameter: param,
            n,
            ground_truth: gt,
            mean,
            sd,
            bias: mean - gt,
            mean_abs_err,
            mse,
        });
    }
    aggregates
}

/// A complete experiment outcome: configuration identity, per-cell records,
/// and aggregate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment_id: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub ground_truth: GroundTruthCamera,
    pub records: Vec<EvalRecord>,
    pub aggregates: Vec<Aggregate>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(
        experiment_id: impl Into<String>,
        kind: ExperimentKind,
        seed: u64,
        ground_truth: GroundTruthCamera,
        records: Vec<EvalRecord>,
        warnings: Vec<String>,
    ) -> Self {
        let aggregates = compute_aggregates(&records, &ground_truth);
        Self {
            experiment_id: experiment_id.into(),
            kind,
            seed,
            ground_truth,
            records,
            aggregates,
            warnings,
        }
    }

    pub fn failed_cells(&self) -> usize {
        self.records.iter().filter(|r| !r.status.is_ok()).count()
    }

    pub fn aggregate(&self, param: Param) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.parameter == param)
    }

    /// Per-record CSV with a stable column order. Estimate errors are
    /// emitted alongside the estimates (signed, estimate minus truth).
    pub fn records_csv(&self) -> String {
        let mut out = String::from(
            "experiment_id,pan_deg,tilt_deg,sigma_pixel,angle_err_deg,fv_est,fu_est,v0_est,u0_est,fv_err,fu_err,v0_err,u0_err,status\n",
        );
        for r in &self.records {
            let err = |est: Option<f64>, gt: f64| est.map(|e| e - gt);
            let cells = [
                fmt_opt(Some(r.pan_deg)),
                fmt_opt(Some(r.tilt_deg)),
                fmt_opt(Some(r.sigma_pixel)),
                fmt_opt(Some(r.angle_err_deg)),
                fmt_opt(r.fv_est),
                fmt_opt(r.fu_est),
                fmt_opt(r.v0_est),
                fmt_opt(r.u0_est),
                fmt_opt(err(r.fv_est, self.ground_truth.intrinsics.f_v)),
                fmt_opt(err(r.fu_est, self.ground_truth.intrinsics.f_u)),
                fmt_opt(err(r.v0_est, self.ground_truth.intrinsics.v_0)),
                fmt_opt(err(r.u0_est, self.ground_truth.intrinsics.u_0)),
            ];
            out.push_str(&self.experiment_id);
            for cell in cells {
                out.push(',');
                out.push_str(&cell);
            }
            out.push(',');
            out.push_str(&r.status.to_string());
            out.push('\n');
        }
        out
    }

    /// Aggregate CSV: one row per parameter.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "experiment_id,parameter,n,failed_cells,ground_truth,mean,sd,bias,mean_abs_err,mse\n",
        );
        let failed = self.failed_cells();
        for a in &self.aggregates {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                self.experiment_id,
                a.parameter.name(),
                a.n,
                failed,
                a.ground_truth,
                a.mean,
                a.sd,
                a.bias,
                a.mean_abs_err,
                a.mse
            ));
        }
        out
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    match value {
        // `{}` prints the shortest string that round-trips, so parsing the
        // CSV recovers the exact stored f64.
        Some(v) => format!("{v}"),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn camera() -> GroundTruthCamera {
        GroundTruthCamera::default_simulated()
    }

    fn sample_records() -> Vec<EvalRecord> {
        vec![
            EvalRecord {
                pan_deg: -0.5,
                tilt_deg: 0.5,
                sigma_pixel: 0.0,
                angle_err_deg: 0.0,
                fv_est: Some(772.9),
                fu_est: Some(772.4),
                v0_est: Some(314.2),
                u0_est: Some(243.9),
                status: CellStatus::Ok,
            },
            EvalRecord {
                pan_deg: -1.0,
                tilt_deg: 1.0,
                sigma_pixel: 0.0,
                angle_err_deg: 0.0,
                fv_est: Some(772.1),
                fu_est: Some(772.8),
                v0_est: Some(313.8),
                u0_est: Some(244.3),
                status: CellStatus::Ok,
            },
            EvalRecord::failed(0.0, 0.0, 0.0, 0.0, CellStatus::DegenerateRotation),
        ]
    }

    #[test]
    fn aggregates_skip_failed_cells() {
        let report = ExperimentReport::new(
            "test",
            ExperimentKind::MonteCarlo,
            1,
            camera(),
            sample_records(),
            vec![],
        );
        assert_eq!(report.failed_cells(), 1);
        let fv = report.aggregate(Param::Fv).unwrap();
        assert_eq!(fv.n, 2);
        assert!((fv.mean - 772.5).abs() < 1e-12);
    }

    #[test]
    fn empty_report_csv_is_header_only() {
        let report =
            ExperimentReport::new("empty", ExperimentKind::MonteCarlo, 0, camera(), vec![], vec![]);
        let csv = report.records_csv();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("experiment_id,pan_deg"));
    }

    #[test]
    fn csv_emission_is_deterministic() {
        let report = ExperimentReport::new(
            "det",
            ExperimentKind::MonteCarlo,
            1,
            camera(),
            sample_records(),
            vec![],
        );
        assert_eq!(report.records_csv(), report.records_csv());
        assert_eq!(report.summary_csv(), report.summary_csv());
    }

    #[test]
    fn summary_csv_round_trips_exact_values() {
        let report = ExperimentReport::new(
            "rt",
            ExperimentKind::MonteCarlo,
            1,
            camera(),
            sample_records(),
            vec![],
        );
        let csv = report.summary_csv();
        for (line, aggregate) in csv.lines().skip(1).zip(&report.aggregates) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[1], aggregate.parameter.name());
            let mean: f64 = cells[5].parse().unwrap();
            let sd: f64 = cells[6].parse().unwrap();
            assert_eq!(mean, aggregate.mean);
            assert_eq!(sd, aggregate.sd);
        }
    }

    #[test]
    fn aggregates_recomputable_from_records() {
        let report = ExperimentReport::new(
            "re",
            ExperimentKind::MonteCarlo,
            1,
            camera(),
            sample_records(),
            vec![],
        );
        let recomputed = compute_aggregates(&report.records, &report.ground_truth);
        assert_eq!(report.aggregates.len(), recomputed.len());
        for (a, b) in report.aggregates.iter().zip(&recomputed) {
            assert!((a.mean - b.mean).abs() < 1e-12);
            assert!((a.sd - b.sd).abs() < 1e-12);
            assert!((a.mse - b.mse).abs() < 1e-12);
        }
    }
}
