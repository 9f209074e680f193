//! Shared helpers for the oracle and acceptance suites.

#![allow(dead_code)]

use ptcal::estimators::{pp_coefficients, pp_residual, Correspondence, CorrespondenceSet, PpCoefficients};
use ptcal::geometry::{ImageGeometry, RotationMatrix};

/// The full quadratic principal-point system for one correspondence set,
/// evaluated without linearization. Used as the brute-force oracle.
pub struct PpSystem {
    coefficients: Vec<PpCoefficients>,
    points: Vec<Correspondence>,
    image: ImageGeometry,
}

impl PpSystem {
    pub fn build(pair: &CorrespondenceSet, f_v: f64, f_u: f64) -> Self {
        let rotation = RotationMatrix::compose(pair.rotation());
        let elems = rotation.transposed_elements();
        let image = *pair.image();
        let coefficients = pair
            .points()
            .iter()
            .map(|p| pp_coefficients(p, &elems, f_v, f_u, &image))
            .collect();
        Self {
            coefficients,
            points: pair.points().to_vec(),
            image,
        }
    }

    /// Sum of squared full-quadratic residuals at a candidate shift.
    pub fn cost(&self, delta_v: f64, delta_u: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| {
                let (res_v, res_u) = pp_residual(p, &self.image, c, delta_v, delta_u);
                res_v * res_v + res_u * res_u
            })
            .sum()
    }

    /// Dense grid minimizer of the full nonlinear cost over +/-30 px around
    /// the image center.
    pub fn brute_force_minimum(&self, step: f64) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        let mut best_cost = f64::INFINITY;
        let steps = (60.0 / step) as i64;
        for i in 0..=steps {
            let delta_v = -30.0 + i as f64 * step;
            for j in 0..=steps {
                let delta_u = -30.0 + j as f64 * step;
                let cost = self.cost(delta_v, delta_u);
                if cost < best_cost {
                    best_cost = cost;
                    best = (delta_v, delta_u);
                }
            }
        }
        best
    }
}
