use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Weights below this are treated as underflow.
const UNDERFLOW: f64 = 1e-300;

/// Gaussian-kernel Nadaraya–Watson smoother; keeps the training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NadarayaFit {
    pub bandwidth: f64,
    /// Row-major training covariates, `m × d`.
    points: Vec<f64>,
    responses: Vec<f64>,
    d: usize,
    mean: f64,
}

/// `K(t) = exp(−t²/2) / √(2π)`.
pub fn gaussian_kernel(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

impl NadarayaFit {
    pub fn fit(z: &DMatrix<f64>, y: &DVector<f64>, bandwidth: f64) -> Self {
        let (m, d) = z.shape();
        let mut points = Vec::with_capacity(m * d);
        for i in 0..m {
            points.extend(z.row(i).iter());
        }
        Self {
            bandwidth,
            points,
            responses: y.iter().copied().collect(),
            d,
            mean: y.mean(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        let mut largest = 0.0f64;
        for (row, y) in self.points.chunks_exact(self.d).zip(&self.responses) {
            let dist2: f64 = row.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
            let w = gaussian_kernel(dist2.sqrt() / self.bandwidth);
            largest = largest.max(w);
            num += w * y;
            den += w;
        }
        if largest < UNDERFLOW {
            self.mean
        } else {
            num / den
        }
    }
}
