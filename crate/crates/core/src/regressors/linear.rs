use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lstsq::min_norm_lstsq;
use crate::error::Result;

/// `ĝ(z) = α + βᵀz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: Vec<f64>,
}

impl LinearFit {
    pub fn fit(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let (m, d) = z.shape();
        let design = DMatrix::from_fn(m, d + 1, |i, j| if j == 0 { 1.0 } else { z[(i, j - 1)] });
        let coef = min_norm_lstsq(&design, y)?;
        Ok(Self {
            intercept: coef[0],
            slope: coef.iter().skip(1).copied().collect(),
        })
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        self.intercept + self.slope.iter().zip(z).map(|(b, x)| b * x).sum::<f64>()
    }
}
