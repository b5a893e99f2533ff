//! Base regression methods behind one fit/predict interface.

pub mod linear;
pub mod lstsq;
pub mod mars;
pub mod nadaraya;
pub mod quadratic;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RpeError};

pub use linear::LinearFit;
pub use mars::{MarsFit, MarsParams};
pub use nadaraya::NadarayaFit;
pub use quadratic::QuadraticFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    /// Global linear least squares.
    #[serde(rename = "lls")]
    LinearLs,
    /// Global quadratic least squares.
    #[serde(rename = "qls")]
    QuadraticLs,
    #[serde(rename = "nw")]
    NadarayaWatson,
    Mars,
}

impl RegressorKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            RegressorKind::LinearLs => "lls",
            RegressorKind::QuadraticLs => "qls",
            RegressorKind::NadarayaWatson => "nw",
            RegressorKind::Mars => "mars",
        }
    }
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for RegressorKind {
    type Err = RpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lls" | "linear" => Ok(RegressorKind::LinearLs),
            "qls" | "quadratic" => Ok(RegressorKind::QuadraticLs),
            "nw" | "nadaraya-watson" => Ok(RegressorKind::NadarayaWatson),
            "mars" => Ok(RegressorKind::Mars),
            other => Err(RpeError::Config(format!(
                "unknown regressor '{other}' (expected lls, qls, nw or mars)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    pub kind: RegressorKind,
    pub nw_bandwidth: f64,
    pub mars_max_degree: usize,
    pub mars_max_terms: usize,
    pub mars_gcv_penalty: f64,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self::new(RegressorKind::Mars)
    }
}

impl RegressorSpec {
    pub fn new(kind: RegressorKind) -> Self {
        let mars = MarsParams::default();
        Self {
            kind,
            nw_bandwidth: 0.1,
            mars_max_degree: mars.max_degree,
            mars_max_terms: mars.max_terms,
            mars_gcv_penalty: mars.gcv_penalty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nw_bandwidth > 0.0 && self.nw_bandwidth.is_finite()) {
            return Err(RpeError::Config(format!(
                "bandwidth must be positive, got {}",
                self.nw_bandwidth
            )));
        }
        if self.mars_max_degree < 1 {
            return Err(RpeError::Config(
                "spline max degree must be at least 1".into(),
            ));
        }
        if self.mars_max_terms < 2 {
            return Err(RpeError::Config(
                "spline max terms must be at least 2".into(),
            ));
        }
        if !(self.mars_gcv_penalty >= 0.0 && self.mars_gcv_penalty.is_finite()) {
            return Err(RpeError::Config(format!(
                "GCV penalty must be nonnegative, got {}",
                self.mars_gcv_penalty
            )));
        }
        Ok(())
    }

    pub fn mars_params(&self) -> MarsParams {
        MarsParams {
            max_degree: self.mars_max_degree,
            max_terms: self.mars_max_terms,
            gcv_penalty: self.mars_gcv_penalty,
        }
    }

    /// Smallest training size accepted for `d`-dimensional inputs.
    pub fn min_samples(&self, d: usize) -> usize {
        match self.kind {
            RegressorKind::LinearLs => d + 1,
            RegressorKind::QuadraticLs => quadratic::design_width(d) + 1,
            RegressorKind::NadarayaWatson | RegressorKind::Mars => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FittedRegressor {
    Linear(LinearFit),
    Quadratic(QuadraticFit),
    Nadaraya(NadarayaFit),
    Mars(MarsFit),
}

/// Fit the base regressor on `m` rows `z` with responses `y`.
pub fn fit(spec: &RegressorSpec, z: &DMatrix<f64>, y: &DVector<f64>) -> Result<FittedRegressor> {
    let (m, d) = z.shape();
    if y.len() != m {
        return Err(RpeError::DimensionMismatch(format!(
            "{m} rows but {} responses",
            y.len()
        )));
    }
    let required = spec.min_samples(d);
    if m < required {
        return Err(RpeError::SampleSize {
            kind: spec.kind.short_name(),
            required,
            got: m,
        });
    }
    if z.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(RpeError::InvalidInput("non-finite regression input".into()));
    }
    Ok(match spec.kind {
        RegressorKind::LinearLs => FittedRegressor::Linear(LinearFit::fit(z, y)?),
        RegressorKind::QuadraticLs => FittedRegressor::Quadratic(QuadraticFit::fit(z, y)?),
        RegressorKind::NadarayaWatson => {
            FittedRegressor::Nadaraya(NadarayaFit::fit(z, y, spec.nw_bandwidth))
        }
        RegressorKind::Mars => FittedRegressor::Mars(mars::fit(&spec.mars_params(), z, y)?),
    })
}

impl FittedRegressor {
    pub fn kind(&self) -> RegressorKind {
        match self {
            FittedRegressor::Linear(_) => RegressorKind::LinearLs,
            FittedRegressor::Quadratic(_) => RegressorKind::QuadraticLs,
            FittedRegressor::Nadaraya(_) => RegressorKind::NadarayaWatson,
            FittedRegressor::Mars(_) => RegressorKind::Mars,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            FittedRegressor::Linear(f) => f.slope.len(),
            FittedRegressor::Quadratic(f) => f.d(),
            FittedRegressor::Nadaraya(f) => f.d(),
            FittedRegressor::Mars(f) => f.d,
        }
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        match self {
            FittedRegressor::Linear(f) => f.predict(z),
            FittedRegressor::Quadratic(f) => f.predict(z),
            FittedRegressor::Nadaraya(f) => f.predict(z),
            FittedRegressor::Mars(f) => f.predict(z),
        }
    }

    /// Predictions for each row of `z`.
    pub fn predict_rows(&self, z: &DMatrix<f64>) -> DVector<f64> {
        let mut row = vec![0.0; z.ncols()];
        DVector::from_fn(z.nrows(), |i, _| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = z[(i, j)];
            }
            self.predict(&row)
        })
    }
}

/// Sum of squared prediction errors over the held-out rows.
pub fn holdout_score(model: &FittedRegressor, z: &DMatrix<f64>, y: &DVector<f64>) -> Result<f64> {
    if z.ncols() != model.d() || z.nrows() != y.len() {
        return Err(RpeError::DimensionMismatch(format!(
            "holdout is {}x{} with {} responses, model expects {} columns",
            z.nrows(),
            z.ncols(),
            y.len(),
            model.d()
        )));
    }
    if z.nrows() == 0 {
        return Err(RpeError::InvalidInput("empty holdout set".into()));
    }
    let pred = model.predict_rows(z);
    Ok(y.iter()
        .zip(pred.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}
