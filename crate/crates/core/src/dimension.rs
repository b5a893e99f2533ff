//! Choosing the number of directions by comparing the ensemble's eigenvalues
//! with those of aggregates built from unselected projections.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{write_json, RpeConfig};
use crate::error::{Result, RpeError};
use crate::projections::{sample_projection, sorted_eigenvalues, DistKind, ProjectionDistribution};
use crate::rng::{self, purpose};

pub const DEFAULT_RESAMPLES: usize = 10_000;

/// Tolerance on `ΣD = d` for an observed eigenvalue vector.
const TRACE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConfig {
    pub proj_dim: usize,
    pub dist: DistKind,
    pub groups: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl DimensionConfig {
    /// Match the ensemble settings that produced the observed eigenvalues.
    pub fn matching(cfg: &RpeConfig, resamples: usize, seed: u64) -> Self {
        Self {
            proj_dim: cfg.proj_dim,
            dist: cfg.dist,
            groups: cfg.groups,
            resamples,
            seed,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.resamples < 1 {
            return Err(RpeError::Config("resample count must be at least 1".into()));
        }
        if self.groups < 1 {
            return Err(RpeError::Config("group count must be at least 1".into()));
        }
        self.distribution(p).validate()
    }

    pub fn distribution(&self, p: usize) -> ProjectionDistribution {
        ProjectionDistribution {
            kind: self.dist,
            p,
            d: self.proj_dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub d0_hat: usize,
    /// `T_j`: fraction of null resamples whose `j`-th eigenvalue is at most
    /// the observed one.
    pub exceedance: Vec<f64>,
    pub null_medians: Vec<f64>,
    pub observed: Vec<f64>,
}

impl DimensionReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(self, path)
    }

    /// Two columns: observed eigenvalue and null median.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["observed", "null_median"])?;
        for (o, m) in self.observed.iter().zip(&self.null_medians) {
            w.write_record([
                crate::dataset::format_real(*o),
                crate::dataset::format_real(*m),
            ])?;
        }
        w.flush().map_err(|source| RpeError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sorted eigenvalues of `(1/L) Σ PPᵀ` over `groups` fresh projections.
pub fn null_eigen_sample<R: Rng + ?Sized>(
    dist: &ProjectionDistribution,
    groups: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let (p, d) = (dist.p, dist.d);
    let mut stacked = DMatrix::zeros(p, d * groups);
    for l in 0..groups {
        let proj = sample_projection(dist, rng);
        stacked.columns_mut(l * d, d).copy_from(proj.entries());
    }
    let mut pi = &stacked * stacked.transpose();
    pi /= groups as f64;
    sorted_eigenvalues(&pi)
}

/// `R` null draws, one row per resample.
pub fn null_samples(p: usize, cfg: &DimensionConfig) -> Result<Vec<Vec<f64>>> {
    cfg.validate(p)?;
    let dist = cfg.distribution(p);
    (0..cfg.resamples)
        .into_par_iter()
        .map(|r| {
            let mut s = rng::stream(cfg.seed, purpose::NULL_RESAMPLE, r as u64, 0);
            null_eigen_sample(&dist, cfg.groups, &mut s)
        })
        .collect()
}

/// `T_j = #{r : D⁽ʳ⁾_j ≤ D_j} / R`.
pub fn exceedance(observed: &[f64], null: &[Vec<f64>]) -> Vec<f64> {
    let r = null.len() as f64;
    (0..observed.len())
        .map(|j| null.iter().filter(|s| s[j] <= observed[j]).count() as f64 / r)
        .collect()
}

/// Length of the longest prefix with every `T_j > 1/2`.
pub fn select_dimension(exceedance: &[f64]) -> usize {
    exceedance.iter().take_while(|&&t| t > 0.5).count()
}

fn medians(null: &[Vec<f64>], p: usize) -> Vec<f64> {
    let mut column = Vec::with_capacity(null.len());
    (0..p)
        .map(|j| {
            column.clear();
            column.extend(null.iter().map(|s| s[j]));
            column.sort_by(f64::total_cmp);
            let k = column.len();
            if k % 2 == 1 {
                column[k / 2]
            } else {
                0.5 * (column[k / 2 - 1] + column[k / 2])
            }
        })
        .collect()
}

fn check_observed(observed: &[f64], d: usize) -> Result<()> {
    if observed.is_empty() {
        return Err(RpeError::InvalidInput("no eigenvalues given".into()));
    }
    if observed.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(RpeError::InvalidInput(
            "eigenvalues must be finite and nonnegative".into(),
        ));
    }
    if observed.windows(2).any(|w| w[1] > w[0]) {
        return Err(RpeError::InvalidInput(
            "eigenvalues must be nonincreasing".into(),
        ));
    }
    let total: f64 = observed.iter().sum();
    if (total - d as f64).abs() > TRACE_TOL {
        return Err(RpeError::InvalidInput(format!(
            "eigenvalues sum to {total}, expected the projection dimension {d}"
        )));
    }
    Ok(())
}

/// Estimate the number of informative directions from observed eigenvalues.
pub fn estimate_dimension(observed: &[f64], cfg: &DimensionConfig) -> Result<DimensionReport> {
    let p = observed.len();
    if cfg.proj_dim > p {
        return Err(RpeError::DimensionMismatch(format!(
            "{p} observed eigenvalues but projection dimension {}",
            cfg.proj_dim
        )));
    }
    check_observed(observed, cfg.proj_dim)?;
    let null = null_samples(p, cfg)?;
    Ok(report_against(observed, &null))
}

/// Build a report from a precomputed null sample.
pub fn report_against(observed: &[f64], null: &[Vec<f64>]) -> DimensionReport {
    let t = exceedance(observed, null);
    DimensionReport {
        d0_hat: select_dimension(&t),
        null_medians: medians(null, observed.len()),
        exceedance: t,
        observed: observed.to_vec(),
    }
}
