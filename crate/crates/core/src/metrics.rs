//! Distances between an estimated and a reference subspace.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RpeError};

/// Allowed deviation of `AᵀA` from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubspaceReport {
    /// Only defined when both bases have the same number of columns.
    pub sin_theta: Option<f64>,
    pub d_fp: f64,
    pub d_fn: f64,
}

fn check_orthonormal(a: &DMatrix<f64>, name: &str) -> Result<()> {
    let k = a.ncols();
    if k == 0 {
        return Ok(());
    }
    let gram = a.transpose() * a;
    let dev = (gram - DMatrix::<f64>::identity(k, k)).amax();
    if dev > ORTHONORMAL_TOL {
        return Err(RpeError::InvalidInput(format!(
            "{name} does not have orthonormal columns (deviation {dev:.2e})"
        )));
    }
    Ok(())
}

fn check_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != b.nrows() {
        return Err(RpeError::DimensionMismatch(format!(
            "bases live in dimensions {} and {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(())
}

/// `‖(I − BBᵀ)A‖_F`.
fn residual_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let resid = a - b * (b.transpose() * a);
    resid.norm()
}

/// `√(½ ‖ÂÂᵀ − AAᵀ‖²_F)` for two bases of equal size.
pub fn sin_theta(estimate: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<f64> {
    check_rows(estimate, reference)?;
    if estimate.ncols() != reference.ncols() {
        return Err(RpeError::DimensionMismatch(format!(
            "sin-theta needs equal column counts, got {} and {}",
            estimate.ncols(),
            reference.ncols()
        )));
    }
    check_orthonormal(estimate, "estimate")?;
    check_orthonormal(reference, "reference")?;
    let diff = estimate * estimate.transpose() - reference * reference.transpose();
    Ok((0.5 * diff.norm_squared()).sqrt())
}

/// False positives: `‖(I − A₀A₀ᵀ)Â‖_F`.
pub fn d_fp(estimate: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<f64> {
    check_rows(estimate, reference)?;
    check_orthonormal(estimate, "estimate")?;
    check_orthonormal(reference, "reference")?;
    Ok(residual_norm(estimate, reference))
}

/// False negatives: `‖(I − ÂÂᵀ)A₀‖_F`. An empty estimate leaves every
/// reference direction unexplained.
pub fn d_fn(estimate: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<f64> {
    check_rows(estimate, reference)?;
    check_orthonormal(estimate, "estimate")?;
    check_orthonormal(reference, "reference")?;
    Ok(residual_norm(reference, estimate))
}

pub fn subspace_report(
    estimate: &DMatrix<f64>,
    reference: &DMatrix<f64>,
) -> Result<SubspaceReport> {
    let sin_theta = if estimate.ncols() == reference.ncols() {
        Some(sin_theta(estimate, reference)?)
    } else {
        None
    };
    Ok(SubspaceReport {
        sin_theta,
        d_fp: d_fp(estimate, reference)?,
        d_fn: d_fn(estimate, reference)?,
    })
}
