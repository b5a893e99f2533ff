//! Minimum-norm least squares.

use nalgebra::{DMatrix, DVector, QR, SVD};

use crate::error::{Result, RpeError};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Minimum-norm solution of `min ‖Xβ − y‖₂`.
///
/// Tall systems are first reduced with a Householder QR so the SVD only
/// touches the small triangular factor.
pub fn min_norm_lstsq(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, k) = x.shape();
    if y.len() != m {
        return Err(RpeError::DimensionMismatch(format!(
            "design has {m} rows, response has {}",
            y.len()
        )));
    }
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    if m >= k {
        let qr = QR::new(x.clone());
        let mut qty = y.clone();
        qr.q_tr_mul(&mut qty);
        let r = qr.r();
        solve_svd(r, qty.rows(0, k).into_owned())
    } else {
        solve_svd(x.clone(), y.clone())
    }
}

fn solve_svd(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    let svd = SVD::new(a, true, true);
    let smax = svd.singular_values.max();
    if !smax.is_finite() {
        return Err(RpeError::Numerical("non-finite singular value".into()));
    }
    if smax == 0.0 {
        return Ok(DVector::zeros(svd.v_t.as_ref().map_or(0, |v| v.ncols())));
    }
    svd.solve(&b, RANK_TOL * smax)
        .map_err(|e| RpeError::Numerical(e.to_string()))
}
