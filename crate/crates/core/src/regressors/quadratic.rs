use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lstsq::min_norm_lstsq;
use crate::error::Result;

/// `ĝ(z) = a + bᵀz + zᵀCz` with `C` symmetric.
///
/// `C` is kept as its upper triangle in row order: `(0,0), (0,1), …, (0,d−1),
/// (1,1), …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Number of columns in the expanded design: `1 + d + d(d+1)/2`.
pub fn design_width(d: usize) -> usize {
    1 + d * (d + 3) / 2
}

/// Expanded design with columns `1, z_j, z_j z_k (j ≤ k)`.
pub fn design(z: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, d) = z.shape();
    let mut x = DMatrix::zeros(m, design_width(d));
    for i in 0..m {
        x[(i, 0)] = 1.0;
        let mut col = 1 + d;
        for j in 0..d {
            let zj = z[(i, j)];
            x[(i, 1 + j)] = zj;
            for k in j..d {
                x[(i, col)] = zj * z[(i, k)];
                col += 1;
            }
        }
    }
    x
}

impl QuadraticFit {
    pub fn fit(z: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        let d = z.ncols();
        let coef = min_norm_lstsq(&design(z), y)?;
        let mut upper = Vec::with_capacity(d * (d + 1) / 2);
        let mut col = 1 + d;
        for j in 0..d {
            for k in j..d {
                // an off-diagonal design coefficient carries both C_jk and C_kj
                upper.push(if j == k { coef[col] } else { 0.5 * coef[col] });
                col += 1;
            }
        }
        Ok(Self {
            constant: coef[0],
            linear: coef.rows(1, d).iter().copied().collect(),
            upper,
        })
    }

    pub fn d(&self) -> usize {
        self.linear.len()
    }

    /// The symmetric `d × d` matrix `C`.
    pub fn quadratic_matrix(&self) -> DMatrix<f64> {
        let d = self.d();
        let mut c = DMatrix::zeros(d, d);
        let mut idx = 0;
        for j in 0..d {
            for k in j..d {
                c[(j, k)] = self.upper[idx];
                c[(k, j)] = self.upper[idx];
                idx += 1;
            }
        }
        c
    }

    pub fn predict(&self, z: &[f64]) -> f64 {
        let d = self.d();
        let mut acc = self.constant;
        let mut idx = 0;
        for j in 0..d {
            acc += self.linear[j] * z[j];
            for k in j..d {
                let w = if j == k { 1.0 } else { 2.0 };
                acc += w * self.upper[idx] * z[j] * z[k];
                idx += 1;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn interpolates_quadratic_in_one_dimension() {
        let z = DMatrix::from_fn(10, 1, |i, _| i as f64 * 0.3 - 1.2);
        let y = DVector::from_fn(10, |i, _| {
            let t = z[(i, 0)];
            1.0 + 2.0 * t + 3.0 * t * t
        });
        let fit = QuadraticFit::fit(&z, &y).unwrap();
        assert!((fit.constant - 1.0).abs() < 1e-8);
        assert!((fit.linear[0] - 2.0).abs() < 1e-8);
        assert!((fit.upper[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn matches_normal_equations_in_two_dimensions() {
        let mut s = rng::seeded(9);
        let z: DMatrix<f64> = DMatrix::from_fn(20, 2, |_, _| s.sample(StandardNormal));
        let y = DVector::from_fn(20, |_, _| s.sample(StandardNormal));
        // explicit design (1, z1, z2, z1², z2², z1z2), solved independently
        let x = DMatrix::from_fn(20, 6, |i, j| {
            let (a, b) = (z[(i, 0)], z[(i, 1)]);
            [1.0, a, b, a * a, b * b, a * b][j]
        });
        let oracle = (x.transpose() * &x)
            .cholesky()
            .unwrap()
            .solve(&(x.transpose() * &y));
        let fit = QuadraticFit::fit(&z, &y).unwrap();
        assert!((fit.constant - oracle[0]).abs() < 1e-8);
        assert!((fit.linear[0] - oracle[1]).abs() < 1e-8);
        assert!((fit.linear[1] - oracle[2]).abs() < 1e-8);
        assert!((fit.upper[0] - oracle[3]).abs() < 1e-8);
        assert!((fit.upper[2] - oracle[4]).abs() < 1e-8);
        assert!((fit.upper[1] - 0.5 * oracle[5]).abs() < 1e-8);
        let c = fit.quadratic_matrix();
        assert_eq!(c, c.transpose());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn recovers_any_noiseless_quadratic(
            seed in any::<u64>(),
            d in 1usize..4,
            a in -5.0f64..5.0,
            b in proptest::collection::vec(-5.0f64..5.0, 3),
            c in proptest::collection::vec(-5.0f64..5.0, 6),
        ) {
            let mut s = rng::seeded(seed);
            let m = design_width(d) + 10;
            let z: DMatrix<f64> = DMatrix::from_fn(m, d, |_, _| s.sample(StandardNormal));
            let truth = QuadraticFit {
                constant: a,
                linear: b[..d].to_vec(),
                upper: c[..d * (d + 1) / 2].to_vec(),
            };
            let y = DVector::from_fn(m, |i, _| {
                let row: Vec<f64> = z.row(i).iter().copied().collect();
                truth.predict(&row)
            });
            let fit = QuadraticFit::fit(&z, &y).unwrap();
            prop_assert!((fit.constant - a).abs() < 1e-6);
            for (u, v) in fit.linear.iter().zip(&truth.linear) {
                prop_assert!((u - v).abs() < 1e-6);
            }
            for (u, v) in fit.upper.iter().zip(&truth.upper) {
                prop_assert!((u - v).abs() < 1e-6);
            }
        }
    }
}
