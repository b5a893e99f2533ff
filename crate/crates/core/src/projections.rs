//! Random projection sampling and aggregation of selected projections.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RpeError};

/// Distribution of a single unit-norm column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// `Z / ‖Z‖` with `Z` standard normal.
    Gaussian,
    /// `W / ‖W‖` with `W` iid standard Cauchy.
    Cauchy,
}

/// Distribution over whole `p × d` projection matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistKind {
    Gaussian,
    Cauchy,
    /// With probability `gaussian_weight` the whole matrix has Gaussian
    /// columns, otherwise Cauchy columns.
    Mixture {
        gaussian_weight: f64,
    },
}

impl DistKind {
    pub const DEFAULT_MIXTURE: DistKind = DistKind::Mixture {
        gaussian_weight: 0.5,
    };
}

impl Default for DistKind {
    fn default() -> Self {
        DistKind::DEFAULT_MIXTURE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDistribution {
    pub kind: DistKind,
    pub p: usize,
    pub d: usize,
}

impl ProjectionDistribution {
    pub fn new(kind: DistKind, p: usize, d: usize) -> Result<Self> {
        let dist = Self { kind, p, d };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 || self.d > self.p {
            return Err(RpeError::Config(format!(
                "projection dimension d = {} must lie in [1, p = {}]",
                self.d, self.p
            )));
        }
        if let DistKind::Mixture { gaussian_weight } = self.kind {
            if !(0.0..=1.0).contains(&gaussian_weight) {
                return Err(RpeError::Config(format!(
                    "mixture weight {gaussian_weight} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// A `p × d` matrix with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    entries: DMatrix<f64>,
    source: ColumnKind,
}

impl ProjectionMatrix {
    /// Wrap a matrix, normalising nothing: every column must already have
    /// unit norm (within 1e-10).
    pub fn from_matrix(entries: DMatrix<f64>, source: ColumnKind) -> Result<Self> {
        if entries.ncols() == 0 || entries.nrows() == 0 {
            return Err(RpeError::InvalidInput("empty projection matrix".into()));
        }
        for (j, col) in entries.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-10 {
                return Err(RpeError::InvalidInput(format!(
                    "column {} has norm {}, expected 1",
                    j + 1,
                    col.norm()
                )));
            }
        }
        Ok(Self { entries, source })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn source(&self) -> ColumnKind {
        self.source
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }
}

/// Draw one unit vector of length `p`.
pub fn sample_column<R: Rng + ?Sized>(kind: ColumnKind, p: usize, rng: &mut R) -> DVector<f64> {
    let mut v = DVector::zeros(p);
    fill_unit_column(kind, v.as_mut_slice(), rng);
    v
}

fn fill_unit_column<R: Rng + ?Sized>(kind: ColumnKind, out: &mut [f64], rng: &mut R) {
    loop {
        for x in out.iter_mut() {
            *x = match kind {
                ColumnKind::Gaussian => rng.sample(StandardNormal),
                ColumnKind::Cauchy => (PI * (rng.random::<f64>() - 0.5)).tan(),
            };
        }
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        // an all-zero draw has probability zero; redraw
        if norm > 0.0 && norm.is_finite() {
            out.iter_mut().for_each(|x| *x /= norm);
            return;
        }
    }
}

/// Draw a projection matrix with `d` independent columns.
pub fn sample_projection<R: Rng + ?Sized>(
    dist: &ProjectionDistribution,
    rng: &mut R,
) -> ProjectionMatrix {
    let kind = match dist.kind {
        DistKind::Gaussian => ColumnKind::Gaussian,
        DistKind::Cauchy => ColumnKind::Cauchy,
        DistKind::Mixture { gaussian_weight } => {
            if rng.random::<f64>() < gaussian_weight {
                ColumnKind::Gaussian
            } else {
                ColumnKind::Cauchy
            }
        }
    };
    let mut entries = DMatrix::zeros(dist.p, dist.d);
    for j in 0..dist.d {
        fill_unit_column(kind, entries.column_mut(j).as_mut_slice(), rng);
    }
    ProjectionMatrix {
        entries,
        source: kind,
    }
}

/// Ordered eigendecomposition of an aggregated projection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    /// Orthonormal `p × p` matrix; column `j` pairs with `weights[j]`.
    pub directions: DMatrix<f64>,
    /// Nonincreasing, nonnegative; sums to `d`.
    pub weights: DVector<f64>,
    /// Projection dimension of the aggregated matrices.
    pub d: usize,
}

impl EnsembleOutput {
    pub fn p(&self) -> usize {
        self.directions.nrows()
    }

    /// `U diag(D) Uᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.directions * DMatrix::from_diagonal(&self.weights);
        scaled * self.directions.transpose()
    }

    /// Write `U` with header `U1..Up`.
    pub fn write_directions_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_matrix_csv(&self.directions, "U", path)
    }

    /// Write `D` as a single column with header `D`.
    pub fn write_weights_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["D"])?;
        for v in self.weights.iter() {
            w.write_record([crate::dataset::format_real(*v)])?;
        }
        w.flush().map_err(|source| RpeError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })?;
        Ok(())
    }
}

/// Write a matrix with header `{prefix}1..{prefix}k`.
pub fn write_matrix_csv(m: &DMatrix<f64>, prefix: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    w.write_record(&header)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| crate::dataset::format_real(*v)))?;
    }
    w.flush().map_err(|source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Read a headed numeric CSV into a matrix.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => RpeError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => RpeError::InvalidInput(format!("{other:?}")),
        })?;
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        for (j, cell) in rec.iter().enumerate() {
            values.push(cell.parse::<f64>().map_err(|_| RpeError::NonNumeric {
                row: i + 1,
                column: headers.get(j).cloned().unwrap_or_default(),
                value: cell.to_string(),
            })?);
        }
        rows += 1;
    }
    if rows == 0 || values.len() != rows * headers.len() {
        return Err(RpeError::InvalidInput(format!(
            "{} is empty or ragged",
            path.display()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, headers.len(), &values))
}

/// `(1/L) Σ P Pᵀ` over the given projections.
pub fn aggregate(selected: &[ProjectionMatrix]) -> Result<DMatrix<f64>> {
    let first = selected
        .first()
        .ok_or_else(|| RpeError::InvalidInput("no projections to aggregate".into()))?;
    let (p, d) = first.entries.shape();
    let mut stacked = DMatrix::zeros(p, d * selected.len());
    for (l, proj) in selected.iter().enumerate() {
        if proj.entries.shape() != (p, d) {
            return Err(RpeError::DimensionMismatch(format!(
                "projection {} is {}x{}, expected {p}x{d}",
                l + 1,
                proj.p(),
                proj.d()
            )));
        }
        stacked.columns_mut(l * d, d).copy_from(&proj.entries);
    }
    let mut pi = &stacked * stacked.transpose();
    pi /= selected.len() as f64;
    symmetrize(&mut pi);
    Ok(pi)
}

/// Aggregate the selected projections and decompose the result.
pub fn aggregate_and_decompose(selected: &[ProjectionMatrix]) -> Result<EnsembleOutput> {
    let pi = aggregate(selected)?;
    let (directions, weights) = decompose_symmetric(&pi)?;
    Ok(EnsembleOutput {
        directions,
        weights,
        d: selected[0].d(),
    })
}

/// Eigenvalues tolerated below zero before clamping turns into an error.
const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Eigendecomposition of a symmetric PSD matrix with eigenvalues sorted in
/// decreasing order and each eigenvector's largest-magnitude entry positive.
pub fn decompose_symmetric(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let eig = SymmetricEigen::new(m.clone());
    let p = m.nrows();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut directions = DMatrix::zeros(p, p);
    let mut weights = DVector::zeros(p);
    for (k, &src) in order.iter().enumerate() {
        weights[k] = clamp_eigenvalue(eig.eigenvalues[src])?;
        let mut v = eig.eigenvectors.column(src).into_owned();
        let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let pivot = v
            .iter()
            .position(|x| x.abs() >= max_abs - 1e-12)
            .unwrap_or(0);
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        directions.set_column(k, &v);
    }
    Ok((directions, weights))
}

/// Sorted (decreasing), clamped eigenvalues only.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals.into_iter().map(clamp_eigenvalue).collect()
}

fn clamp_eigenvalue(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -NEGATIVE_EIGEN_TOL {
        Ok(0.0)
    } else {
        Err(RpeError::Numerical(format!(
            "aggregated matrix has eigenvalue {v}, expected positive semidefinite"
        )))
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let p = m.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
