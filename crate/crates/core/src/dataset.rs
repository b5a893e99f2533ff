//! Regression samples and tabular input.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Result, RpeError};

/// `n` covariate rows in `p` dimensions, paired with a response vector.
///
/// Immutable once constructed; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    covariates: DMatrix<f64>,
    response: DVector<f64>,
}

impl Dataset {
    pub fn new(covariates: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        let (n, p) = covariates.shape();
        if n < 2 {
            return Err(RpeError::InvalidInput(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        if p < 1 {
            return Err(RpeError::InvalidInput("need at least one covariate".into()));
        }
        if response.len() != n {
            return Err(RpeError::DimensionMismatch(format!(
                "response has {} entries but covariates have {n} rows",
                response.len()
            )));
        }
        for i in 0..n {
            for j in 0..p {
                if !covariates[(i, j)].is_finite() {
                    return Err(RpeError::NonFinite {
                        row: i + 1,
                        column: format!("x{}", j + 1),
                    });
                }
            }
            if !response[i].is_finite() {
                return Err(RpeError::NonFinite {
                    row: i + 1,
                    column: "response".into(),
                });
            }
        }
        Ok(Self {
            covariates,
            response,
        })
    }

    pub fn n(&self) -> usize {
        self.covariates.nrows()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.covariates
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    /// Rows `indices` of the covariate matrix, in the given order.
    pub fn rows(&self, indices: &[usize]) -> DMatrix<f64> {
        self.covariates.select_rows(indices)
    }

    pub fn responses(&self, indices: &[usize]) -> DVector<f64> {
        DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.response[i]))
    }

    /// The dataset with covariates replaced by `X A` for a `p × k` matrix `A`.
    pub fn project(&self, a: &DMatrix<f64>) -> Result<Dataset> {
        if a.nrows() != self.p() || a.ncols() == 0 {
            return Err(RpeError::DimensionMismatch(format!(
                "projection is {}x{}, data has p = {}",
                a.nrows(),
                a.ncols(),
                self.p()
            )));
        }
        Dataset::new(&self.covariates * a, self.response.clone())
    }

    /// Center each covariate and scale it to unit sample variance. Constant
    /// columns are only centered.
    pub fn standardized(&self) -> Dataset {
        let n = self.n() as f64;
        let mut x = self.covariates.clone();
        for mut col in x.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
            let var = col.norm_squared() / (n - 1.0);
            if var > 0.0 {
                col /= var.sqrt();
            }
        }
        Dataset {
            covariates: x,
            response: self.response.clone(),
        }
    }
}

/// Which column of a CSV file holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    /// 0-based column index.
    Index(usize),
}

impl From<&str> for ResponseColumn {
    fn from(s: &str) -> Self {
        ResponseColumn::Name(s.to_string())
    }
}

/// A parsed CSV file together with the covariate column names.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub covariate_names: Vec<String>,
    pub response_name: String,
}

/// Load a dataset from a headed CSV file.
pub fn load_csv(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<Dataset> {
    Ok(load_csv_with_names(path, response)?.dataset)
}

pub fn load_csv_with_names(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| RpeError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_csv(&bytes, response)
}

/// Parse CSV bytes. Pure function of its input.
pub fn parse_csv(bytes: &[u8], response: &ResponseColumn) -> Result<LoadedCsv> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let response_idx = match response {
        ResponseColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RpeError::MissingColumn(name.clone()))?,
        ResponseColumn::Index(i) if *i < headers.len() => *i,
        ResponseColumn::Index(i) => return Err(RpeError::MissingColumn(format!("#{}", i + 1))),
    };
    if headers.len() < 2 {
        return Err(RpeError::InvalidInput(
            "need at least one covariate column besides the response".into(),
        ));
    }

    let p = headers.len() - 1;
    let mut values: Vec<f64> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = r + 1;
        if record.len() != headers.len() {
            return Err(RpeError::InvalidInput(format!(
                "row {row} has {} fields, expected {}",
                record.len(),
                headers.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| RpeError::NonNumeric {
                row,
                column: headers[c].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(RpeError::NonFinite {
                    row,
                    column: headers[c].clone(),
                });
            }
            if c == response_idx {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = y.len();
    if n < 2 {
        return Err(RpeError::InvalidInput(format!(
            "need at least 2 data rows, got {n}"
        )));
    }
    let covariates = DMatrix::from_row_slice(n, p, &values);
    let covariate_names = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != response_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Ok(LoadedCsv {
        dataset: Dataset::new(covariates, DVector::from_vec(y))?,
        covariate_names,
        response_name: headers[response_idx].clone(),
    })
}

/// Write a dataset as CSV with header `x1..xp,y`.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut row: Vec<String> = data
            .covariates
            .row(i)
            .iter()
            .map(|v| format_real(*v))
            .collect();
        row.push(format_real(data.response[i]));
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:?}")
}

/// A random partition of `0..n` into a training set of size `n1` and the
/// held-out complement. Both index lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSplit {
    pub train: Vec<usize>,
    pub holdout: Vec<usize>,
}

/// Draw a uniformly random `n1`-subset of `0..n` without replacement.
pub fn draw_split<R: Rng + ?Sized>(n: usize, n1: usize, rng: &mut R) -> Result<SampleSplit> {
    if n1 < 1 || n1 + 1 > n {
        return Err(RpeError::Config(format!(
            "training split size must lie in [1, {}], got {n1}",
            n.saturating_sub(1)
        )));
    }
    let mut in_train = vec![false; n];
    for i in rand::seq::index::sample(rng, n, n1) {
        in_train[i] = true;
    }
    let (train, holdout): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_train[i]);
    Ok(SampleSplit { train, holdout })
}

/// The default training size `⌈2n/3⌉`.
pub fn default_train_size(n: usize) -> usize {
    (2 * n).div_ceil(3)
}
