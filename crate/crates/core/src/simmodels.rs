//! Synthetic regression models with known central mean subspaces.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, RpeError};
use crate::projections::write_matrix_csv;
use crate::rng::{self, purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    #[serde(rename = "1a")]
    M1a,
    #[serde(rename = "1b")]
    M1b,
    #[serde(rename = "1c")]
    M1c,
    #[serde(rename = "2")]
    M2,
    #[serde(rename = "3")]
    M3,
    #[serde(rename = "4")]
    M4,
    #[serde(rename = "5")]
    M5,
    #[serde(rename = "6")]
    M6,
    #[serde(rename = "7")]
    M7,
    #[serde(rename = "8")]
    M8,
    #[serde(rename = "9")]
    M9,
}

impl ModelId {
    pub const ALL: [ModelId; 11] = [
        ModelId::M1a,
        ModelId::M1b,
        ModelId::M1c,
        ModelId::M2,
        ModelId::M3,
        ModelId::M4,
        ModelId::M5,
        ModelId::M6,
        ModelId::M7,
        ModelId::M8,
        ModelId::M9,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ModelId::M1a => "1a",
            ModelId::M1b => "1b",
            ModelId::M1c => "1c",
            ModelId::M2 => "2",
            ModelId::M3 => "3",
            ModelId::M4 => "4",
            ModelId::M5 => "5",
            ModelId::M6 => "6",
            ModelId::M7 => "7",
            ModelId::M8 => "8",
            ModelId::M9 => "9",
        }
    }

    /// Number of active coordinates in the single-index family, if any.
    pub fn sparsity(self) -> Option<usize> {
        match self {
            ModelId::M1a => Some(2),
            ModelId::M1b => Some(10),
            ModelId::M1c => Some(20),
            _ => None,
        }
    }

    /// Smallest ambient dimension the model can be generated in.
    pub fn min_p(self) -> usize {
        match self {
            ModelId::M1a | ModelId::M1b | ModelId::M1c => self.sparsity().unwrap(),
            ModelId::M2 | ModelId::M4 | ModelId::M5 | ModelId::M6 | ModelId::M7 => 3,
            ModelId::M3 => 7,
            ModelId::M8 | ModelId::M9 => 2,
        }
    }

    /// Dimension of the true subspace.
    pub fn true_dim(self) -> usize {
        match self {
            ModelId::M1a | ModelId::M1b | ModelId::M1c | ModelId::M2 | ModelId::M4 => 1,
            ModelId::M6 => 3,
            _ => 2,
        }
    }

    pub fn noise_variance(self) -> f64 {
        if self == ModelId::M4 {
            0.2
        } else {
            0.25
        }
    }

    /// `E(Y | X = x)` for a full covariate row.
    pub fn mean_function(self, x: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match self {
            ModelId::M1a | ModelId::M1b | ModelId::M1c => {
                let q = self.sparsity().unwrap();
                let index = x[..q].iter().sum::<f64>() / (q as f64).sqrt();
                2.0 * index * index
            }
            ModelId::M2 => 2.0 * (2.0 * PI * x[2]).sin(),
            ModelId::M3 => x[5] / (0.5 + (x[6] + 1.5).powi(2)),
            ModelId::M4 => ((x[0] - x[1] + x[2]) / 3.0).exp(),
            ModelId::M5 => {
                let s = x[0] + x[1] + x[2];
                (x[0] + x[1] + 5.0 * (-2.0 * s * s).exp()) / 2.0
            }
            ModelId::M6 => 5.0 * x[0] * x[1] * x[2],
            ModelId::M7 => 4.0 * (x[0] - x[1] + x[2]) * (PI / 2.0 * (x[0] + x[1])).sin(),
            ModelId::M8 => x[0] * (x[0] + x[1] + 1.0),
            ModelId::M9 => 10.0 * (6.0 * x[0]).cos() + (x[1] + 1.0).exp(),
        }
    }

    /// Orthonormal basis of the true subspace in `R^p`.
    pub fn true_basis(self, p: usize) -> DMatrix<f64> {
        let e = |j: usize| {
            let mut v = DVector::zeros(p);
            v[j] = 1.0;
            v
        };
        let cols: Vec<DVector<f64>> = match self {
            ModelId::M1a | ModelId::M1b | ModelId::M1c => {
                let q = self.sparsity().unwrap();
                let w = 1.0 / (q as f64).sqrt();
                vec![DVector::from_fn(p, |i, _| if i < q { w } else { 0.0 })]
            }
            ModelId::M2 => vec![e(2)],
            ModelId::M3 => vec![e(5), e(6)],
            ModelId::M4 => {
                let w = 1.0 / 3f64.sqrt();
                vec![(e(0) - e(1) + e(2)) * w]
            }
            // span{e1 + e2, e1 + e2 + e3} = span{(e1 + e2)/√2, e3}
            ModelId::M5 => vec![(e(0) + e(1)) * std::f64::consts::FRAC_1_SQRT_2, e(2)],
            ModelId::M6 => vec![e(0), e(1), e(2)],
            // the two spanning directions are already orthogonal
            ModelId::M7 => vec![
                (e(0) - e(1) + e(2)) * (1.0 / 3f64.sqrt()),
                (e(0) + e(1)) * std::f64::consts::FRAC_1_SQRT_2,
            ],
            ModelId::M8 | ModelId::M9 => vec![e(0), e(1)],
        };
        DMatrix::from_columns(&cols)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelId {
    type Err = RpeError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("model").unwrap_or(&t).trim();
        ModelId::ALL
            .into_iter()
            .find(|m| m.label() == t)
            .ok_or_else(|| RpeError::Config(format!("unknown model '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimModelSpec {
    pub model: ModelId,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
}

impl SimModelSpec {
    pub fn new(model: ModelId, p: usize, n: usize, seed: u64) -> Self {
        Self { model, p, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < self.model.min_p() {
            return Err(RpeError::Config(format!(
                "model {} needs p >= {}, got {}",
                self.model,
                self.model.min_p(),
                self.p
            )));
        }
        if self.n == 0 {
            return Err(RpeError::Config("sample size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// `p × d0` with orthonormal columns.
    pub a0: DMatrix<f64>,
    pub d0: usize,
}

#[derive(Serialize)]
struct TruthSidecar<'a> {
    model: ModelId,
    p: usize,
    n: usize,
    seed: u64,
    d0: usize,
    noise_variance: f64,
    /// Columns of the basis.
    a0: Vec<&'a [f64]>,
}

impl GroundTruth {
    pub fn for_model(model: ModelId, p: usize) -> Self {
        Self {
            a0: model.true_basis(p),
            d0: model.true_dim(),
        }
    }

    /// Writes the basis (columns `A1..A{d0}`) to `dir/truth_A0.csv` and
    /// metadata to `dir/truth.json`.
    pub fn write(&self, spec: &SimModelSpec, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        write_matrix_csv(&self.a0, "A", dir.join("truth_A0.csv"))?;
        let sidecar = TruthSidecar {
            model: spec.model,
            p: spec.p,
            n: spec.n,
            seed: spec.seed,
            d0: self.d0,
            noise_variance: spec.model.noise_variance(),
            a0: (0..self.d0)
                .map(|j| &self.a0.as_slice()[j * spec.p..(j + 1) * spec.p])
                .collect(),
        };
        crate::ensemble::write_json(&sidecar, dir.join("truth.json"))
    }
}

/// Draw `n` observations. Covariates are standard normal, except for
/// Model 2 where they are uniform on `[-1, 1]`.
pub fn generate(spec: &SimModelSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let SimModelSpec { model, p, n, seed } = *spec;
    let mut s = rng::stream(seed, purpose::DATA, 0, 0);
    let mut x = DMatrix::zeros(n, p);
    let uniform = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = if model == ModelId::M2 {
                uniform.sample(&mut s)
            } else {
                s.sample(StandardNormal)
            };
        }
    }
    let sd = model.noise_variance().sqrt();
    let mut row = vec![0.0; p];
    let y = DVector::from_fn(n, |i, _| {
        for (j, r) in row.iter_mut().enumerate() {
            *r = x[(i, j)];
        }
        let e: f64 = s.sample(StandardNormal);
        model.mean_function(&row) + sd * e
    });
    Ok((Dataset::new(x, y)?, GroundTruth::for_model(model, p)))
}
