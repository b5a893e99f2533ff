//! The projection ensemble: score many random projections with a base
//! regressor, keep the best of each group and aggregate the winners.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{default_train_size, draw_split, Dataset};
use crate::error::{Result, RpeError};
use crate::projections::{
    aggregate_and_decompose, sample_projection, DistKind, EnsembleOutput, ProjectionDistribution,
    ProjectionMatrix,
};
use crate::regressors::{self, RegressorSpec};
use crate::rng::{self, purpose};

/// Settings for one ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpeConfig {
    /// Columns per projection.
    pub proj_dim: usize,
    /// Number of groups, i.e. of aggregated winners.
    pub groups: usize,
    /// Candidate projections per group.
    pub group_size: usize,
    /// Rows used to fit the base regressor; the rest score it.
    pub train_size: usize,
    pub dist: DistKind,
    pub regressor: RegressorSpec,
    pub seed: u64,
    /// Keep every holdout score in the group traces.
    #[serde(default)]
    pub keep_scores: bool,
}

/// `⌈√p⌉`.
pub fn default_proj_dim(p: usize) -> usize {
    let mut d = (p as f64).sqrt().ceil() as usize;
    // guard against rounding in the square root
    while d * d < p {
        d += 1;
    }
    while d > 1 && (d - 1) * (d - 1) >= p {
        d -= 1;
    }
    d
}

pub const DEFAULT_GROUPS: usize = 200;

impl RpeConfig {
    /// Default settings for an `n × p` dataset: 200 groups of `10p`
    /// projections of dimension `⌈√p⌉`, a `⌈2n/3⌉` training split, the
    /// Gaussian/Cauchy mixture and the spline regressor.
    pub fn defaults(n: usize, p: usize, seed: u64) -> Self {
        Self {
            proj_dim: default_proj_dim(p),
            groups: DEFAULT_GROUPS,
            group_size: 10 * p,
            train_size: default_train_size(n),
            dist: DistKind::default(),
            regressor: RegressorSpec::default(),
            seed,
            keep_scores: false,
        }
    }

    pub fn distribution(&self, p: usize) -> ProjectionDistribution {
        ProjectionDistribution {
            kind: self.dist,
            p,
            d: self.proj_dim,
        }
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if self.groups < 1 {
            return Err(RpeError::Config("group count must be at least 1".into()));
        }
        if self.group_size < 1 {
            return Err(RpeError::Config("group size must be at least 1".into()));
        }
        self.distribution(p).validate()?;
        self.regressor.validate()?;
        if self.train_size < 1 || self.train_size + 1 > n {
            return Err(RpeError::Config(format!(
                "training size must lie in [1, {}], got {}",
                n.saturating_sub(1),
                self.train_size
            )));
        }
        let required = self.regressor.min_samples(self.proj_dim);
        if self.train_size < required {
            return Err(RpeError::SampleSize {
                kind: self.regressor.kind.short_name(),
                required,
                got: self.train_size,
            });
        }
        Ok(())
    }
}

/// Selection record for one group. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTrace {
    pub group: usize,
    pub winner: usize,
    pub winning_score: f64,
    pub scores: Option<Vec<f64>>,
}

/// Index of the smallest score; ties go to the lowest index.
pub fn select_within_group(scores: &[f64]) -> Result<usize> {
    if scores.is_empty() {
        return Err(RpeError::InvalidInput("empty score vector".into()));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            return Err(RpeError::NanScore {
                group: None,
                index: i + 1,
            });
        }
        if s < scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Result of an ensemble run.
#[derive(Debug, Clone)]
pub struct RpeRun {
    pub output: EnsembleOutput,
    pub traces: Vec<GroupTrace>,
    pub winners: Vec<ProjectionMatrix>,
    pub wall_time: f64,
}

/// Run the ensemble on `data`.
///
/// Each group draws its own train/holdout split; each candidate projection
/// has its own random stream, so the result does not depend on the number of
/// worker threads.
pub fn rpe_fit(data: &Dataset, cfg: &RpeConfig) -> Result<RpeRun> {
    let start = Instant::now();
    let (n, p) = (data.n(), data.p());
    cfg.validate(n, p)?;
    let dist = cfg.distribution(p);

    let groups: Vec<(GroupTrace, ProjectionMatrix)> = (0..cfg.groups)
        .into_par_iter()
        .map(|g| run_group(data, cfg, &dist, g))
        .collect::<Result<_>>()?;

    let (traces, winners): (Vec<_>, Vec<_>) = groups.into_iter().unzip();
    let output = aggregate_and_decompose(&winners)?;
    Ok(RpeRun {
        output,
        traces,
        winners,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn run_group(
    data: &Dataset,
    cfg: &RpeConfig,
    dist: &ProjectionDistribution,
    group: usize,
) -> Result<(GroupTrace, ProjectionMatrix)> {
    let g = group as u64;
    let split = draw_split(
        data.n(),
        cfg.train_size,
        &mut rng::stream(cfg.seed, purpose::SPLIT, g, 0),
    )?;
    let x_train = data.rows(&split.train);
    let y_train = data.responses(&split.train);
    let x_hold = data.rows(&split.holdout);
    let y_hold = data.responses(&split.holdout);

    let mut scores = Vec::with_capacity(cfg.group_size);
    let mut best: Option<(f64, ProjectionMatrix)> = None;
    for m in 0..cfg.group_size {
        let proj = sample_projection(
            dist,
            &mut rng::stream(cfg.seed, purpose::PROJECTION, g, m as u64),
        );
        let z_train = &x_train * proj.entries();
        let z_hold = &x_hold * proj.entries();
        let model = regressors::fit(&cfg.regressor, &z_train, &y_train)?;
        let score = regressors::holdout_score(&model, &z_hold, &y_hold)?;
        if score.is_nan() {
            return Err(RpeError::NanScore {
                group: Some(group + 1),
                index: m + 1,
            });
        }
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, proj));
        }
        scores.push(score);
    }
    let winner = select_within_group(&scores)?;
    let (winning_score, proj) = best.expect("group size is at least 1");
    debug_assert_eq!(scores[winner], winning_score);
    Ok((
        GroupTrace {
            group,
            winner,
            winning_score,
            scores: cfg.keep_scores.then_some(scores),
        },
        proj,
    ))
}

/// The first `k` directions.
pub fn extract_projection(out: &EnsembleOutput, k: usize) -> Result<DMatrix<f64>> {
    if k < 1 || k > out.p() {
        return Err(RpeError::InvalidInput(format!(
            "cannot extract {k} directions from a {}-dimensional output",
            out.p()
        )));
    }
    Ok(out.directions.columns(0, k).into_owned())
}

/// JSON summary of a run. Group and projection indices are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RpeConfig,
    pub n: usize,
    pub p: usize,
    pub wall_time_seconds: f64,
    pub eigenvalues: Vec<f64>,
    pub groups: Vec<GroupReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: usize,
    pub winner: usize,
    pub winning_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

impl RunReport {
    pub fn new(run: &RpeRun, cfg: &RpeConfig, data: &Dataset) -> Self {
        Self {
            config: *cfg,
            n: data.n(),
            p: data.p(),
            wall_time_seconds: run.wall_time,
            eigenvalues: run.output.weights.iter().copied().collect(),
            groups: run
                .traces
                .iter()
                .map(|t| GroupReport {
                    group: t.group + 1,
                    winner: t.winner + 1,
                    winning_score: t.winning_score,
                    scores: t.scores.clone(),
                })
                .collect(),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(self, path)
    }
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    })
}
