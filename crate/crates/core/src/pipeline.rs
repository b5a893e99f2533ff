//! Two-stage estimation and the ensemble-plus-dimension convenience path.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dimension::{estimate_dimension, DimensionConfig, DimensionReport, DEFAULT_RESAMPLES};
use crate::ensemble::{extract_projection, rpe_fit, RpeConfig, RpeRun};
use crate::error::{Result, RpeError};
use crate::projections::DistKind;
use crate::regressors::RegressorSpec;
use crate::rng::{self, purpose};

/// Optional replacements for individual ensemble settings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RpeOverrides {
    pub proj_dim: Option<usize>,
    pub groups: Option<usize>,
    pub group_size: Option<usize>,
    pub train_size: Option<usize>,
    pub dist: Option<DistKind>,
    pub regressor: Option<RegressorSpec>,
}

impl RpeOverrides {
    pub fn apply(&self, base: RpeConfig) -> RpeConfig {
        RpeConfig {
            proj_dim: self.proj_dim.unwrap_or(base.proj_dim),
            groups: self.groups.unwrap_or(base.groups),
            group_size: self.group_size.unwrap_or(base.group_size),
            train_size: self.train_size.unwrap_or(base.train_size),
            dist: self.dist.unwrap_or(base.dist),
            regressor: self.regressor.unwrap_or(base.regressor),
            ..base
        }
    }

    /// The settings that still make sense once the data has been reduced to
    /// a different dimension: the projection dimension and group size are
    /// dropped so that they follow the reduced data.
    pub fn dimension_free(&self) -> RpeOverrides {
        RpeOverrides {
            proj_dim: None,
            group_size: None,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleConfig {
    /// Number of directions to return.
    pub target_dim: usize,
    pub seed: u64,
    pub resamples: usize,
    pub stage1: RpeOverrides,
    pub stage2: RpeOverrides,
}

impl DoubleConfig {
    pub fn new(target_dim: usize, seed: u64) -> Self {
        Self {
            target_dim,
            seed,
            resamples: DEFAULT_RESAMPLES,
            stage1: RpeOverrides::default(),
            stage2: RpeOverrides::default(),
        }
    }

    /// Resolved first-stage settings for an `n × p` dataset.
    pub fn stage1_config(&self, n: usize, p: usize) -> RpeConfig {
        self.stage1.apply(RpeConfig::defaults(n, p, self.seed))
    }

    /// Resolved second-stage settings when the first stage found `k`
    /// directions.
    pub fn stage2_config(&self, n: usize, k: usize) -> RpeConfig {
        let seed = rng::derive_seed(self.seed, purpose::STAGE2, 0, 0);
        self.stage2.apply(RpeConfig::defaults(n, k, seed))
    }

    pub fn dimension_config(&self, stage1: &RpeConfig) -> DimensionConfig {
        let seed = rng::derive_seed(self.seed, purpose::DIMENSION, 0, 0);
        DimensionConfig::matching(stage1, self.resamples, seed)
    }
}

/// Ensemble output together with the selected dimension.
#[derive(Debug, Clone)]
pub struct DimensionRun {
    /// First `d̂₀` directions; `p × 0` when nothing was selected.
    pub basis: DMatrix<f64>,
    pub report: DimensionReport,
    pub run: RpeRun,
}

/// Run the ensemble, then estimate how many of its directions to keep.
pub fn rpe_with_dimension(
    data: &Dataset,
    cfg: &RpeConfig,
    dim_cfg: &DimensionConfig,
) -> Result<DimensionRun> {
    if dim_cfg.proj_dim != cfg.proj_dim || dim_cfg.dist != cfg.dist || dim_cfg.groups != cfg.groups
    {
        return Err(RpeError::Config(
            "dimension estimation must use the ensemble's projection dimension, distribution \
             and group count"
                .into(),
        ));
    }
    let run = rpe_fit(data, cfg)?;
    let observed: Vec<f64> = run.output.weights.iter().copied().collect();
    let report = estimate_dimension(&observed, dim_cfg)?;
    let basis = run.output.directions.columns(0, report.d0_hat).into_owned();
    Ok(DimensionRun { basis, report, run })
}

#[derive(Debug, Clone)]
pub struct DoubleResult {
    /// `p × target_dim` with orthonormal columns.
    pub estimate: DMatrix<f64>,
    pub stage1: DimensionRun,
    pub stage1_config: RpeConfig,
    /// Present only when the first stage selected more than `target_dim`
    /// directions.
    pub stage2: Option<RpeRun>,
    pub stage2_config: Option<RpeConfig>,
}

impl DoubleResult {
    pub fn selected_dim(&self) -> usize {
        self.stage1.report.d0_hat
    }
}

/// Two-stage estimate: if the first stage keeps more directions than
/// wanted, rerun the ensemble on the data projected onto them and compose.
pub fn double_rpe(data: &Dataset, cfg: &DoubleConfig) -> Result<DoubleResult> {
    let (n, p) = (data.n(), data.p());
    if cfg.target_dim < 1 || cfg.target_dim > p {
        return Err(RpeError::Config(format!(
            "target dimension must lie in [1, {p}], got {}",
            cfg.target_dim
        )));
    }
    let stage1_config = cfg.stage1_config(n, p);
    let dim_cfg = cfg.dimension_config(&stage1_config);
    let stage1 =
        rpe_with_dimension(data, &stage1_config, &dim_cfg).map_err(|e| RpeError::Stage {
            stage: 1,
            context: format!("{stage1_config:?}"),
            source: Box::new(e),
        })?;
    let selected = stage1.report.d0_hat;

    if selected <= cfg.target_dim {
        if selected == 0 {
            log::warn!(
                "no informative direction detected; returning the leading {} directions",
                cfg.target_dim
            );
        }
        let estimate = extract_projection(&stage1.run.output, cfg.target_dim)?;
        return Ok(DoubleResult {
            estimate,
            stage1,
            stage1_config,
            stage2: None,
            stage2_config: None,
        });
    }

    let stage2_config = cfg.stage2_config(n, selected);
    let projected = data.project(&stage1.basis)?;
    let stage2 = rpe_fit(&projected, &stage2_config).map_err(|e| RpeError::Stage {
        stage: 2,
        context: format!("stage 1 {stage1_config:?}; stage 2 {stage2_config:?}"),
        source: Box::new(e),
    })?;
    let inner = extract_projection(&stage2.output, cfg.target_dim)?;
    let estimate = &stage1.basis * inner;
    Ok(DoubleResult {
        estimate,
        stage1,
        stage1_config,
        stage2: Some(stage2),
        stage2_config: Some(stage2_config),
    })
}
