//! Replicated simulation experiments: run every (model, variant, replicate)
//! cell, score the estimates against the truth and summarize.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dimension::{DimensionConfig, DEFAULT_RESAMPLES};
use crate::ensemble::{extract_projection, rpe_fit, write_json, RpeConfig};
use crate::error::{Result, RpeError};
use crate::metrics::subspace_report;
use crate::pipeline::{double_rpe, rpe_with_dimension, DoubleConfig, RpeOverrides};
use crate::rng::{self, purpose};
use crate::simmodels::{generate, GroundTruth, ModelId, SimModelSpec};

/// One simulated data-generating setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSetting {
    pub model: ModelId,
    pub p: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKind {
    /// Single ensemble run, keep the leading `d0` directions.
    Rpe,
    /// Two-stage estimate targeting `d0` directions.
    Rpe2,
    /// Single ensemble run with the estimated dimension.
    RpeDim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub kind: VariantKind,
    pub overrides: RpeOverrides,
    /// Second-stage settings for [`VariantKind::Rpe2`].
    pub stage2: RpeOverrides,
    pub resamples: usize,
}

impl Variant {
    pub fn new(name: impl Into<String>, kind: VariantKind) -> Self {
        Self {
            name: name.into(),
            kind,
            overrides: RpeOverrides::default(),
            stage2: RpeOverrides::default(),
            resamples: DEFAULT_RESAMPLES,
        }
    }

    /// Set the ensemble overrides. The second stage of a two-stage variant
    /// takes all of them except the projection dimension and group size,
    /// which follow the reduced data.
    pub fn with_overrides(mut self, overrides: RpeOverrides) -> Self {
        self.overrides = overrides;
        self.stage2 = overrides.dimension_free();
        self
    }

    pub fn with_resamples(mut self, resamples: usize) -> Self {
        self.resamples = resamples;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub models: Vec<ModelSetting>,
    pub variants: Vec<Variant>,
    pub replicates: usize,
    pub master_seed: u64,
}

/// Named grid sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Models 1a, 2, 3 and 4 at `p = 20`, `n = 200`, 20 replicates, with
    /// groups of 200 projections.
    Desk,
    /// Models 1a and 2 to 9 over `p ∈ {20, 50, 100}`, `n ∈ {50, 200, 500}`,
    /// 100 replicates, default settings. Expect days of single-core time.
    Full,
}

impl std::str::FromStr for Preset {
    type Err = RpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "desk" => Ok(Preset::Desk),
            "full" => Ok(Preset::Full),
            other => Err(RpeError::Config(format!("unknown preset '{other}'"))),
        }
    }
}

fn standard_variants(overrides: RpeOverrides) -> Vec<Variant> {
    vec![
        Variant::new("RPE", VariantKind::Rpe).with_overrides(overrides),
        Variant::new("RPE2", VariantKind::Rpe2).with_overrides(overrides),
        Variant::new("RPE-dim", VariantKind::RpeDim).with_overrides(overrides),
    ]
}

impl ExperimentGrid {
    pub fn preset(preset: Preset, master_seed: u64) -> Self {
        match preset {
            Preset::Desk => Self {
                models: [ModelId::M1a, ModelId::M2, ModelId::M3, ModelId::M4]
                    .into_iter()
                    .map(|model| ModelSetting {
                        model,
                        p: 20,
                        n: 200,
                    })
                    .collect(),
                variants: standard_variants(RpeOverrides {
                    group_size: Some(200),
                    ..RpeOverrides::default()
                }),
                replicates: 20,
                master_seed,
            },
            Preset::Full => {
                let mut models = Vec::new();
                for model in ModelId::ALL
                    .into_iter()
                    .filter(|m| !matches!(m, ModelId::M1b | ModelId::M1c))
                {
                    for p in [20, 50, 100] {
                        for n in [50, 200, 500] {
                            models.push(ModelSetting { model, p, n });
                        }
                    }
                }
                Self {
                    models,
                    variants: standard_variants(RpeOverrides::default()),
                    replicates: 100,
                    master_seed,
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(RpeError::Config(
                "replicate count must be at least 1".into(),
            ));
        }
        if self.models.is_empty() || self.variants.is_empty() {
            return Err(RpeError::Config(
                "grid needs at least one model and one variant".into(),
            ));
        }
        let mut names: Vec<&str> = self.variants.iter().map(|v| v.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(RpeError::Config(format!(
                "duplicate variant name '{}'",
                w[0]
            )));
        }
        for m in &self.models {
            SimModelSpec::new(m.model, m.p, m.n, 0).validate()?;
            let d0 = m.model.true_dim();
            for v in &self.variants {
                let cfg = v.overrides.apply(RpeConfig::defaults(m.n, m.p, 0));
                cfg.validate(m.n, m.p).map_err(|e| cell_context(m, v, e))?;
                if v.kind == VariantKind::Rpe2 && d0 > cfg.proj_dim.min(m.p) {
                    return Err(RpeError::Config(format!(
                        "variant {} targets {d0} directions but projects to {}",
                        v.name, cfg.proj_dim
                    )));
                }
                if v.kind != VariantKind::Rpe && v.resamples < 1 {
                    return Err(RpeError::Config("resample count must be at least 1".into()));
                }
            }
        }
        Ok(())
    }

    /// Every cell of the grid, in model, variant, replicate order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for m in &self.models {
            for v in &self.variants {
                for r in 0..self.replicates {
                    out.push(Cell {
                        setting: *m,
                        variant: v.clone(),
                        replicate: r,
                        data_seed: data_seed(self.master_seed, m, r),
                        method_seed: method_seed(self.master_seed, m, &v.name, r),
                    });
                }
            }
        }
        out
    }
}

fn cell_context(m: &ModelSetting, v: &Variant, e: RpeError) -> RpeError {
    RpeError::Config(format!(
        "variant {} on model {} (p = {}, n = {}): {e}",
        v.name, m.model, m.p, m.n
    ))
}

/// Seeds are keyed by content rather than position, so editing one part of
/// a grid leaves the other cells' seeds unchanged. All variants of a
/// replicate see the same data.
pub fn data_seed(master: u64, m: &ModelSetting, replicate: usize) -> u64 {
    let label = format!("{}:{}:{}:{}", purpose::DATA, m.model, m.p, m.n);
    rng::derive_seed(master, &label, replicate as u64, 0)
}

pub fn method_seed(master: u64, m: &ModelSetting, variant: &str, replicate: usize) -> u64 {
    let label = format!("{}:{}:{}:{}:{variant}", purpose::METHOD, m.model, m.p, m.n);
    rng::derive_seed(master, &label, replicate as u64, 0)
}

/// A fully specified unit of work.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub setting: ModelSetting,
    pub variant: Variant,
    pub replicate: usize,
    pub data_seed: u64,
    pub method_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub model: ModelId,
    pub p: usize,
    pub n: usize,
    pub variant: String,
    pub replicate: usize,
    pub data_seed: u64,
    pub method_seed: u64,
    pub sin_theta: Option<f64>,
    pub d_fp: Option<f64>,
    pub d_fn: Option<f64>,
    pub d0_hat: Option<usize>,
    pub wall_time_seconds: f64,
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Equality ignoring timing.
    pub fn same_outcome(&self, other: &Self) -> bool {
        Self {
            wall_time_seconds: 0.0,
            ..self.clone()
        } == Self {
            wall_time_seconds: 0.0,
            ..other.clone()
        }
    }
}

struct Estimate {
    basis: DMatrix<f64>,
    d0_hat: Option<usize>,
}

fn estimate(cell: &Cell, truth: &GroundTruth) -> Result<Estimate> {
    let ModelSetting { model, p, n } = cell.setting;
    let spec = SimModelSpec::new(model, p, n, cell.data_seed);
    let (data, _) = generate(&spec)?;
    let v = &cell.variant;
    match v.kind {
        VariantKind::Rpe => {
            let cfg = v
                .overrides
                .apply(RpeConfig::defaults(n, p, cell.method_seed));
            let run = rpe_fit(&data, &cfg)?;
            Ok(Estimate {
                basis: extract_projection(&run.output, truth.d0)?,
                d0_hat: None,
            })
        }
        VariantKind::Rpe2 => {
            let cfg = DoubleConfig {
                target_dim: truth.d0,
                seed: cell.method_seed,
                resamples: v.resamples,
                stage1: v.overrides,
                stage2: v.stage2,
            };
            let res = double_rpe(&data, &cfg)?;
            Ok(Estimate {
                d0_hat: Some(res.selected_dim()),
                basis: res.estimate,
            })
        }
        VariantKind::RpeDim => {
            let cfg = v
                .overrides
                .apply(RpeConfig::defaults(n, p, cell.method_seed));
            let dim_seed = rng::derive_seed(cell.method_seed, purpose::DIMENSION, 0, 0);
            let dim_cfg = DimensionConfig::matching(&cfg, v.resamples, dim_seed);
            let res = rpe_with_dimension(&data, &cfg, &dim_cfg)?;
            Ok(Estimate {
                d0_hat: Some(res.report.d0_hat),
                basis: res.basis,
            })
        }
    }
}

/// Run one cell. Failures are captured in the record.
pub fn run_cell(cell: &Cell) -> ResultRecord {
    let start = Instant::now();
    let ModelSetting { model, p, n } = cell.setting;
    let truth = GroundTruth::for_model(model, p);
    let mut rec = ResultRecord {
        model,
        p,
        n,
        variant: cell.variant.name.clone(),
        replicate: cell.replicate,
        data_seed: cell.data_seed,
        method_seed: cell.method_seed,
        sin_theta: None,
        d_fp: None,
        d_fn: None,
        d0_hat: None,
        wall_time_seconds: 0.0,
        error: None,
    };
    match estimate(cell, &truth).and_then(|est| {
        let report = subspace_report(&est.basis, &truth.a0)?;
        Ok((est.d0_hat, report))
    }) {
        Ok((d0_hat, report)) => {
            rec.sin_theta = report.sin_theta;
            rec.d_fp = Some(report.d_fp);
            rec.d_fn = Some(report.d_fn);
            rec.d0_hat = d0_hat;
        }
        Err(e) => {
            log::warn!(
                "model {model} variant {} replicate {} failed: {e}",
                cell.variant.name,
                cell.replicate
            );
            rec.error = Some(e.to_string());
        }
    }
    rec.wall_time_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "model {model} (p = {p}, n = {n}) {} replicate {} finished in {:.1}s",
        cell.variant.name,
        cell.replicate,
        rec.wall_time_seconds
    );
    rec
}

/// Run every cell on a pool of `workers` threads. Records come back in
/// cell order whatever the pool size.
pub fn run_grid(grid: &ExperimentGrid, workers: usize) -> Result<Vec<ResultRecord>> {
    grid.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RpeError::Config(format!("cannot build worker pool: {e}")))?;
    let cells = grid.cells();
    Ok(pool.install(|| cells.par_iter().map(run_cell).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation over `√count`; absent for a single value.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub model: ModelId,
    pub p: usize,
    pub n: usize,
    pub variant: String,
    pub records: usize,
    pub failed: usize,
    pub metrics: Vec<MetricSummary>,
}

/// Mean and standard error of `values`.
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Some((var / k).sqrt()))
}

type MetricFn = fn(&ResultRecord) -> Option<f64>;

const METRICS: [(&str, MetricFn); 5] = [
    ("sin_theta", |r| r.sin_theta),
    ("d_fp", |r| r.d_fp),
    ("d_fn", |r| r.d_fn),
    ("d0_hat", |r| r.d0_hat.map(|d| d as f64)),
    ("wall_time_seconds", |r| Some(r.wall_time_seconds)),
];

/// Per-setting, per-variant summaries. Metrics with no values are omitted.
/// The result does not depend on the order of `records`.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(ModelId, usize, usize, &str), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.model, r.p, r.n, r.variant.as_str()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((model, p, n, variant), mut recs)| {
            // fixed summation order
            recs.sort_by_key(|r| (r.replicate, r.data_seed, r.method_seed));
            let ok: Vec<&ResultRecord> = recs.iter().copied().filter(|r| !r.failed()).collect();
            let metrics = METRICS
                .iter()
                .filter_map(|(name, get)| {
                    let values: Vec<f64> = ok.iter().filter_map(|r| get(r)).collect();
                    if values.is_empty() {
                        return None;
                    }
                    let (mean, se) = mean_se(&values);
                    Some(MetricSummary {
                        metric: name.to_string(),
                        count: values.len(),
                        mean,
                        se,
                    })
                })
                .collect();
            SummaryRow {
                model,
                p,
                n,
                variant: variant.to_string(),
                records: recs.len(),
                failed: recs.len() - ok.len(),
                metrics,
            }
        })
        .collect()
}

fn io_err(path: &Path, e: csv::Error) -> RpeError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => RpeError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => RpeError::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(crate::dataset::format_real).unwrap_or_default()
}

pub fn write_records_csv(records: &[ResultRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "model",
        "p",
        "n",
        "variant",
        "replicate",
        "data_seed",
        "method_seed",
        "sin_theta",
        "d_fp",
        "d_fn",
        "d0_hat",
        "wall_time_seconds",
        "error",
    ])?;
    for r in records {
        w.write_record([
            r.model.to_string(),
            r.p.to_string(),
            r.n.to_string(),
            r.variant.clone(),
            r.replicate.to_string(),
            r.data_seed.to_string(),
            r.method_seed.to_string(),
            opt(r.sin_theta),
            opt(r.d_fp),
            opt(r.d_fn),
            r.d0_hat.map(|d| d.to_string()).unwrap_or_default(),
            format!("{:.6}", r.wall_time_seconds),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Long format: one line per (setting, variant, metric). `se_x10` is the
/// ten-fold standard error used in published tables.
pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "model", "p", "n", "variant", "metric", "count", "mean", "se", "se_x10", "records",
        "failed",
    ])?;
    for row in rows {
        for m in &row.metrics {
            w.write_record([
                row.model.to_string(),
                row.p.to_string(),
                row.n.to_string(),
                row.variant.clone(),
                m.metric.clone(),
                m.count.to_string(),
                crate::dataset::format_real(m.mean),
                opt(m.se),
                opt(m.se.map(|s| 10.0 * s)),
                row.records.to_string(),
                row.failed.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    version: &'a str,
    grid: &'a ExperimentGrid,
    workers: usize,
    records: usize,
    failed: usize,
    cells: Vec<CellSeeds>,
}

#[derive(Debug, Serialize)]
struct CellSeeds {
    model: ModelId,
    p: usize,
    n: usize,
    variant: String,
    replicate: usize,
    data_seed: u64,
    method_seed: u64,
}

/// Write `records.csv`, `summary.csv` and `manifest.json` into `dir`.
pub fn write_outputs(
    grid: &ExperimentGrid,
    workers: usize,
    records: &[ResultRecord],
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    write_records_csv(records, dir.join("records.csv"))?;
    write_summary_csv(&summarize(records), dir.join("summary.csv"))?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        grid,
        workers,
        records: records.len(),
        failed: records.iter().filter(|r| r.failed()).count(),
        cells: records
            .iter()
            .map(|r| CellSeeds {
                model: r.model,
                p: r.p,
                n: r.n,
                variant: r.variant.clone(),
                replicate: r.replicate,
                data_seed: r.data_seed,
                method_seed: r.method_seed,
            })
            .collect(),
    };
    write_json(&manifest, dir.join("manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressors::{RegressorKind, RegressorSpec};
    use rand::seq::SliceRandom;

    fn tiny_grid(replicates: usize) -> ExperimentGrid {
        let fast = RpeOverrides {
            groups: Some(12),
            group_size: Some(10),
            proj_dim: Some(2),
            regressor: Some(RegressorSpec::new(RegressorKind::QuadraticLs)),
            ..RpeOverrides::default()
        };
        ExperimentGrid {
            models: vec![ModelSetting {
                model: ModelId::M3,
                p: 8,
                n: 60,
            }],
            variants: vec![
                Variant::new("RPE", VariantKind::Rpe).with_overrides(fast),
                Variant::new("RPE-dim", VariantKind::RpeDim)
                    .with_overrides(fast)
                    .with_resamples(50),
            ],
            replicates,
            master_seed: 5,
        }
    }

    fn record(replicate: usize, sin_theta: f64) -> ResultRecord {
        ResultRecord {
            model: ModelId::M2,
            p: 20,
            n: 200,
            variant: "RPE".into(),
            replicate,
            data_seed: replicate as u64,
            method_seed: 0,
            sin_theta: Some(sin_theta),
            d_fp: Some(sin_theta),
            d_fn: Some(sin_theta),
            d0_hat: None,
            wall_time_seconds: 1.0,
            error: None,
        }
    }

    #[test]
    fn distinct_replicate_seeds() {
        let mut grid = tiny_grid(3);
        grid.variants.truncate(1);
        let recs = run_grid(&grid, 1).unwrap();
        assert_eq!(recs.len(), 3);
        let mut seeds: Vec<u64> = recs.iter().map(|r| r.method_seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 3);
        let mut data: Vec<u64> = recs.iter().map(|r| r.data_seed).collect();
        data.dedup();
        assert_eq!(data.len(), 3);
        assert!(recs.iter().all(|r| !r.failed() && r.sin_theta.is_some()));
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let grid = tiny_grid(2);
        let a = run_grid(&grid, 1).unwrap();
        let b = run_grid(&grid, 4).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.same_outcome(y));
        }
    }

    #[test]
    fn records_cover_the_grid() {
        let grid = tiny_grid(2);
        let recs = run_grid(&grid, 2).unwrap();
        let mut keys: Vec<(String, usize)> = recs
            .iter()
            .map(|r| (r.variant.clone(), r.replicate))
            .collect();
        keys.sort();
        assert_eq!(
            keys,
            vec![
                ("RPE".into(), 0),
                ("RPE".into(), 1),
                ("RPE-dim".into(), 0),
                ("RPE-dim".into(), 1)
            ]
        );
        // variants of a replicate share data
        assert_eq!(recs[0].data_seed, recs[2].data_seed);
        assert!(recs
            .iter()
            .filter(|r| r.variant == "RPE-dim")
            .all(|r| r.d0_hat.is_some()));
    }

    #[test]
    fn seeds_reproduce_a_single_cell() {
        let grid = tiny_grid(3);
        let recs = run_grid(&grid, 1).unwrap();
        for idx in [0, 2, 4] {
            let r = &recs[idx];
            let variant = grid
                .variants
                .iter()
                .find(|v| v.name == r.variant)
                .unwrap()
                .clone();
            let cell = Cell {
                setting: ModelSetting {
                    model: r.model,
                    p: r.p,
                    n: r.n,
                },
                variant,
                replicate: r.replicate,
                data_seed: r.data_seed,
                method_seed: r.method_seed,
            };
            assert!(run_cell(&cell).same_outcome(r));
        }
    }

    #[test]
    fn failures_are_recorded() {
        let mut grid = tiny_grid(1);
        grid.variants.truncate(1);
        let mut cell = grid.cells().remove(0);
        // a train size this large leaves no holdout row
        cell.variant.overrides.train_size = Some(60);
        let rec = run_cell(&cell);
        assert!(rec.failed());
        assert!(rec.sin_theta.is_none());
        let summary = summarize(&[rec, record(0, 0.5)]);
        assert!(summary.iter().any(|s| s.failed == 1));
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let mut g = tiny_grid(0);
        assert!(g.validate().is_err());
        g.replicates = 1;
        g.variants[1].name = "RPE".into();
        assert!(g.validate().is_err());
        let mut g = tiny_grid(1);
        g.models[0].p = 5;
        assert!(g.validate().is_err());
    }

    #[test]
    fn constant_values_have_zero_error() {
        let recs: Vec<ResultRecord> = (0..4).map(|i| record(i, 0.3)).collect();
        let s = &summarize(&recs)[0];
        let st = s.metrics.iter().find(|m| m.metric == "sin_theta").unwrap();
        assert!((st.mean - 0.3).abs() < 1e-15);
        assert!(st.se.unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_value_standard_error() {
        let s = &summarize(&[record(0, 0.0), record(1, 1.0)])[0];
        let st = s.metrics.iter().find(|m| m.metric == "sin_theta").unwrap();
        assert_eq!(st.mean, 0.5);
        assert!((st.se.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_metrics_are_omitted() {
        let s = &summarize(&[record(0, 0.1), record(1, 0.2)])[0];
        assert!(s.metrics.iter().all(|m| m.metric != "d0_hat"));
    }

    #[test]
    fn summary_ignores_record_order() {
        let mut recs: Vec<ResultRecord> = (0..30)
            .map(|i| record(i, (i as f64 * 0.37).sin().abs()))
            .collect();
        let mut other: Vec<ResultRecord> = recs
            .iter()
            .map(|r| ResultRecord {
                variant: "RPE2".into(),
                ..r.clone()
            })
            .collect();
        recs.append(&mut other);
        let base = summarize(&recs);
        let mut s = rng::seeded(1);
        for _ in 0..5 {
            recs.shuffle(&mut s);
            assert_eq!(summarize(&recs), base);
        }
    }

    #[test]
    fn outputs_are_written() {
        let grid = tiny_grid(1);
        let recs = run_grid(&grid, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&grid, 1, &recs, dir.path()).unwrap();
        let records = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
        assert_eq!(records.lines().count(), 3);
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with("model,p,n,variant,metric"));
        assert!(summary.contains("RPE-dim"));
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(manifest["records"], 2);
        assert_eq!(manifest["grid"]["master_seed"], 5);
    }

    #[test]
    fn desk_preset_shape() {
        let g = ExperimentGrid::preset(Preset::Desk, 1);
        g.validate().unwrap();
        assert_eq!(g.cells().len(), 4 * 3 * 20);
        let f = ExperimentGrid::preset(Preset::Full, 1);
        assert_eq!(f.models.len(), 9 * 9);
        assert_eq!(f.replicates, 100);
    }
}
