use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rpe::dataset::{
    format_real, load_csv_with_names, write_csv, Dataset, LoadedCsv, ResponseColumn,
};
use rpe::dimension::{estimate_dimension, DimensionConfig};
use rpe::ensemble::{default_proj_dim, rpe_fit, RpeConfig, RunReport, DEFAULT_GROUPS};
use rpe::harness::{self, ExperimentGrid, ModelSetting, Preset};
use rpe::pipeline::{double_rpe, rpe_with_dimension, DoubleConfig, RpeOverrides};
use rpe::projections::{read_matrix_csv, write_matrix_csv, DistKind};
use rpe::regressors::{RegressorKind, RegressorSpec};
use rpe::rng::{self, purpose};
use rpe::simmodels::{generate, ModelId, SimModelSpec};
use serde_json::json;

use crate::args::{
    BaseArg, BenchmarkArgs, DataArgs, DistArg, DoubleArgs, EstimateDimArgs, FitArgs, GlobalArgs,
    PresetArg, RpeArgs, SimulateArgs,
};
use crate::config::Resolved;
use crate::CliError;

/// Shared per-run context.
pub struct Run<'a> {
    pub global: &'a GlobalArgs,
    pub argv: Vec<String>,
    pub threads: usize,
}

impl Run<'_> {
    fn out_dir(&self) -> Result<&Path, CliError> {
        let dir = self.global.out.as_path();
        std::fs::create_dir_all(dir).map_err(|e| {
            CliError::Usage(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        Ok(dir)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.global.out.join(name)
    }

    /// Write `manifest.json` and `resolved.cfg`.
    fn finish(
        &self,
        command: &str,
        resolved: &mut Resolved,
        details: serde_json::Value,
    ) -> Result<(), CliError> {
        resolved.set("seed", self.global.seed);
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "argv": self.argv,
            "seed": self.global.seed,
            "threads": self.threads,
            "resolved": resolved.to_json(),
            "details": details,
        });
        write_text(
            &self.out("manifest.json"),
            &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"),
        )?;
        write_text(&self.out("resolved.cfg"), &resolved.render())
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn response_column(s: &str) -> ResponseColumn {
    match s.strip_prefix('#').and_then(|k| k.parse::<usize>().ok()) {
        Some(k) if k >= 1 => ResponseColumn::Index(k - 1),
        _ => ResponseColumn::Name(s.to_string()),
    }
}

fn load(path: &Path, response: &str, standardize: bool) -> Result<(LoadedCsv, Dataset), CliError> {
    let loaded = load_csv_with_names(path, &response_column(response))?;
    let data = if standardize {
        loaded.dataset.standardized()
    } else {
        loaded.dataset.clone()
    };
    Ok((loaded, data))
}

fn input_details(path: &Path, loaded: &LoadedCsv, standardize: bool) -> serde_json::Value {
    json!({
        "path": path,
        "response": loaded.response_name,
        "covariates": loaded.covariate_names,
        "n": loaded.dataset.n(),
        "p": loaded.dataset.p(),
        "standardize": standardize,
    })
}

fn dist_override(a: &RpeArgs) -> Result<Option<DistKind>, CliError> {
    Ok(match (a.dist, a.mix_weight) {
        (None, None) => None,
        (Some(DistArg::Gaussian), None) => Some(DistKind::Gaussian),
        (Some(DistArg::Cauchy), None) => Some(DistKind::Cauchy),
        (Some(DistArg::Gaussian | DistArg::Cauchy), Some(_)) => {
            return Err(CliError::Usage(
                "--mix-weight only applies to --dist mixture".into(),
            ))
        }
        (Some(DistArg::Mixture) | None, w) => Some(DistKind::Mixture {
            gaussian_weight: w.unwrap_or(0.5),
        }),
    })
}

fn regressor_override(a: &RpeArgs) -> Option<RegressorSpec> {
    let touched = a.base.is_some()
        || a.bandwidth.is_some()
        || a.mars_degree.is_some()
        || a.mars_terms.is_some()
        || a.mars_penalty.is_some();
    if !touched {
        return None;
    }
    let kind = match a.base.unwrap_or(BaseArg::Mars) {
        BaseArg::Lls => RegressorKind::LinearLs,
        BaseArg::Qls => RegressorKind::QuadraticLs,
        BaseArg::Nw => RegressorKind::NadarayaWatson,
        BaseArg::Mars => RegressorKind::Mars,
    };
    let mut spec = RegressorSpec::new(kind);
    if let Some(h) = a.bandwidth {
        spec.nw_bandwidth = h;
    }
    if let Some(v) = a.mars_degree {
        spec.mars_max_degree = v;
    }
    if let Some(v) = a.mars_terms {
        spec.mars_max_terms = v;
    }
    if let Some(v) = a.mars_penalty {
        spec.mars_gcv_penalty = v;
    }
    Some(spec)
}

pub fn overrides(a: &RpeArgs) -> Result<RpeOverrides, CliError> {
    Ok(RpeOverrides {
        proj_dim: a.proj_dim,
        groups: a.groups,
        group_size: a.group_size,
        train_size: a.train_size,
        dist: dist_override(a)?,
        regressor: regressor_override(a),
    })
}

/// Field-wise merge; `top` wins.
fn merge(base: RpeOverrides, top: RpeOverrides) -> RpeOverrides {
    RpeOverrides {
        proj_dim: top.proj_dim.or(base.proj_dim),
        groups: top.groups.or(base.groups),
        group_size: top.group_size.or(base.group_size),
        train_size: top.train_size.or(base.train_size),
        dist: top.dist.or(base.dist),
        regressor: top.regressor.or(base.regressor),
    }
}

fn dist_name(d: DistKind) -> &'static str {
    match d {
        DistKind::Gaussian => "gaussian",
        DistKind::Cauchy => "cauchy",
        DistKind::Mixture { .. } => "mixture",
    }
}

fn resolve_dist(r: &mut Resolved, d: DistKind) {
    r.set("dist", dist_name(d));
    if let DistKind::Mixture { gaussian_weight } = d {
        r.set("mix-weight", format_real(gaussian_weight));
    }
}

fn resolve_regressor(r: &mut Resolved, spec: &RegressorSpec) {
    r.set("base", spec.kind.short_name());
    match spec.kind {
        RegressorKind::NadarayaWatson => {
            r.set("bandwidth", format_real(spec.nw_bandwidth));
        }
        RegressorKind::Mars => {
            r.set("mars-degree", spec.mars_max_degree)
                .set("mars-terms", spec.mars_max_terms)
                .set("mars-penalty", format_real(spec.mars_gcv_penalty));
        }
        _ => {}
    }
}

fn resolve_rpe(r: &mut Resolved, cfg: &RpeConfig) {
    r.set("L", cfg.groups)
        .set("M", cfg.group_size)
        .set("d", cfg.proj_dim)
        .set("n1", cfg.train_size);
    resolve_dist(r, cfg.dist);
    resolve_regressor(r, &cfg.regressor);
}

fn dimension_seed(seed: u64) -> u64 {
    rng::derive_seed(seed, purpose::DIMENSION, 0, 0)
}

pub fn fit(run: &Run, a: &FitArgs) -> Result<(), CliError> {
    let DataArgs {
        data: path,
        response,
        standardize,
    } = &a.data;
    let (loaded, data) = load(path, response, *standardize)?;
    let (n, p) = (data.n(), data.p());
    let mut cfg = overrides(&a.rpe)?.apply(RpeConfig::defaults(n, p, run.global.seed));
    cfg.keep_scores = a.keep_scores;
    cfg.validate(n, p)?;
    run.out_dir()?;

    let (result, dimension) = if a.estimate_dim {
        let dim_cfg = DimensionConfig::matching(&cfg, a.resamples, dimension_seed(run.global.seed));
        let res = rpe_with_dimension(&data, &cfg, &dim_cfg)?;
        (res.run, Some((res.report, dim_cfg)))
    } else {
        (rpe_fit(&data, &cfg)?, None)
    };
    result.output.write_directions_csv(run.out("U.csv"))?;
    result.output.write_weights_csv(run.out("D.csv"))?;
    RunReport::new(&result, &cfg, &data).write_json(run.out("report.json"))?;
    log::info!("ensemble finished in {:.2}s", result.wall_time);

    let mut resolved = Resolved::default();
    resolved
        .set("response", response)
        .set("standardize", standardize);
    resolve_rpe(&mut resolved, &cfg);
    resolved
        .set("keep-scores", a.keep_scores)
        .set("estimate-dim", a.estimate_dim);
    let mut details = json!({
        "input": input_details(path, &loaded, *standardize),
        "config": cfg,
        "outputs": ["U.csv", "D.csv", "report.json"],
    });
    if let Some((report, dim_cfg)) = dimension {
        report.write_json(run.out("dimension.json"))?;
        report.write_csv(run.out("dimension.csv"))?;
        resolved.set("R", a.resamples);
        details["dimension_config"] = json!(dim_cfg);
        details["d0_hat"] = json!(report.d0_hat);
        println!("estimated dimension: {}", report.d0_hat);
    }
    run.finish("fit", &mut resolved, details)?;
    println!("wrote results to {}", run.global.out.display());
    Ok(())
}

fn read_weights(path: &Path) -> Result<Vec<f64>, CliError> {
    let m = read_matrix_csv(path)?;
    if m.ncols() != 1 {
        return Err(CliError::Usage(format!(
            "{} should hold a single column of eigenvalues, found {}",
            path.display(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

pub fn estimate_dim(run: &Run, a: &EstimateDimArgs) -> Result<(), CliError> {
    let ov = overrides(&a.rpe)?;
    let mut resolved = Resolved::default();
    run.out_dir()?;
    let (report, dim_cfg, mut details) = if let Some(weights) = &a.weights {
        let observed = read_weights(weights)?;
        let p = observed.len();
        if a.rpe.group_size.is_some()
            || a.rpe.train_size.is_some()
            || regressor_override(&a.rpe).is_some()
        {
            log::warn!("selection settings are ignored when eigenvalues are given directly");
        }
        let dim_cfg = DimensionConfig {
            proj_dim: ov.proj_dim.unwrap_or_else(|| default_proj_dim(p)),
            dist: ov.dist.unwrap_or_default(),
            groups: ov.groups.unwrap_or(DEFAULT_GROUPS),
            resamples: a.resamples,
            seed: dimension_seed(run.global.seed),
        };
        let report = estimate_dimension(&observed, &dim_cfg)?;
        resolved
            .set("weights", weights.display())
            .set("L", dim_cfg.groups)
            .set("d", dim_cfg.proj_dim);
        resolve_dist(&mut resolved, dim_cfg.dist);
        (report, dim_cfg, json!({ "weights": weights }))
    } else {
        let path = a.data.as_ref().expect("clap requires data or weights");
        let response = a
            .response
            .as_deref()
            .ok_or_else(|| CliError::Usage("--response is required with a dataset".into()))?;
        let (loaded, data) = load(path, response, a.standardize)?;
        let (n, p) = (data.n(), data.p());
        let cfg = ov.apply(RpeConfig::defaults(n, p, run.global.seed));
        cfg.validate(n, p)?;
        let dim_cfg = DimensionConfig::matching(&cfg, a.resamples, dimension_seed(run.global.seed));
        let res = rpe_with_dimension(&data, &cfg, &dim_cfg)?;
        res.run.output.write_directions_csv(run.out("U.csv"))?;
        res.run.output.write_weights_csv(run.out("D.csv"))?;
        write_matrix_csv(&res.basis, "A", run.out("A_hat.csv"))?;
        RunReport::new(&res.run, &cfg, &data).write_json(run.out("report.json"))?;
        resolved
            .set("response", response)
            .set("standardize", a.standardize);
        resolve_rpe(&mut resolved, &cfg);
        let details = json!({
            "input": input_details(path, &loaded, a.standardize),
            "config": cfg,
        });
        (res.report, dim_cfg, details)
    };
    report.write_json(run.out("dimension.json"))?;
    report.write_csv(run.out("dimension.csv"))?;
    resolved.set("R", a.resamples);
    details["dimension_config"] = json!(dim_cfg);
    details["d0_hat"] = json!(report.d0_hat);
    println!("estimated dimension: {}", report.d0_hat);
    run.finish("estimate-dim", &mut resolved, details)
}

pub fn double(run: &Run, a: &DoubleArgs) -> Result<(), CliError> {
    let DataArgs {
        data: path,
        response,
        standardize,
    } = &a.data;
    let (loaded, data) = load(path, response, *standardize)?;
    let (n, p) = (data.n(), data.p());
    let stage1 = overrides(&a.rpe)?;
    let cfg = DoubleConfig {
        target_dim: a.target_dim,
        seed: run.global.seed,
        resamples: a.resamples,
        stage1,
        stage2: stage1.dimension_free(),
    };
    cfg.stage1_config(n, p).validate(n, p)?;
    run.out_dir()?;
    let res = double_rpe(&data, &cfg)?;

    write_matrix_csv(&res.estimate, "A", run.out("A_check.csv"))?;
    res.stage1
        .run
        .output
        .write_directions_csv(run.out("stage1_U.csv"))?;
    res.stage1
        .run
        .output
        .write_weights_csv(run.out("stage1_D.csv"))?;
    res.stage1.report.write_json(run.out("dimension.json"))?;
    if let Some(stage2) = &res.stage2 {
        stage2
            .output
            .write_directions_csv(run.out("stage2_U.csv"))?;
        stage2.output.write_weights_csv(run.out("stage2_D.csv"))?;
    }
    println!(
        "first stage kept {} direction(s); {}",
        res.selected_dim(),
        if res.stage2.is_some() {
            "second stage applied"
        } else {
            "second stage skipped"
        }
    );

    let mut resolved = Resolved::default();
    resolved
        .set("response", response)
        .set("standardize", standardize)
        .set("target-dim", a.target_dim);
    resolve_rpe(&mut resolved, &res.stage1_config);
    resolved.set("R", a.resamples);
    let details = json!({
        "input": input_details(path, &loaded, *standardize),
        "double_config": cfg,
        "stage1_config": res.stage1_config,
        "stage2_config": res.stage2_config,
        "d0_hat": res.selected_dim(),
    });
    run.finish("double", &mut resolved, details)
}

pub fn simulate(run: &Run, a: &SimulateArgs) -> Result<(), CliError> {
    let model: ModelId = a.model.parse()?;
    let spec = SimModelSpec::new(model, a.p, a.n, run.global.seed);
    let (data, truth) = generate(&spec)?;
    run.out_dir()?;
    write_csv(&data, run.out("data.csv"))?;
    truth.write(&spec, &run.global.out)?;
    let mut resolved = Resolved::default();
    resolved.set("model", model).set("p", a.p).set("n", a.n);
    run.finish(
        "simulate",
        &mut resolved,
        json!({ "spec": spec, "d0": truth.d0 }),
    )?;
    println!(
        "wrote {} rows from model {model} (d0 = {}) to {}",
        a.n,
        truth.d0,
        run.global.out.display()
    );
    Ok(())
}

fn build_grid(run: &Run, a: &BenchmarkArgs) -> Result<ExperimentGrid, CliError> {
    let preset = if a.full || a.preset == PresetArg::Full {
        Preset::Full
    } else {
        Preset::Desk
    };
    let mut grid = ExperimentGrid::preset(preset, run.global.seed);
    if let Some(models) = &a.models {
        let ids = models
            .iter()
            .map(|m| m.parse::<ModelId>())
            .collect::<Result<Vec<_>, _>>()?;
        let (p, n) = (a.p.unwrap_or(20), a.n.unwrap_or(200));
        grid.models = ids
            .into_iter()
            .map(|model| ModelSetting { model, p, n })
            .collect();
    } else if a.p.is_some() || a.n.is_some() {
        let mut seen = BTreeSet::new();
        grid.models = grid
            .models
            .iter()
            .map(|m| ModelSetting {
                model: m.model,
                p: a.p.unwrap_or(m.p),
                n: a.n.unwrap_or(m.n),
            })
            .filter(|m| seen.insert((m.model, m.p, m.n)))
            .collect();
    }
    if let Some(r) = a.replicates {
        grid.replicates = r;
    }
    if let Some(names) = &a.variants {
        for name in names {
            if !grid.variants.iter().any(|v| &v.name == name) {
                return Err(CliError::Usage(format!(
                    "unknown variant '{name}' (expected RPE, RPE2 or RPE-dim)"
                )));
            }
        }
        grid.variants.retain(|v| names.contains(&v.name));
    }
    let cli = overrides(&a.rpe)?;
    grid.variants = grid
        .variants
        .into_iter()
        .map(|v| {
            let merged = merge(v.overrides, cli);
            let resamples = a.resamples.unwrap_or(v.resamples);
            v.with_overrides(merged).with_resamples(resamples)
        })
        .collect();
    grid.validate()?;
    Ok(grid)
}

pub fn benchmark(run: &Run, a: &BenchmarkArgs) -> Result<(), CliError> {
    let grid = build_grid(run, a)?;
    let workers = a.workers.unwrap_or(run.threads).max(1);
    run.out_dir()?;
    log::info!(
        "running {} cells on {workers} worker(s)",
        grid.cells().len()
    );
    let records = harness::run_grid(&grid, workers)?;
    harness::write_outputs(&grid, workers, &records, &run.global.out)?;

    let mut resolved = Resolved::default();
    resolved.set(
        "preset",
        if a.full || a.preset == PresetArg::Full {
            "full"
        } else {
            "desk"
        },
    );
    if let Some(m) = &a.models {
        resolved.set("models", m.join(","));
    }
    for (key, v) in [
        ("p", a.p),
        ("n", a.n),
        ("replicates", a.replicates),
        ("R", a.resamples),
    ] {
        if let Some(v) = v {
            resolved.set(key, v);
        }
    }
    if let Some(v) = &a.variants {
        resolved.set("variants", v.join(","));
    }
    let cli = overrides(&a.rpe)?;
    for (key, v) in [
        ("L", cli.groups),
        ("M", cli.group_size),
        ("d", cli.proj_dim),
        ("n1", cli.train_size),
    ] {
        if let Some(v) = v {
            resolved.set(key, v);
        }
    }
    if let Some(d) = cli.dist {
        resolve_dist(&mut resolved, d);
    }
    if let Some(spec) = &cli.regressor {
        resolve_regressor(&mut resolved, spec);
    }
    resolved.set("workers", workers);
    // the harness manifest already lists the grid and every cell's seeds
    resolved.set("seed", run.global.seed);
    write_text(&run.out("resolved.cfg"), &resolved.render())?;

    let failed = records.iter().filter(|r| r.failed()).count();
    println!(
        "{} records ({} failed) written to {}",
        records.len(),
        failed,
        run.global.out.display()
    );
    Ok(())
}
