//! Acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 1 6 7`.

use std::collections::BTreeSet;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use rpe::dataset::Dataset;
use rpe::dimension::{null_samples, report_against, select_dimension, DimensionConfig};
use rpe::ensemble::{rpe_fit, RpeConfig, RpeRun};
use rpe::harness::{self, ExperimentGrid, ModelSetting, Preset, Variant, VariantKind};
use rpe::metrics::{d_fp, sin_theta};
use rpe::pipeline::{double_rpe, rpe_with_dimension, DimensionRun, DoubleConfig, RpeOverrides};
use rpe::projections::{aggregate, DistKind};
use rpe::regressors::lstsq::min_norm_lstsq;
use rpe::regressors::quadratic::QuadraticFit;
use rpe::regressors::{RegressorKind, RegressorSpec};
use rpe::rng;
use rpe::simmodels::{generate, ModelId, SimModelSpec};

const MASTER: u64 = 0x5EED_2024;
const REPLICATES: usize = 20;

struct Check {
    label: String,
    pass: bool,
}

struct Outcome {
    id: &'static str,
    title: &'static str,
    checks: Vec<Check>,
    seconds: f64,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(label: impl Into<String>, pass: bool) -> Check {
    Check {
        label: label.into(),
        pass,
    }
}

fn seed(tag: &str, a: usize, b: usize) -> u64 {
    rng::derive_seed(MASTER, tag, a as u64, b as u64)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn fraction(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

fn gaussian_matrix(n: usize, p: usize, s: &mut rng::Stream) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| s.sample(StandardNormal))
}

fn unit(p: usize, j: usize) -> DVector<f64> {
    let mut e = DVector::zeros(p);
    e[j] = 1.0;
    e
}

fn abs_dot(u: &DMatrix<f64>, j: usize, v: &DVector<f64>) -> f64 {
    u.column(j).dot(v).abs()
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().amax()
}

// ---------------------------------------------------------------- 1

fn single_index_recovery() -> Outcome {
    let start = Instant::now();
    let (n, p) = (100, 20);
    let a0 = DVector::from_fn(p, |i, _| {
        if i < 2 {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            0.0
        }
    });
    let mut first = Vec::new();
    let mut rest = Vec::new();
    for r in 0..REPLICATES {
        let mut s = rng::stream(MASTER, "single-index-data", r as u64, 0);
        let x = gaussian_matrix(n, p, &mut s);
        let y = DVector::from_fn(n, |i, _| {
            let e: f64 = s.sample(StandardNormal);
            x.row(i).transpose().dot(&a0) + 0.3 * e
        });
        let data = Dataset::new(x, y).unwrap();
        let cfg = RpeConfig {
            proj_dim: 5,
            groups: 200,
            group_size: 200,
            train_size: 66,
            dist: DistKind::Cauchy,
            regressor: RegressorSpec::new(RegressorKind::QuadraticLs),
            seed: seed("single-index-method", r, 0),
            keep_scores: false,
        };
        let u = rpe_fit(&data, &cfg).unwrap().output.directions;
        first.push(abs_dot(&u, 0, &a0));
        rest.push((2..p).map(|j| abs_dot(&u, j, &a0)).fold(0.0, f64::max));
    }
    let (m1, m3) = (median(first), median(rest));
    Outcome {
        id: "1",
        title: "single-index recovery, p=20, n=100, Cauchy projections, quadratic base",
        checks: vec![
            check(
                format!("median |U1'A0| = {m1:.4} (need >= 0.95)"),
                m1 >= 0.95,
            ),
            check(
                format!("median max_(j>=3) |Uj'A0| = {m3:.4} (need < 0.05)"),
                m3 < 0.05,
            ),
        ],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ------------------------------------------------ shared default runs

/// Default-setting ensemble plus dimension estimate on one replicate.
fn default_run(data: &Dataset, method_seed: u64) -> DimensionRun {
    let cfg = RpeConfig::defaults(data.n(), data.p(), method_seed);
    let dim_seed = rng::derive_seed(method_seed, rng::purpose::DIMENSION, 0, 0);
    let dim = DimensionConfig::matching(&cfg, 10_000, dim_seed);
    rpe_with_dimension(data, &cfg, &dim).unwrap()
}

fn model_runs(model: ModelId, replicates: usize) -> Vec<DimensionRun> {
    (0..replicates)
        .map(|r| {
            let spec =
                SimModelSpec::new(model, 20, 200, seed(&format!("model-{model}-data"), r, 0));
            let (data, _) = generate(&spec).unwrap();
            let t = Instant::now();
            let run = default_run(&data, seed(&format!("model-{model}-method"), r, 0));
            eprintln!(
                "    model {model} replicate {r}: selected {} in {:.1}s",
                run.report.d0_hat,
                t.elapsed().as_secs_f64()
            );
            run
        })
        .collect()
}

fn noise_runs(replicates: usize) -> Vec<DimensionRun> {
    (0..replicates)
        .map(|r| {
            let mut s = rng::stream(MASTER, "noise-data", r as u64, 0);
            let x = gaussian_matrix(200, 20, &mut s);
            let y = DVector::from_fn(200, |_, _| s.sample::<f64, _>(StandardNormal));
            let data = Dataset::new(x, y).unwrap();
            let t = Instant::now();
            let run = default_run(&data, seed("noise-method", r, 0));
            eprintln!(
                "    pure noise replicate {r}: selected {} in {:.1}s",
                run.report.d0_hat,
                t.elapsed().as_secs_f64()
            );
            run
        })
        .collect()
}

/// (single-stage sin-theta, two-stage sin-theta) on Model 1a.
fn single_index_two_stage(replicates: usize) -> Vec<(f64, f64)> {
    (0..replicates)
        .map(|r| {
            let spec = SimModelSpec::new(ModelId::M1a, 20, 200, seed("model-1a-data", r, 0));
            let (data, truth) = generate(&spec).unwrap();
            let t = Instant::now();
            let res =
                double_rpe(&data, &DoubleConfig::new(1, seed("model-1a-method", r, 0))).unwrap();
            // the first stage is exactly a default single-stage run
            let single = res.stage1.run.output.directions.columns(0, 1).into_owned();
            let pair = (
                sin_theta(&single, &truth.a0).unwrap(),
                sin_theta(&res.estimate, &truth.a0).unwrap(),
            );
            eprintln!(
                "    model 1a replicate {r}: selected {}, single {:.3}, two-stage {:.3} in {:.1}s",
                res.selected_dim(),
                pair.0,
                pair.1,
                t.elapsed().as_secs_f64()
            );
            pair
        })
        .collect()
}

#[derive(Default)]
struct Shared {
    model2: Option<Vec<DimensionRun>>,
    model3: Option<Vec<DimensionRun>>,
    noise: Option<Vec<DimensionRun>>,
    model1a: Option<Vec<(f64, f64)>>,
}

impl Shared {
    fn model2(&mut self) -> &[DimensionRun] {
        self.model2
            .get_or_insert_with(|| model_runs(ModelId::M2, REPLICATES))
    }
    fn model3(&mut self) -> &[DimensionRun] {
        self.model3
            .get_or_insert_with(|| model_runs(ModelId::M3, REPLICATES))
    }
    fn noise(&mut self) -> &[DimensionRun] {
        self.noise.get_or_insert_with(|| noise_runs(REPLICATES))
    }
    fn model1a(&mut self) -> &[(f64, f64)] {
        self.model1a
            .get_or_insert_with(|| single_index_two_stage(REPLICATES))
    }
}

// ---------------------------------------------------------------- 2

fn signal_recovery(shared: &mut Shared) -> Outcome {
    let start = Instant::now();
    let e3 = unit(20, 2);
    let m2: Vec<f64> = shared.model2()[..10]
        .iter()
        .map(|r| abs_dot(&r.run.output.directions, 0, &e3))
        .collect();
    let (e6, e7) = (unit(20, 5), unit(20, 6));
    let m3: Vec<f64> = shared.model3()[..10]
        .iter()
        .map(|r| {
            let u = &r.run.output.directions;
            abs_dot(u, 0, &e6).min(abs_dot(u, 1, &e7))
        })
        .collect();
    let (a, b) = (median(m2), median(m3));
    Outcome {
        id: "2",
        title: "signal recovery with default settings, 10 replicates each",
        checks: vec![
            check(
                format!("model 2 median |U1'e3| = {a:.4} (need >= 0.99)"),
                a >= 0.99,
            ),
            check(
                format!("model 3 median min(|U1'e6|, |U2'e7|) = {b:.4} (need >= 0.95)"),
                b >= 0.95,
            ),
        ],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------- 3

fn average_sin_theta(shared: &mut Shared) -> Outcome {
    let start = Instant::now();
    let a0 = ModelId::M3.true_basis(20);
    let m3: Vec<f64> = shared
        .model3()
        .iter()
        .map(|r| {
            let u = r.run.output.directions.columns(0, 2).into_owned();
            sin_theta(&u, &a0).unwrap()
        })
        .collect();
    let m3_mean = mean(&m3);
    let pairs = shared.model1a();
    let single = mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let double = mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    Outcome {
        id: "3",
        title: "average sin-theta distance over 20 replicates, p=20, n=200",
        checks: vec![
            check(
                format!("model 3 single-stage mean = {m3_mean:.4} (need <= 0.20)"),
                m3_mean <= 0.20,
            ),
            check(
                format!("model 1a two-stage mean = {double:.4} (need <= 0.12)"),
                double <= 0.12,
            ),
            check(
                format!("model 1a two-stage {double:.4} < single-stage {single:.4}"),
                double < single,
            ),
        ],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------- 4

fn dimension_selection(shared: &mut Shared) -> Outcome {
    let start = Instant::now();
    let rate = |runs: &[DimensionRun], target: usize| {
        let hits = runs.iter().filter(|r| r.report.d0_hat == target).count();
        (
            fraction(hits, runs.len()),
            runs.iter().map(|r| r.report.d0_hat).collect::<Vec<_>>(),
        )
    };
    let (r3, d3) = rate(shared.model3(), 2);
    let (r2, d2) = rate(shared.model2(), 1);
    let (r0, d0) = rate(shared.noise(), 0);
    Outcome {
        id: "4",
        title: "dimension selection rate over 20 replicates, p=20, n=200",
        checks: vec![
            check(
                format!(
                    "model 3 selects 2 in {:.0}% {d3:?} (need >= 70%)",
                    100.0 * r3
                ),
                r3 >= 0.7,
            ),
            check(
                format!(
                    "model 2 selects 1 in {:.0}% {d2:?} (need >= 70%)",
                    100.0 * r2
                ),
                r2 >= 0.7,
            ),
            check(
                format!(
                    "pure noise selects 0 in {:.0}% {d0:?} (need >= 70%)",
                    100.0 * r0
                ),
                r0 >= 0.7,
            ),
        ],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------- 5

fn aggregate_of(run: &RpeRun) -> DMatrix<f64> {
    aggregate(&run.winners).unwrap()
}

fn convergence_rate() -> Outcome {
    let start = Instant::now();
    let spec = SimModelSpec::new(ModelId::M3, 20, 200, seed("rate-data", 0, 0));
    let (data, _) = generate(&spec).unwrap();
    let cfg = |groups: usize, s: u64| RpeConfig {
        groups,
        group_size: 50,
        regressor: RegressorSpec::new(RegressorKind::QuadraticLs),
        ..RpeConfig::defaults(200, 20, s)
    };
    let reference =
        aggregate_of(&rpe_fit(&data, &cfg(20_000, seed("rate-reference", 0, 0))).unwrap());
    let sizes = [25usize, 100, 400, 1600];
    let mut medians = Vec::new();
    for &l in &sizes {
        let errs: Vec<f64> = (0..50)
            .map(|r| {
                let run = rpe_fit(&data, &cfg(l, seed("rate-replicate", l, r))).unwrap();
                op_norm(&(aggregate_of(&run) - &reference))
            })
            .collect();
        medians.push(median(errs));
    }
    let xs: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let shown: Vec<String> = sizes
        .iter()
        .zip(&medians)
        .map(|(l, m)| format!("L={l}: {m:.4}"))
        .collect();
    Outcome {
        id: "5",
        title: "operator-norm error against a 20000-group reference, quadratic base, M=50",
        checks: vec![
            check(format!("median errors {}", shown.join(", ")), true),
            check(
                format!("log-log slope = {slope:.3} (need within [-0.65, -0.35])"),
                (-0.65..=-0.35).contains(&slope),
            ),
        ],
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------- 6

fn tail_bound() -> Outcome {
    let start = Instant::now();
    let (p, d, reps) = (5usize, 2usize, 500usize);
    let mut s = rng::stream(MASTER, "tail-data", 0, 0);
    let x = gaussian_matrix(30, p, &mut s);
    let y = DVector::from_fn(30, |_, _| s.sample::<f64, _>(StandardNormal));
    let data = Dataset::new(x, y).unwrap();
    let limit = DMatrix::<f64>::identity(p, p) * (d as f64 / p as f64);
    let deviations = |groups: usize| -> Vec<f64> {
        (0..reps)
            .map(|r| {
                // one candidate per group: no selection takes place
                let cfg = RpeConfig {
                    proj_dim: d,
                    groups,
                    group_size: 1,
                    dist: DistKind::Gaussian,
                    regressor: RegressorSpec::new(RegressorKind::QuadraticLs),
                    ..RpeConfig::defaults(30, p, seed("tail-replicate", groups, r))
                };
                op_norm(&(aggregate_of(&rpe_fit(&data, &cfg).unwrap()) - &limit))
            })
            .collect()
    };
    let dev50 = deviations(50);
    let dev200 = deviations(200);
    let mut checks = Vec::new();
    for (l, t, devs) in [(50, 0.5, &dev50), (50, 1.0, &dev50), (200, 0.5, &dev200)] {
        let freq = fraction(devs.iter().filter(|&&v| v >= t).count(), reps);
        let bound = p as f64 * (-t * t * l as f64 / 8.0).exp();
        checks.push(check(
            format!("L={l}, t={t}: frequency {freq:.4} <= bound {bound:.4}"),
            freq <= bound,
        ));
    }
    Outcome {
        id: "6",
        title: "deviation tail bound, p=5, d=2, Gaussian projections, 500 replicates",
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

// ---------------------------------------------------------------- 7

fn random_basis(p: usize, k: usize, s: &mut rng::Stream) -> DMatrix<f64> {
    gaussian_matrix(p, k, s).qr().q()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn properties() -> Outcome {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut s = rng::stream(MASTER, "properties", 0, 0);

    // output invariants on real runs with every distribution
    let spec = SimModelSpec::new(ModelId::M3, 12, 120, seed("properties-data", 0, 0));
    let (data, _) = generate(&spec).unwrap();
    let mut worst = [0.0f64; 3];
    let mut monotone = true;
    for (i, dist) in [
        DistKind::Gaussian,
        DistKind::Cauchy,
        DistKind::DEFAULT_MIXTURE,
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = RpeConfig {
            groups: 60,
            group_size: 30,
            dist,
            regressor: RegressorSpec::new(RegressorKind::QuadraticLs),
            ..RpeConfig::defaults(120, 12, seed("properties-method", i, 0))
        };
        let run = rpe_fit(&data, &cfg).unwrap();
        for w in &run.winners {
            for col in w.entries().column_iter() {
                worst[0] = worst[0].max((col.norm() - 1.0).abs());
            }
        }
        let out = &run.output;
        worst[1] = worst[1].max((out.weights.sum() - cfg.proj_dim as f64).abs());
        let gram = out.directions.transpose() * &out.directions;
        worst[2] = worst[2].max((gram - DMatrix::<f64>::identity(12, 12)).amax());
        monotone &= out.weights.as_slice().windows(2).all(|w| w[0] >= w[1]);
    }
    checks.push(check(
        format!("unit projection columns (max error {:.1e})", worst[0]),
        worst[0] <= 1e-12,
    ));
    checks.push(check(
        format!("trace of D equals d (max error {:.1e})", worst[1]),
        worst[1] <= 1e-9,
    ));
    checks.push(check(
        format!("U orthonormal (max error {:.1e})", worst[2]),
        worst[2] <= 1e-10,
    ));
    checks.push(check("D nonincreasing", monotone));

    // least squares against the normal equations
    let mut ls_err = 0.0f64;
    for _ in 0..50 {
        let (m, k) = (40, 8);
        let x = gaussian_matrix(m, k, &mut s);
        let y = DVector::from_fn(m, |_, _| s.sample::<f64, _>(StandardNormal));
        let oracle = (x.transpose() * &x)
            .cholesky()
            .unwrap()
            .solve(&(x.transpose() * &y));
        ls_err = ls_err.max((min_norm_lstsq(&x, &y).unwrap() - oracle).amax());
        let z = gaussian_matrix(m, 2, &mut s);
        let design = DMatrix::from_fn(m, 6, |i, j| {
            let (a, b) = (z[(i, 0)], z[(i, 1)]);
            [1.0, a, b, a * a, a * b, b * b][j]
        });
        let oracle = (design.transpose() * &design)
            .cholesky()
            .unwrap()
            .solve(&(design.transpose() * &y));
        let fit = QuadraticFit::fit(&z, &y).unwrap();
        let got = [
            fit.constant,
            fit.linear[0],
            fit.linear[1],
            fit.upper[0],
            2.0 * fit.upper[1],
            fit.upper[2],
        ];
        for (g, o) in got.iter().zip(oracle.iter()) {
            ls_err = ls_err.max((g - o).abs());
        }
    }
    checks.push(check(
        format!("least squares matches normal equations (max error {ls_err:.1e})"),
        ls_err <= 1e-8,
    ));

    // subspace metric identities
    let (mut rot_err, mut fp_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (p, k) = (9, 3);
        let a = random_basis(p, k, &mut s);
        let b = random_basis(p, k, &mut s);
        let rot = random_basis(k, k, &mut s);
        rot_err = rot_err.max(sin_theta(&a, &(&a * rot)).unwrap());
        let fp = d_fp(&b, &a).unwrap();
        let overlap = (a.transpose() * &b).norm_squared();
        fp_err = fp_err.max((fp * fp - (k as f64 - overlap)).abs());
    }
    checks.push(check(
        format!("sin-theta basis invariance (max {rot_err:.1e})"),
        rot_err <= 1e-10,
    ));
    checks.push(check(
        format!("d_fp^2 = k - |A0'A|_F^2 (max error {fp_err:.1e})"),
        fp_err <= 1e-10,
    ));

    // bitwise determinism under different pool sizes
    let cfg = RpeConfig {
        groups: 40,
        group_size: 20,
        ..RpeConfig::defaults(120, 12, seed("properties-threads", 0, 0))
    };
    let one = in_pool(1, || rpe_fit(&data, &cfg).unwrap());
    let eight = in_pool(8, || rpe_fit(&data, &cfg).unwrap());
    let same = one.output.directions == eight.output.directions
        && one.output.weights == eight.output.weights
        && one.traces == eight.traces;
    let null_cfg = DimensionConfig::matching(&cfg, 300, seed("properties-null", 0, 0));
    let null_one = in_pool(1, || null_samples(12, &null_cfg).unwrap());
    let null_eight = in_pool(8, || null_samples(12, &null_cfg).unwrap());
    let fast = RpeOverrides {
        groups: Some(10),
        group_size: Some(10),
        regressor: Some(RegressorSpec::new(RegressorKind::QuadraticLs)),
        ..RpeOverrides::default()
    };
    let grid = ExperimentGrid {
        models: vec![ModelSetting {
            model: ModelId::M2,
            p: 6,
            n: 60,
        }],
        variants: vec![
            Variant::new("RPE", VariantKind::Rpe).with_overrides(fast),
            Variant::new("RPE2", VariantKind::Rpe2)
                .with_overrides(fast)
                .with_resamples(100),
        ],
        replicates: 3,
        master_seed: MASTER,
    };
    let g1 = harness::run_grid(&grid, 1).unwrap();
    let g8 = harness::run_grid(&grid, 8).unwrap();
    let grid_same = g1.len() == g8.len() && g1.iter().zip(&g8).all(|(a, b)| a.same_outcome(b));
    checks.push(check(
        "identical results with 1 and 8 worker threads (ensemble, null sample, grid)",
        same && null_one == null_eight && grid_same,
    ));

    // dimension selection edge cases
    let spike: Vec<f64> = (0..20).map(|j| if j == 0 { 5.0 } else { 0.0 }).collect();
    let spike_cfg = DimensionConfig {
        proj_dim: 5,
        dist: DistKind::DEFAULT_MIXTURE,
        groups: 200,
        resamples: 500,
        seed: seed("properties-spike", 0, 0),
    };
    let spike_dim = report_against(&spike, &null_samples(20, &spike_cfg).unwrap()).d0_hat;
    let empty_dim = select_dimension(&[]);
    let low_first = select_dimension(&[0.5, 0.9, 1.0]);
    checks.push(check(
        format!("D = (d, 0, ..., 0) selects {spike_dim}; no exceedance above one half selects {empty_dim}, {low_first}"),
        spike_dim == 1 && empty_dim == 0 && low_first == 0,
    ));

    // the full-size grid is available behind its own switch
    let full = ExperimentGrid::preset(Preset::Full, 0);
    let ps: BTreeSet<usize> = full.models.iter().map(|m| m.p).collect();
    let ns: BTreeSet<usize> = full.models.iter().map(|m| m.n).collect();
    checks.push(check(
        format!(
            "full grid preset covers p {ps:?}, n {ns:?}, {} replicates",
            full.replicates
        ),
        ps.contains(&100) && ns.contains(&500) && full.replicates == 100,
    ));

    Outcome {
        id: "7",
        title: "property suite",
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

type Criterion = fn(&mut Shared) -> Outcome;

fn main() {
    let wanted: BTreeSet<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let run = |id: &str| wanted.is_empty() || wanted.contains(id);
    let mut shared = Shared::default();
    let mut outcomes = Vec::new();

    let criteria: [(&str, Criterion); 7] = [
        ("7", |_| properties()),
        ("6", |_| tail_bound()),
        ("1", |_| single_index_recovery()),
        ("5", |_| convergence_rate()),
        ("2", signal_recovery),
        ("3", average_sin_theta),
        ("4", dimension_selection),
    ];
    for (id, f) in criteria {
        if !run(id) {
            continue;
        }
        eprintln!("criterion {id} running");
        let outcome = f(&mut shared);
        for c in &outcome.checks {
            eprintln!("    [{}] {}", if c.pass { "ok" } else { "no" }, c.label);
        }
        outcomes.push(outcome);
    }
    outcomes.sort_by_key(|o| o.id);

    println!();
    println!("acceptance results");
    for o in &outcomes {
        let details: Vec<&str> = o.checks.iter().map(|c| c.label.as_str()).collect();
        println!(
            "{} criterion {}: {} [{:.0}s] {}",
            if o.pass() { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.seconds,
            details.join("; ")
        );
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass())
        .map(|o| o.id)
        .collect();
    println!(
        "{} of {} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !failed.is_empty() {
        println!("failing criteria: {}", failed.join(", "));
        if std::env::var_os("ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
