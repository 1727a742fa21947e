//! The acceptance suite: ten numerical checks of the solvers, the tuning
//! procedure, the bounds and the harness itself.
//!
//! Each check draws everything from `derive_seed(seed, [id])` and returns its
//! verdict plus CSV/JSON artifacts. Artifacts never contain timings, so two
//! runs from one seed produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bayes::{check_map_equals_bayes, GaussianPriorModel};
use crate::bounds::{
    eval_bound, enumerate_task_level, khintchine_check, loss_table, measure_bound_inputs, rademacher_estimate,
    MeasureOptions, TheoremId,
};
use crate::error::{Error, Result};
use crate::estimators::{
    lasso_path, prox_oracle, solve_elastic_net, solve_recentered_ridge, solve_ridge, ProxOptions,
};
use crate::experiment::{
    dimension_independence_study, lambda_dt_scaling_study, result_csv, run_sweep, Axis, DimensionStudySpec,
    ExperimentResult, LambdaStudySpec, NSweep, SweepSpec, TSweep,
};
use crate::linalg::{Matrix, Vector};
use crate::rng::{derive_seed, substream, Tag};
use crate::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use crate::tuning::{oracle_lambda_star, tune_erm, Family, LossSpec, OracleOptions, SearchSpec};

/// Identifier, short name and wall-clock budget of each criterion.
pub const CRITERIA: [(u32, &str, u64); 10] = [
    (1, "solver_cross_validation", 30),
    (2, "path_exactness", 30),
    (3, "bayes_equivalence", 5),
    (4, "erm_consistency", 300),
    (5, "t_rate", 900),
    (6, "lambda_dt_scaling", 600),
    (7, "dimension_independence", 1200),
    (8, "bound_validity", 600),
    (9, "rademacher_sanity", 120),
    (10, "determinism", 0),
];

/// Verdict of one criterion, as written to `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub measured: String,
    pub threshold: String,
}

/// A finished criterion with its artifacts and timing. The timing is kept
/// out of every file.
#[derive(Debug, Clone)]
pub struct CriterionRun {
    pub outcome: CriterionOutcome,
    /// `(file name, contents)`.
    pub artifacts: Vec<(String, String)>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionRun {
    pub fn within_budget(&self) -> bool {
        self.budget.is_zero() || self.elapsed <= self.budget
    }
}

fn name_of(id: u32) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1)
}

fn budget_of(id: u32) -> Duration {
    Duration::from_secs(CRITERIA.iter().find(|c| c.0 == id).map_or(0, |c| c.2))
}

fn table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn experiment_artifacts(stem: &str, r: &ExperimentResult) -> Result<Vec<(String, String)>> {
    Ok(vec![(format!("{stem}.csv"), result_csv(r)?), (format!("{stem}.json"), json(r)?)])
}

struct Verdict {
    passed: bool,
    measured: String,
    threshold: String,
    artifacts: Vec<(String, String)>,
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Task with a planted signal on every third coordinate and unit noise.
fn planted_task(rng: &mut ChaCha8Rng, d: usize, n: usize) -> (Matrix, Vector) {
    let x = gaussian_matrix(rng, d, n);
    let w = Vector::from_fn(d, |j, _| if j % 3 == 0 { 1.0 + j as f64 / d as f64 } else { 0.0 });
    let y = x.tr_mul(&w) + gaussian_vector(rng, n);
    (x, y)
}

fn trace_scale(x: &Matrix) -> f64 {
    x.norm_squared() / x.nrows() as f64
}

fn c1_solvers(seed: u64) -> Result<Verdict> {
    const TOL: f64 = 1e-6;
    let prox = ProxOptions {
        max_iters: 2_000_000,
        tol: 1e-11,
    };
    let mut rows = Vec::new();
    let (mut worst_diff, mut worst_kkt) = (0.0_f64, 0.0_f64);
    for i in 0..200u64 {
        let mut rng = substream(seed, i, Tag::Extra);
        let kind = i % 4;
        let d = rng.random_range(1..=30usize);
        // LASSO needs a well-conditioned design for a unique solution.
        let n = if kind == 2 {
            rng.random_range(2 * d..=100)
        } else {
            rng.random_range(1..=100)
        };
        let (x, y) = planted_task(&mut rng, d, n);
        let s = trace_scale(&x).max(1e-3);
        let lambda_max = 2.0 * (&x * &y).amax();
        let (family, solver, reference, kkt) = match kind {
            0 => {
                let lam = s * log_uniform(&mut rng, 1e-2, 1e1);
                let w = solve_ridge(&x, &y, lam)?;
                ("ridge", w.weights(), prox_oracle(&x, &y, 0.0, lam, None, prox)?, None)
            }
            1 => {
                let lam = s * log_uniform(&mut rng, 1e-2, 1e1);
                let mu = gaussian_vector(&mut rng, d);
                let w = solve_recentered_ridge(&x, &y, lam, &mu)?;
                ("recentered_ridge", w.weights(), prox_oracle(&x, &y, 0.0, lam, Some(&mu), prox)?, None)
            }
            2 => {
                let l1 = lambda_max * rng.random_range(0.02..0.9);
                let w = solve_elastic_net(&x, &y, l1, 0.0)?;
                ("lasso", w.weights(), prox_oracle(&x, &y, l1, 0.0, None, prox)?, Some(w.kkt_residual))
            }
            _ => {
                let l1 = lambda_max * rng.random_range(0.02..0.9);
                let l2 = s * log_uniform(&mut rng, 1e-2, 1e1);
                let w = solve_elastic_net(&x, &y, l1, l2)?;
                ("elastic_net", w.weights(), prox_oracle(&x, &y, l1, l2, None, prox)?, Some(w.kkt_residual))
            }
        };
        let diff = (solver - reference).amax();
        worst_diff = worst_diff.max(diff);
        worst_kkt = worst_kkt.max(kkt.unwrap_or(0.0));
        rows.push(vec![
            i.to_string(),
            family.into(),
            d.to_string(),
            n.to_string(),
            diff.to_string(),
            kkt.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    Ok(Verdict {
        passed: worst_diff <= TOL && worst_kkt <= TOL,
        measured: format!("max |w - w_prox|_inf = {worst_diff:.3e}, max kkt = {worst_kkt:.3e}"),
        threshold: format!("both <= {TOL:e}"),
        artifacts: vec![(
            "instances.csv".into(),
            table(&["instance", "family", "d", "n", "max_abs_diff", "kkt_residual"], &rows)?,
        )],
    })
}

fn c2_path(seed: u64) -> Result<Verdict> {
    const TOL: f64 = 1e-8;
    let mut rows = Vec::new();
    let (mut worst_mid, mut worst_jump) = (0.0_f64, 0.0_f64);
    let mut all_covered = true;
    for i in 0..50u64 {
        let mut rng = substream(seed, i, Tag::Extra);
        let d = rng.random_range(2..=20usize);
        let lambda2 = if i % 2 == 0 { 0.0 } else { log_uniform(&mut rng, 1e-2, 1e1) };
        let n = if lambda2 == 0.0 {
            rng.random_range(d + 5..=80)
        } else {
            rng.random_range(2..=80)
        };
        let (x, y) = planted_task(&mut rng, d, n);
        let lambda_max = 2.0 * (&x * &y).amax();
        let (lo, hi) = (1e-3 * lambda_max, 1.1 * lambda_max);
        let path = lasso_path(&x, &y, lambda2, lo, hi)?;

        let mut mid_err = 0.0_f64;
        for seg in &path {
            let mid = 0.5 * (seg.lambda_lo + seg.lambda_hi);
            let point = solve_elastic_net(&x, &y, mid, lambda2)?.weights();
            mid_err = mid_err.max((seg.weights_at(mid) - point).amax());
        }
        let mut jump = 0.0_f64;
        let mut covered = path.first().map(|s| s.lambda_lo) == Some(lo) && path.last().map(|s| s.lambda_hi) == Some(hi);
        for w in path.windows(2) {
            covered &= w[0].lambda_hi == w[1].lambda_lo;
            let b = w[0].lambda_hi;
            jump = jump.max((w[0].weights_at(b) - w[1].weights_at(b)).amax());
        }
        worst_mid = worst_mid.max(mid_err);
        worst_jump = worst_jump.max(jump);
        all_covered &= covered;
        rows.push(vec![
            i.to_string(),
            d.to_string(),
            n.to_string(),
            lambda2.to_string(),
            path.len().to_string(),
            mid_err.to_string(),
            jump.to_string(),
            covered.to_string(),
        ]);
    }
    Ok(Verdict {
        passed: worst_mid <= TOL && worst_jump <= TOL && all_covered,
        measured: format!("midpoint error {worst_mid:.3e}, breakpoint jump {worst_jump:.3e}, covered = {all_covered}"),
        threshold: format!("both <= {TOL:e} and full coverage"),
        artifacts: vec![(
            "paths.csv".into(),
            table(
                &["instance", "d", "n", "lambda2", "segments", "midpoint_error", "breakpoint_jump", "covered"],
                &rows,
            )?,
        )],
    })
}

fn c3_bayes(seed: u64) -> Result<Verdict> {
    const TOL: f64 = 1e-10;
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for i in 0..100u64 {
        let mut rng = substream(seed, i, Tag::Extra);
        let d = rng.random_range(1..=20usize);
        let n = rng.random_range(1..=50usize);
        let model = GaussianPriorModel {
            mu_star: gaussian_vector(&mut rng, d).iter().copied().collect(),
            omega: log_uniform(&mut rng, 0.3, 3.0),
            sigma_noise: log_uniform(&mut rng, 0.3, 3.0),
        };
        let x = gaussian_matrix(&mut rng, d, n);
        let w = model.mu() + model.omega * gaussian_vector(&mut rng, d);
        let y = x.tr_mul(&w) + model.sigma_noise * gaussian_vector(&mut rng, n);
        let check = check_map_equals_bayes(&x, &y, &model, TOL)?;
        worst = worst.max(check.max_diff);
        rows.push(vec![
            i.to_string(),
            d.to_string(),
            n.to_string(),
            model.ridge_lambda().to_string(),
            check.max_diff.to_string(),
        ]);
    }
    Ok(Verdict {
        passed: worst <= TOL,
        measured: format!("max |posterior mean - ridge|_inf = {worst:.3e}"),
        threshold: format!("<= {TOL:e}"),
        artifacts: vec![(
            "instances.csv".into(),
            table(&["instance", "d", "n", "lambda", "max_abs_diff"], &rows)?,
        )],
    })
}

/// Gaussian inputs, trace-normalized Gaussian prior and Gaussian noise.
fn gaussian_generator(family: InputFamily, d: usize, sigma_w: f64, sigma_noise: f64) -> Generator {
    let mut prior = PriorSpec::gaussian(sigma_w);
    prior.trace_normalized = true;
    Generator {
        input: InputDist::new(family, 1.0, d),
        prior,
        noise: NoiseSpec::gaussian(sigma_noise),
    }
}

fn c4_erm(seed: u64) -> Result<Verdict> {
    const TARGET: f64 = 2.0;
    const TOL: f64 = 0.25;
    const REPLICATES: u64 = 20;
    // Coordinate variance ω² = 1/5 and σ² = 0.4 put λ* at σ²/ω² = 2.
    let gen = gaussian_generator(InputFamily::GaussianEntries, 5, 1.0, 0.4_f64.sqrt());
    let mut rows = Vec::new();
    let mut hits = 0;
    for r in 0..REPLICATES {
        let inst = sample_instance(&gen, 2000, 50, 20, derive_seed(seed, &[Tag::Replicate as u64, r]))?;
        let tuned = tune_erm(&inst, &Family::Ridge, &SearchSpec::default_ridge(), &LossSpec::Squared)?;
        let lam = tuned.lambda_erm.lambda;
        let hit = (lam - TARGET).abs() <= TOL;
        hits += hit as usize;
        rows.push(vec![r.to_string(), lam.to_string(), hit.to_string()]);
    }
    let needed = (0.9 * REPLICATES as f64).ceil() as usize;
    Ok(Verdict {
        passed: hits >= needed,
        measured: format!("{hits}/{REPLICATES} replicates with |lambda_erm - 2| <= {TOL}"),
        threshold: format!(">= {needed}/{REPLICATES}"),
        artifacts: vec![(
            "replicates.csv".into(),
            table(&["replicate", "lambda_erm", "within_tolerance"], &rows)?,
        )],
    })
}

fn c5_t_rate(seed: u64) -> Result<Verdict> {
    const RANGE: (f64, f64) = (-0.65, -0.35);
    let spec = SweepSpec {
        axis: Axis::T,
        grid: vec![25, 100, 400, 1600],
        t: 25,
        d: 8,
        n: 48,
        n_v: 10,
        generator: gaussian_generator(InputFamily::UniformEntries, 8, 1.0, 0.5),
        family: Family::Ridge,
        search: SearchSpec::default_ridge(),
        loss: LossSpec::Squared,
        replicates: 200,
        seed,
        oracle_tasks: OracleOptions::default().t_oracle,
        n_rule: None,
        min_n_over_d: None,
        bound: None,
        delta: 0.05,
        injected: None,
    };
    let mut r = run_sweep(&spec)?;
    r.label = "excess_risk_vs_t".into();
    let fit = r.fit.ok_or_else(|| Error::InvalidInput("T sweep produced no slope fit".into()))?;
    Ok(Verdict {
        passed: fit.slope >= RANGE.0 && fit.slope <= RANGE.1,
        measured: format!("slope {:.3} (95% CI [{:.3}, {:.3}])", fit.slope, fit.ci.0, fit.ci.1),
        threshold: format!("slope in [{}, {}]", RANGE.0, RANGE.1),
        artifacts: experiment_artifacts("excess_risk_vs_t", &r)?,
    })
}

fn c6_lambda_dt(seed: u64) -> Result<Verdict> {
    const N_RANGE: (f64, f64) = (-1.3, -0.7);
    const T_RANGE: (f64, f64) = (0.3, 0.7);
    let spec = LambdaStudySpec {
        generator: gaussian_generator(InputFamily::GaussianEntries, 4, 1.0, 0.5),
        d_sweep: None,
        n_sweep: Some(NSweep {
            d: 6,
            grid: vec![96, 192, 384, 768],
            t: 1,
        }),
        t_sweep: Some(TSweep {
            d: 4,
            n: 24,
            grid: vec![1, 4, 16, 64, 256],
        }),
        mc_reps: 2000,
        seed,
    };
    let results = lambda_dt_scaling_study(&spec)?;
    let slope = |label: &str| -> Result<f64> {
        results
            .iter()
            .find(|r| r.label == label)
            .and_then(|r| r.fit)
            .map(|f| f.slope)
            .ok_or_else(|| Error::InvalidInput(format!("missing fit for {label}")))
    };
    let (sn, st) = (slope("lambda_dt_vs_n")?, slope("lambda_dt_vs_t")?);
    let inside = |v: f64, r: (f64, f64)| v >= r.0 && v <= r.1;
    let mut artifacts = Vec::new();
    for r in &results {
        artifacts.extend(experiment_artifacts(&r.label, r)?);
    }
    Ok(Verdict {
        passed: inside(sn, N_RANGE) && inside(st, T_RANGE),
        measured: format!("n exponent {sn:.3}, T exponent {st:.3}"),
        threshold: format!(
            "n exponent in [{}, {}], T exponent in [{}, {}]",
            N_RANGE.0, N_RANGE.1, T_RANGE.0, T_RANGE.1
        ),
        artifacts,
    })
}

fn c7_dimension(seed: u64) -> Result<Verdict> {
    const MAX_RATIO: f64 = 1.5;
    let spec = DimensionStudySpec {
        d_grid: vec![10, 20, 40],
        generator: gaussian_generator(InputFamily::GaussianEntries, 10, 1.0, 0.5),
        search: SearchSpec::default_path(vec![0.1, 1.0, 10.0]),
        t: 400,
        n_v: 10,
        n_rule_c: 8.0,
        loss: LossSpec::Squared,
        replicates: 40,
        oracle_tasks: 4000,
        seed,
        injected: None,
    };
    let study = dimension_independence_study(&spec)?;
    let mut artifacts = experiment_artifacts("excess_risk_vs_d", &study.result)?;
    artifacts.push(("study.json".into(), json(&study)?));
    Ok(Verdict {
        passed: study.ratio <= MAX_RATIO,
        measured: format!(
            "ratio d=40 / d=10 = {:.3} (reference sqrt(d) ratio {:.3})",
            study.ratio, study.reference_ratio
        ),
        threshold: format!("<= {MAX_RATIO}"),
        artifacts,
    })
}

fn c8_bound(seed: u64) -> Result<Verdict> {
    const TRIALS: u64 = 500;
    const DELTA: f64 = 0.05;
    const MC_REPS: usize = 200;
    let (t, n, n_v, d) = (50, 24, 10, 4);
    let theorem = TheoremId::RidgeWellSpecified;
    let gen = gaussian_generator(InputFamily::GaussianEntries, d, 1.0, 0.5);
    let loss = LossSpec::Squared;
    let oracle = oracle_lambda_star(
        &gen,
        &Family::Ridge,
        &SearchSpec::default_ridge(),
        &loss,
        n,
        n_v,
        OracleOptions {
            t_oracle: OracleOptions::default().t_oracle,
            seed,
        },
    )?;
    let mut rows = Vec::new();
    let mut covered = 0;
    for k in 0..TRIALS {
        let inst = sample_instance(&gen, t, n, n_v, derive_seed(seed, &[Tag::Replicate as u64, k]))?;
        let tuned = tune_erm(&inst, &Family::Ridge, &oracle.search, &loss)?;
        let gap = oracle.value(tuned.lambda_erm)? - oracle.lv_star;
        let opts = MeasureOptions::new(DELTA, MC_REPS, derive_seed(seed, &[Tag::MonteCarlo as u64, k]));
        let inputs = measure_bound_inputs(&inst, &gen, theorem, &loss, &opts)?;
        let report = eval_bound(theorem, &inputs)?;
        let ok = report.total >= gap;
        covered += ok as usize;
        rows.push(vec![
            k.to_string(),
            tuned.lambda_erm.lambda.to_string(),
            gap.to_string(),
            report.total.to_string(),
            ok.to_string(),
        ]);
    }
    let needed = (0.99 * TRIALS as f64).ceil() as usize;
    Ok(Verdict {
        passed: covered >= needed,
        measured: format!("bound >= observed gap in {covered}/{TRIALS} trials"),
        threshold: format!(">= {needed}/{TRIALS}"),
        artifacts: vec![(
            "trials.csv".into(),
            table(&["trial", "lambda_erm", "excess_risk", "bound_total", "covered"], &rows)?,
        )],
    })
}

fn c9_rademacher(seed: u64) -> Result<Verdict> {
    const MAX_Z: f64 = 3.0;
    const SIGN_SAMPLES: usize = 4000;
    let gen = gaussian_generator(InputFamily::GaussianEntries, 3, 1.0, 0.5);
    let search = SearchSpec::LogGrid {
        lo: 1e-2,
        hi: 1e3,
        points: 24,
        refine: false,
    };
    let loss = LossSpec::Squared;
    let mut rows = Vec::new();
    let (mut worst_z, mut khintchine_ok) = (0.0_f64, true);
    for (i, &t) in [4usize, 6, 8, 10, 12].iter().enumerate() {
        let inst = sample_instance(&gen, t, 12, 5, derive_seed(seed, &[Tag::Replicate as u64, i as u64]))?;
        let losses = loss_table(&inst, &Family::Ridge, &search, &loss)?;
        let exact = enumerate_task_level(&losses)?;
        let est = rademacher_estimate(
            &inst,
            &Family::Ridge,
            &search,
            &loss,
            SIGN_SAMPLES,
            derive_seed(seed, &[Tag::Signs as u64, i as u64]),
        )?;
        let se = est.task_level.se;
        let z = if se > 0.0 {
            (est.task_level.mean - exact).abs() / se
        } else if est.task_level.mean == exact {
            0.0
        } else {
            f64::INFINITY
        };
        let mut holds = true;
        let mut worst_ratio = 0.0_f64;
        for row in &losses.per_task {
            let k = khintchine_check(row)?;
            holds &= k.holds;
            worst_ratio = worst_ratio.max(k.lhs / k.rhs);
        }
        worst_z = worst_z.max(z);
        khintchine_ok &= holds;
        rows.push(vec![
            t.to_string(),
            exact.to_string(),
            est.task_level.mean.to_string(),
            se.to_string(),
            z.to_string(),
            worst_ratio.to_string(),
            holds.to_string(),
        ]);
    }
    Ok(Verdict {
        passed: worst_z <= MAX_Z && khintchine_ok,
        measured: format!("max |estimate - exact| / se = {worst_z:.3}, khintchine holds = {khintchine_ok}"),
        threshold: format!("<= {MAX_Z} and khintchine holds on every grid point"),
        artifacts: vec![(
            "instances.csv".into(),
            table(
                &["T", "exact", "estimate", "se", "z", "max_khintchine_ratio", "khintchine_holds"],
                &rows,
            )?,
        )],
    })
}

/// Runs criterion `id` (1 to 9).
pub fn run_criterion(id: u32, seed: u64) -> Result<CriterionRun> {
    let s = derive_seed(seed, &[id as u64]);
    let start = Instant::now();
    let v = match id {
        1 => c1_solvers(s),
        2 => c2_path(s),
        3 => c3_bayes(s),
        4 => c4_erm(s),
        5 => c5_t_rate(s),
        6 => c6_lambda_dt(s),
        7 => c7_dimension(s),
        8 => c8_bound(s),
        9 => c9_rademacher(s),
        _ => return Err(Error::InvalidInput(format!("no runnable criterion {id}"))),
    }?;
    let elapsed = start.elapsed();
    Ok(CriterionRun {
        outcome: CriterionOutcome {
            id,
            name: name_of(id).into(),
            passed: v.passed,
            measured: v.measured,
            threshold: v.threshold,
        },
        artifacts: v.artifacts,
        elapsed,
        budget: budget_of(id),
    })
}

fn criterion_dir(out: &Path, id: u32) -> PathBuf {
    out.join(format!("c{id:02}_{}", name_of(id)))
}

fn summary_csv(outcomes: &[CriterionOutcome]) -> Result<String> {
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            vec![
                o.id.to_string(),
                o.name.clone(),
                o.passed.to_string(),
                o.measured.clone(),
                o.threshold.clone(),
            ]
        })
        .collect();
    table(&["id", "name", "passed", "measured", "threshold"], &rows)
}

/// Runs criteria 1 to 9 and writes each one's artifacts under
/// `out/cNN_<name>/`, plus `summary.csv` and `summary.json`.
pub fn run_suite(seed: u64, out: &Path, progress: &dyn Fn(&CriterionRun)) -> Result<Vec<CriterionRun>> {
    fs::create_dir_all(out)?;
    let mut runs = Vec::new();
    for id in 1..=9 {
        let run = run_criterion(id, seed)?;
        write_run(&run, out)?;
        progress(&run);
        runs.push(run);
    }
    let outcomes: Vec<CriterionOutcome> = runs.iter().map(|r| r.outcome.clone()).collect();
    fs::write(out.join("summary.csv"), summary_csv(&outcomes)?)?;
    fs::write(out.join("summary.json"), json(&outcomes)?)?;
    Ok(runs)
}

/// Writes one criterion's artifacts under `out/cNN_<name>/`.
pub fn write_run(run: &CriterionRun, out: &Path) -> Result<()> {
    let dir = criterion_dir(out, run.outcome.id);
    fs::create_dir_all(&dir)?;
    for (name, body) in &run.artifacts {
        fs::write(dir.join(name), body)?;
    }
    fs::write(dir.join("outcome.json"), json(&run.outcome)?)?;
    Ok(())
}

fn data_files(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "json")) {
                let rel = path.strip_prefix(root).expect("walked from root").to_path_buf();
                out.insert(rel, fs::read(&path)?);
            }
        }
    }
    Ok(out)
}

/// Byte comparison of the CSV/JSON files under two directories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterminismCheck {
    pub files_compared: usize,
    /// Relative paths that differ or exist on one side only.
    pub mismatches: Vec<String>,
}

impl DeterminismCheck {
    pub fn identical(&self) -> bool {
        self.files_compared > 0 && self.mismatches.is_empty()
    }
}

pub fn compare_outputs(a: &Path, b: &Path) -> Result<DeterminismCheck> {
    let (fa, fb) = (data_files(a)?, data_files(b)?);
    let mut mismatches = Vec::new();
    for (path, bytes) in &fa {
        if fb.get(path) != Some(bytes) {
            mismatches.push(path.display().to_string());
        }
    }
    for path in fb.keys().filter(|p| !fa.contains_key(*p)) {
        mismatches.push(path.display().to_string());
    }
    Ok(DeterminismCheck {
        files_compared: fa.len().max(fb.len()),
        mismatches,
    })
}

/// Outcome of criterion 10 from two finished suite directories.
pub fn determinism_outcome(check: &DeterminismCheck) -> CriterionOutcome {
    CriterionOutcome {
        id: 10,
        name: name_of(10).into(),
        passed: check.identical(),
        measured: format!(
            "{} files compared, {} differ",
            check.files_compared,
            check.mismatches.len()
        ),
        threshold: "all CSV/JSON outputs byte-identical".into(),
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Criteria 1 to 9 from the first run.
    pub runs: Vec<CriterionRun>,
    pub determinism: DeterminismCheck,
    /// All ten outcomes in order.
    pub outcomes: Vec<CriterionOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed) && self.runs.iter().all(CriterionRun::within_budget)
    }
}

/// The full suite: criteria 1 to 9 into `out/run_a` and again into
/// `out/run_b`, then criterion 10 on the two. Writes `out/summary.csv`.
pub fn verify_all(seed: u64, out: &Path, progress: &dyn Fn(&CriterionRun)) -> Result<VerifyReport> {
    let (a, b) = (out.join("run_a"), out.join("run_b"));
    let runs = run_suite(seed, &a, progress)?;
    run_suite(seed, &b, &|_| {})?;
    let determinism = compare_outputs(&a, &b)?;
    let mut outcomes: Vec<CriterionOutcome> = runs.iter().map(|r| r.outcome.clone()).collect();
    outcomes.push(determinism_outcome(&determinism));
    fs::write(out.join("summary.csv"), summary_csv(&outcomes)?)?;
    fs::write(out.join("summary.json"), json(&outcomes)?)?;
    Ok(VerifyReport {
        runs,
        determinism,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_table_is_ordered() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.0 as usize, i + 1);
        }
    }

    #[test]
    fn bayes_criterion_is_reproducible() {
        let a = run_criterion(3, 9).unwrap();
        let b = run_criterion(3, 9).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.artifacts, b.artifacts);
        assert!(a.outcome.passed);
    }

    #[test]
    fn compare_flags_differences() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        fs::write(a.path().join("x.csv"), "1\n").unwrap();
        fs::write(b.path().join("x.csv"), "2\n").unwrap();
        fs::write(a.path().join("y.svg"), "ignored").unwrap();
        let c = compare_outputs(a.path(), b.path()).unwrap();
        assert_eq!(c.files_compared, 1);
        assert_eq!(c.mismatches, vec!["x.csv".to_string()]);
        assert!(!c.identical());
    }

    #[test]
    fn unknown_criterion_rejected() {
        assert!(run_criterion(10, 0).is_err());
    }
}
