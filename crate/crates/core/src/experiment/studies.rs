use serde::{Deserialize, Serialize};

use crate::bounds::{estimate_lambda_dt, reference_curve_distfree};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tasks::Generator;
use crate::tuning::{Family, LossSpec, SearchSpec};

use super::{run_sweep, Axis, ExperimentResult, InjectedRisk, NRule, SweepPoint, SweepSpec};

/// `d` sweep at a fixed `n/d` ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSweep {
    pub grid: Vec<usize>,
    pub n_per_d: usize,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NSweep {
    pub d: usize,
    pub grid: Vec<usize>,
    pub t: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TSweep {
    pub d: usize,
    pub n: usize,
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStudySpec {
    /// Its `d` is replaced at each point.
    pub generator: Generator,
    #[serde(default)]
    pub d_sweep: Option<RatioSweep>,
    #[serde(default)]
    pub n_sweep: Option<NSweep>,
    #[serde(default)]
    pub t_sweep: Option<TSweep>,
    pub mc_reps: usize,
    pub seed: u64,
}

/// Smallest admissible `n/d` for the covariance estimates behind `Λ_D^T`.
const MIN_N_OVER_D: usize = 6;

fn lambda_point(gen: &Generator, x: usize, (t, d, n): (usize, usize, usize), reps: usize, seed: u64) -> Result<SweepPoint> {
    if n < MIN_N_OVER_D * d {
        return Err(Error::InvalidInput(format!("n = {n} < 6d = {}", MIN_N_OVER_D * d)));
    }
    let est = estimate_lambda_dt(&gen.with_d(d)?, t, n, reps, seed)?;
    let (reference_distfree, reference_priorwork) = reference_curve_distfree(d, t, 0.05)?;
    Ok(SweepPoint {
        x: x as f64,
        t,
        d,
        n,
        n_v: 1,
        mean: est.mean(),
        se: est.se(),
        ci: est.estimate.ci95(),
        mean_lambda_erm: None,
        lambda_star: None,
        bound_terms: Vec::new(),
        bound_total: None,
        reference_distfree,
        reference_priorwork,
    })
}

fn lambda_sweep(
    label: &str,
    axis: Axis,
    grid: &[usize],
    dims: impl Fn(usize) -> (usize, usize, usize),
    spec: &LambdaStudySpec,
    stream: u64,
) -> Result<ExperimentResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("{label}: grid must be non-empty and strictly increasing")));
    }
    let seed = derive_seed(spec.seed, &[stream]);
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            lambda_point(&spec.generator, x, dims(x), spec.mc_reps, seed).map_err(|e| e.at_grid_point(i, x as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = ExperimentResult::new(label, axis, points)?;
    r.metadata.insert("mc_reps".into(), spec.mc_reps.to_string());
    Ok(r)
}

/// Monte Carlo `Λ_D^T` along `d` (fixed `n/d`), `n` and `T`, each with a
/// log-log slope. Every point of a sweep shares its draws' random streams.
pub fn lambda_dt_scaling_study(spec: &LambdaStudySpec) -> Result<Vec<ExperimentResult>> {
    let mut out = Vec::new();
    if let Some(s) = &spec.d_sweep {
        out.push(lambda_sweep("lambda_dt_vs_d", Axis::D, &s.grid, |d| (s.t, d, s.n_per_d * d), spec, 1)?);
    }
    if let Some(s) = &spec.n_sweep {
        out.push(lambda_sweep("lambda_dt_vs_n", Axis::N, &s.grid, |n| (s.t, s.d, n), spec, 2)?);
    }
    if let Some(s) = &spec.t_sweep {
        out.push(lambda_sweep("lambda_dt_vs_t", Axis::T, &s.grid, |t| (t, s.d, s.n), spec, 3)?);
    }
    Ok(out)
}

fn default_c() -> f64 {
    NRule::DEFAULT_C
}

fn squared() -> LossSpec {
    LossSpec::Squared
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionStudySpec {
    pub d_grid: Vec<usize>,
    /// Sub-Gaussian inputs; its `d` is replaced at each point.
    pub generator: Generator,
    /// Elastic-net search; must be `path` or `auto_path`.
    pub search: SearchSpec,
    pub t: usize,
    pub n_v: usize,
    #[serde(default = "default_c")]
    pub n_rule_c: f64,
    #[serde(default = "squared")]
    pub loss: LossSpec,
    pub replicates: usize,
    pub oracle_tasks: usize,
    pub seed: u64,
    #[serde(default)]
    pub injected: Option<InjectedRisk>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionStudy {
    pub result: ExperimentResult,
    /// Excess risk at the largest `d` over that at the smallest.
    pub ratio: f64,
    /// `√(d_max/d_min)`, the growth a `√d` rate would predict.
    pub reference_ratio: f64,
    pub n_rule: NRule,
}

/// Elastic-net excess risk along `d` with `n` grown by the rule
/// `n = ⌈c (d + ln(T/λ₂_lower))⌉`.
pub fn dimension_independence_study(spec: &DimensionStudySpec) -> Result<DimensionStudy> {
    let lambda2 = match &spec.search {
        SearchSpec::Path { lambda2, .. } | SearchSpec::AutoPath { lambda2, .. } => lambda2,
        other => {
            return Err(Error::InvalidInput(format!(
                "dimension study needs an elastic-net path search, got {other:?}"
            )))
        }
    };
    let lambda2_lower = lambda2.iter().copied().fold(f64::INFINITY, f64::min);
    if !(lambda2_lower > 0.0 && lambda2_lower.is_finite()) {
        return Err(Error::InvalidInput("the n rule needs a positive smallest lambda2".into()));
    }
    let n_rule = NRule {
        c: spec.n_rule_c,
        lambda2_lower,
    };
    let sweep = SweepSpec {
        axis: Axis::D,
        grid: spec.d_grid.clone(),
        t: spec.t,
        d: spec.d_grid.first().copied().unwrap_or(1),
        n: 1,
        n_v: spec.n_v,
        generator: spec.generator.clone(),
        family: Family::ElasticNet,
        search: spec.search.clone(),
        loss: spec.loss,
        replicates: spec.replicates,
        seed: spec.seed,
        oracle_tasks: spec.oracle_tasks,
        n_rule: Some(n_rule),
        min_n_over_d: None,
        bound: None,
        delta: 0.05,
        injected: spec.injected,
    };
    let mut result = run_sweep(&sweep)?;
    result.label = "dimension_independence".into();
    let (first, last) = (&result.points[0], &result.points[result.points.len() - 1]);
    let ratio = last.mean / first.mean;
    let reference_ratio = (last.d as f64 / first.d as f64).sqrt();
    Ok(DimensionStudy {
        result,
        ratio,
        reference_ratio,
        n_rule,
    })
}
