//! Parameter sweeps of excess risk, bounds and constants, with log-log slope
//! fits.

mod fit;
mod output;
mod studies;

pub use fit::{fit_loglog_slope, SlopeFit};
pub use output::{result_csv, result_svg, write_result};
pub use studies::{
    dimension_independence_study, lambda_dt_scaling_study, DimensionStudy, DimensionStudySpec, LambdaStudySpec,
    NSweep, RatioSweep, TSweep,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bounds::{eval_bound, measure_bound_inputs, reference_curve_distfree, BoundTerm, MeasureOptions, TheoremId};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Tag};
use crate::tasks::{sample_instance, Generator};
use crate::tuning::{excess_risk, oracle_lambda_star, Family, LossSpec, Oracle, OracleOptions, SearchSpec};

/// The swept dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    T,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "n")]
    N,
    #[serde(rename = "n_v")]
    NV,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::T => "T",
            Axis::D => "d",
            Axis::N => "n",
            Axis::NV => "n_v",
        }
    }
}

/// `n = ⌈c · (d + ln(T/λ₂_lower))⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NRule {
    pub c: f64,
    pub lambda2_lower: f64,
}

impl NRule {
    pub const DEFAULT_C: f64 = 8.0;

    pub fn n(&self, d: usize, t: usize) -> usize {
        let v = self.c * (d as f64 + (t as f64 / self.lambda2_lower).ln());
        (v.ceil() as usize).max(1)
    }
}

/// Deterministic stand-in for the Monte Carlo risk: `scale · x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectedRisk {
    pub scale: f64,
    pub exponent: f64,
}

/// Which bound to evaluate at each sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub theorem: TheoremId,
    pub mc_reps: usize,
    #[serde(default)]
    pub mu_hat: Option<Vec<f64>>,
}

fn default_delta() -> f64 {
    0.05
}

fn default_oracle_tasks() -> usize {
    OracleOptions::default().t_oracle
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    /// Strictly increasing values of the swept dimension.
    pub grid: Vec<usize>,
    /// Fixed dimensions; the swept one is ignored.
    pub t: usize,
    pub d: usize,
    pub n: usize,
    pub n_v: usize,
    /// Its `d` is replaced by the point's `d`.
    pub generator: Generator,
    pub family: Family,
    pub search: SearchSpec,
    pub loss: LossSpec,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default = "default_oracle_tasks")]
    pub oracle_tasks: usize,
    /// Overrides `n` at every point.
    #[serde(default)]
    pub n_rule: Option<NRule>,
    /// Rejects points with `n < ratio · d`.
    #[serde(default)]
    pub min_n_over_d: Option<f64>,
    #[serde(default)]
    pub bound: Option<BoundSpec>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub injected: Option<InjectedRisk>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.windows(2).any(|w| w[0] >= w[1]) || self.grid[0] == 0 {
            return Err(Error::InvalidInput("grid must be non-empty, positive and strictly increasing".into()));
        }
        if self.replicates == 0 || self.oracle_tasks == 0 {
            return Err(Error::InvalidInput("replicates and oracle_tasks must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        for &x in &self.grid {
            let (t, d, n, n_v) = self.dims(x);
            if t == 0 || d == 0 || n == 0 || n_v == 0 {
                return Err(Error::InvalidInput(format!("point {x}: T, d, n and n_v must be >= 1")));
            }
            if let Some(r) = self.min_n_over_d {
                if (n as f64) < r * d as f64 {
                    return Err(Error::InvalidInput(format!("point {x}: n = {n} < {r} d = {}", r * d as f64)));
                }
            }
        }
        Ok(())
    }

    /// `(T, d, n, n_v)` at grid value `x`.
    pub fn dims(&self, x: usize) -> (usize, usize, usize, usize) {
        let (mut t, mut d, mut n, mut n_v) = (self.t, self.d, self.n, self.n_v);
        match self.axis {
            Axis::T => t = x,
            Axis::D => d = x,
            Axis::N => n = x,
            Axis::NV => n_v = x,
        }
        if let Some(rule) = self.n_rule {
            n = rule.n(d, t);
        }
        (t, d, n, n_v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub x: f64,
    pub t: usize,
    pub d: usize,
    pub n: usize,
    pub n_v: usize,
    /// Mean excess risk, or the swept estimate.
    pub mean: f64,
    pub se: f64,
    pub ci: (f64, f64),
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_lambda_erm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<f64>,
    #[serde(default)]
    pub bound_terms: Vec<BoundTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_total: Option<f64>,
    pub reference_distfree: f64,
    pub reference_priorwork: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub label: String,
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
    /// Fitted when the grid has at least three points.
    pub fit: Option<SlopeFit>,
    /// Run parameters worth echoing next to the numbers (e.g. the `n` rule).
    pub metadata: BTreeMap<String, String>,
}

impl ExperimentResult {
    pub(crate) fn new(label: &str, axis: Axis, points: Vec<SweepPoint>) -> Result<Self> {
        let fit = if points.len() >= 3 {
            let pts: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.x, p.mean, p.se)).collect();
            Some(fit_loglog_slope(&pts)?)
        } else {
            None
        };
        Ok(ExperimentResult {
            label: label.to_string(),
            axis,
            points,
            fit,
            metadata: BTreeMap::new(),
        })
    }
}

/// Runs `spec` and reports each finished point to `progress`.
pub fn run_sweep_with_progress(spec: &SweepSpec, progress: &dyn Fn(&SweepPoint)) -> Result<ExperimentResult> {
    spec.validate()?;
    let mut oracles: Vec<((usize, usize, usize), Oracle)> = Vec::new();
    let mut points = Vec::with_capacity(spec.grid.len());
    for (i, &x) in spec.grid.iter().enumerate() {
        let point = sweep_point(spec, x, &mut oracles).map_err(|e| e.at_grid_point(i, x as f64))?;
        progress(&point);
        points.push(point);
    }
    let mut result = ExperimentResult::new(&format!("sweep_{}", spec.axis.name()), spec.axis, points)?;
    if let Some(rule) = spec.n_rule {
        result.metadata.insert("n_rule_c".into(), rule.c.to_string());
        result.metadata.insert("n_rule_lambda2_lower".into(), rule.lambda2_lower.to_string());
    }
    result.metadata.insert("replicates".into(), spec.replicates.to_string());
    result.metadata.insert("seed".into(), spec.seed.to_string());
    Ok(result)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<ExperimentResult> {
    run_sweep_with_progress(spec, &|_| {})
}

fn sweep_point(
    spec: &SweepSpec,
    x: usize,
    oracles: &mut Vec<((usize, usize, usize), Oracle)>,
) -> Result<SweepPoint> {
    let (t, d, n, n_v) = spec.dims(x);
    let (reference_distfree, reference_priorwork) = reference_curve_distfree(d, t, spec.delta)?;
    let mut point = SweepPoint {
        x: x as f64,
        t,
        d,
        n,
        n_v,
        mean: 0.0,
        se: 0.0,
        ci: (0.0, 0.0),
        mean_lambda_erm: None,
        lambda_star: None,
        bound_terms: Vec::new(),
        bound_total: None,
        reference_distfree,
        reference_priorwork,
    };
    if let Some(inj) = spec.injected {
        point.mean = inj.scale * (x as f64).powf(inj.exponent);
        point.ci = (point.mean, point.mean);
        return Ok(point);
    }

    let gen = spec.generator.with_d(d)?;
    let key = (d, n, n_v);
    let idx = match oracles.iter().position(|(k, _)| *k == key) {
        Some(i) => i,
        None => {
            let opts = OracleOptions {
                t_oracle: spec.oracle_tasks,
                seed: spec.seed,
            };
            oracles.push((key, oracle_lambda_star(&gen, &spec.family, &spec.search, &spec.loss, n, n_v, opts)?));
            oracles.len() - 1
        }
    };
    let oracle = &oracles[idx].1;
    let risk = excess_risk(&gen, &spec.family, &spec.loss, t, n, n_v, spec.replicates, spec.seed, oracle)?;
    point.mean = risk.mean_gap;
    point.se = risk.se;
    point.ci = risk.ci;
    point.mean_lambda_erm = Some(crate::numeric::stable_mean(risk.lambdas.iter().map(|l| l.lambda).collect()));
    point.lambda_star = Some(oracle.lambda_star.lambda);

    if let Some(b) = &spec.bound {
        let inst = sample_instance(&gen, t, n, n_v, derive_seed(spec.seed, &[Tag::Replicate as u64, 0]))?;
        let mut opts = MeasureOptions::new(spec.delta, b.mc_reps, derive_seed(spec.seed, &[Tag::MonteCarlo as u64]));
        opts.mu_hat = b.mu_hat.clone();
        if let SearchSpec::Path { hi, lambda2, .. } = &oracle.search {
            opts.lambda1_max = Some(*hi);
            opts.lambda2_min = lambda2.iter().copied().reduce(f64::min);
        }
        let inputs = measure_bound_inputs(&inst, &gen, b.theorem, &spec.loss, &opts)?;
        let report = eval_bound(b.theorem, &inputs)?;
        point.bound_total = Some(report.total);
        point.bound_terms = report.terms;
    }
    Ok(point)
}
