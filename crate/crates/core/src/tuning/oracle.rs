use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{normal_ci, stable_mean, McEstimate};
use crate::rng::{derive_seed, Tag};
use crate::tasks::{sample_instance, Generator};

use super::curves::{CurveSet, Target};
use super::erm::{tune_erm, tune_on_curves, TuneResult};
use super::{Family, HyperPoint, LossSpec, SearchSpec};

/// Step in `ln λ` for the finite differences behind `lambda_se`.
const DELTA_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub t_oracle: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            t_oracle: 20_000,
            seed: 0,
        }
    }
}

/// Monte Carlo estimate of the population-optimal hyperparameter `λ*`.
///
/// The loss curve is estimated on one bank of fresh tasks shared by every
/// `λ` (common random numbers), so differences between hyperparameters are
/// far more precise than the curve level itself.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub family: Family,
    /// Resolved search domain; `λ_ERM` must be searched over the same one.
    pub search: SearchSpec,
    pub lambda_star: HyperPoint,
    pub lv_star: f64,
    /// Standard error of `lv_star`.
    pub se: f64,
    /// Delta-method standard error of `λ*`; `None` where the curve is not
    /// locally convex.
    pub lambda_se: Option<f64>,
    /// Whether the curve is the analytic population loss (`true`) or a
    /// validation-sample average.
    pub analytic: bool,
    pub t_oracle: usize,
    pub curve: TuneResult,
    sets: Vec<CurveSet>,
}

impl Oracle {
    fn set_for(&self, p: HyperPoint) -> Result<&CurveSet> {
        if !matches!(self.family, Family::ElasticNet) {
            return Ok(&self.sets[0]);
        }
        self.sets
            .iter()
            .find(|s| s.lambda2.map(f64::to_bits) == p.lambda2.map(f64::to_bits))
            .ok_or_else(|| Error::InvalidInput(format!("lambda2 {:?} is not on the oracle grid", p.lambda2)))
    }

    /// Estimated population loss at `p`, per oracle task.
    pub fn per_task(&self, p: HyperPoint) -> Result<Vec<f64>> {
        Ok(self.set_for(p)?.per_task(p.lambda))
    }

    /// Estimated population loss at `p`.
    pub fn value(&self, p: HyperPoint) -> Result<f64> {
        Ok(stable_mean(self.per_task(p)?))
    }

    /// `l_v(p) − l_v(λ*)` on the common task bank, with its standard error.
    pub fn gap(&self, p: HyperPoint) -> Result<McEstimate> {
        let a = self.per_task(p)?;
        let b = self.per_task(self.lambda_star)?;
        let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        Ok(McEstimate::from_samples(&diffs))
    }
}

/// Estimates `λ*` and `l_v(λ*)` over `opts.t_oracle` fresh tasks.
///
/// Squared loss uses the analytic population loss of each fitted task;
/// other losses average the tasks' validation blocks.
pub fn oracle_lambda_star(
    gen: &Generator,
    family: &Family,
    search: &SearchSpec,
    loss: &LossSpec,
    n: usize,
    n_v: usize,
    opts: OracleOptions,
) -> Result<Oracle> {
    let seed = derive_seed(opts.seed, &[Tag::Oracle as u64]);
    let bank = sample_instance(gen, opts.t_oracle, n, n_v, seed)?;
    let resolved = search.resolve(&bank)?;
    let (target, analytic) = match loss {
        LossSpec::Squared => (
            Target::Population {
                input_var: gen.input.entry_var(),
                noise_var: gen.noise.sigma * gen.noise.sigma,
            },
            true,
        ),
        other => (Target::Validation(*other), false),
    };
    let sets = match (&resolved, family) {
        (SearchSpec::Path { lo, hi, .. }, Family::Lasso) => vec![CurveSet::path(&bank, *lo, *hi, 0.0, &target)?],
        (SearchSpec::Path { lo, hi, lambda2, .. }, Family::ElasticNet) => lambda2
            .iter()
            .map(|&l2| CurveSet::path(&bank, *lo, *hi, l2, &target))
            .collect::<Result<Vec<_>>>()?,
        (SearchSpec::LogGrid { .. } | SearchSpec::Points { .. }, Family::Ridge | Family::RecenteredRidge { .. }) => {
            vec![CurveSet::ridge(&bank, family, &target)?]
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "oracle search {resolved:?} does not match the estimator family"
            )))
        }
    };
    let curve = tune_on_curves(&sets, &resolved)?;
    let mut oracle = Oracle {
        family: family.clone(),
        search: resolved,
        lambda_star: curve.lambda_erm,
        lv_star: curve.loss_at_erm,
        se: curve.se_at_erm,
        lambda_se: None,
        analytic,
        t_oracle: opts.t_oracle,
        curve,
        sets,
    };
    oracle.lambda_se = delta_method_se(&oracle)?;
    Ok(oracle)
}

fn delta_method_se(o: &Oracle) -> Result<Option<f64>> {
    let p = o.lambda_star;
    let at = |f: f64| HyperPoint {
        lambda: p.lambda * f,
        lambda2: p.lambda2,
    };
    let up = o.per_task(at(DELTA_STEP.exp()))?;
    let mid = o.per_task(p)?;
    let down = o.per_task(at((-DELTA_STEP).exp()))?;
    let curvature = (stable_mean(up.clone()) - 2.0 * stable_mean(mid) + stable_mean(down.clone()))
        / (DELTA_STEP * DELTA_STEP);
    if !(curvature > 0.0) {
        return Ok(None);
    }
    let slopes: Vec<f64> = up
        .iter()
        .zip(&down)
        .map(|(u, d)| (u - d) / (2.0 * DELTA_STEP))
        .collect();
    let se_log = McEstimate::from_samples(&slopes).se / curvature;
    Ok(Some(p.lambda * se_log))
}

/// Excess risk `l_v(λ_ERM) − l_v(λ*)` over replicate instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessRisk {
    pub t: usize,
    pub n: usize,
    pub n_v: usize,
    pub mean_gap: f64,
    pub se: f64,
    pub ci: (f64, f64),
    pub gaps: Vec<f64>,
    pub lambdas: Vec<HyperPoint>,
}

/// Runs `replicates` independent tuning problems of `T` tasks and scores each
/// `λ_ERM` on the oracle's task bank.
#[allow(clippy::too_many_arguments)]
pub fn excess_risk(
    gen: &Generator,
    family: &Family,
    loss: &LossSpec,
    t: usize,
    n: usize,
    n_v: usize,
    replicates: usize,
    seed: u64,
    oracle: &Oracle,
) -> Result<ExcessRisk> {
    if replicates == 0 {
        return Err(Error::InvalidInput("replicates must be >= 1".into()));
    }
    let runs = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let inst = sample_instance(gen, t, n, n_v, derive_seed(seed, &[Tag::Replicate as u64, r]))?;
            let tuned = tune_erm(&inst, family, &oracle.search, loss)?;
            let value = oracle.value(tuned.lambda_erm)?;
            Ok((value - oracle.lv_star, tuned.lambda_erm))
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let est = McEstimate::from_samples(&gaps);
    Ok(ExcessRisk {
        t,
        n,
        n_v,
        mean_gap: est.mean,
        se: est.se,
        ci: normal_ci(est.mean, est.se),
        gaps,
        lambdas: runs.iter().map(|r| r.1).collect(),
    })
}
