//! Cross-task hyperparameter selection.
//!
//! The validation loss of a hyperparameter is the average, over tasks, of the
//! mean per-example loss of the estimator fitted on the task's training block.
//! [`tune_erm`] minimizes it over a search domain; [`oracle_lambda_star`]
//! minimizes its population counterpart by Monte Carlo over fresh tasks; and
//! [`excess_risk`] measures the gap between the two.

mod curves;
mod erm;
mod oracle;

pub use curves::{CurveSet, Target};
pub use erm::{tune_erm, tune_on_curves, Bracket, GridEval, TuneResult};
pub use oracle::{excess_risk, oracle_lambda_star, ExcessRisk, Oracle, OracleOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorSpec;
use crate::numeric::{log_grid, stable_mean};
use crate::tasks::ProblemInstance;

/// Per-example loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Squared,
    /// `min(cap, (pred − y)²)`.
    ClippedSquared { cap: f64 },
}

impl LossSpec {
    #[inline]
    pub fn eval(&self, pred: f64, y: f64) -> f64 {
        let r = pred - y;
        self.of_residual(r)
    }

    #[inline]
    pub fn of_residual(&self, r: f64) -> f64 {
        match self {
            LossSpec::Squared => r * r,
            LossSpec::ClippedSquared { cap } => (r * r).min(*cap),
        }
    }

    /// The bound `C` on the loss, when the loss is bounded.
    pub fn bound(&self) -> Option<f64> {
        match self {
            LossSpec::Squared => None,
            LossSpec::ClippedSquared { cap } => Some(*cap),
        }
    }

    /// `L = 2√C` for bounded losses.
    pub fn lipschitz(&self) -> Option<f64> {
        self.bound().map(|c| 2.0 * c.sqrt())
    }
}

/// Estimator family being tuned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Ridge,
    RecenteredRidge { mu: Vec<f64> },
    Lasso,
    ElasticNet,
}

impl Family {
    pub fn is_path(&self) -> bool {
        matches!(self, Family::Lasso | Family::ElasticNet)
    }

    pub fn estimator(&self, p: HyperPoint) -> EstimatorSpec {
        match self {
            Family::Ridge => EstimatorSpec::Ridge { lambda: p.lambda },
            Family::RecenteredRidge { mu } => EstimatorSpec::RecenteredRidge {
                lambda: p.lambda,
                mu: mu.clone(),
            },
            Family::Lasso => EstimatorSpec::Lasso { lambda1: p.lambda },
            Family::ElasticNet => EstimatorSpec::ElasticNet {
                lambda1: p.lambda,
                lambda2: p.lambda2.unwrap_or(0.0),
            },
        }
    }
}

/// A point of the search domain: `λ` (or `λ₁`), plus `λ₂` for the elastic net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
}

impl HyperPoint {
    pub fn new(lambda: f64) -> Self {
        HyperPoint { lambda, lambda2: None }
    }

    pub fn en(lambda1: f64, lambda2: f64) -> Self {
        HyperPoint {
            lambda: lambda1,
            lambda2: Some(lambda2),
        }
    }
}

/// Search domain for [`tune_erm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpec {
    /// Log-spaced grid on `[lo, hi]`, optionally refined by golden section.
    LogGrid { lo: f64, hi: f64, points: usize, refine: bool },
    /// As `LogGrid` with both ends multiplied by the Gram scale
    /// `trace(XXᵀ)/d` (its expectation when the generator is known).
    ScaledLogGrid {
        lo_factor: f64,
        hi_factor: f64,
        points: usize,
        refine: bool,
    },
    /// Exact minimization over `λ₁ ∈ [lo, hi]` for each `λ₂` in `lambda2`;
    /// `points` log-spaced values are also reported as a loss curve.
    Path {
        lo: f64,
        hi: f64,
        lambda2: Vec<f64>,
        points: usize,
    },
    /// As `Path` with `hi` set to the largest `2‖Xy‖∞` over the instance's
    /// tasks and `lo = lo_factor · hi`.
    AutoPath {
        lo_factor: f64,
        lambda2: Vec<f64>,
        points: usize,
    },
    /// A finite list of points.
    Points { points: Vec<HyperPoint> },
}

impl SearchSpec {
    /// `[1e-6, 1e6] · trace(XXᵀ)/d`, 64 points, refined.
    pub fn default_ridge() -> Self {
        SearchSpec::ScaledLogGrid {
            lo_factor: 1e-6,
            hi_factor: 1e6,
            points: 64,
            refine: true,
        }
    }

    pub fn default_path(lambda2: Vec<f64>) -> Self {
        SearchSpec::AutoPath {
            lo_factor: 1e-3,
            lambda2,
            points: 48,
        }
    }

    /// Replaces instance-dependent ranges with absolute ones.
    pub fn resolve(&self, inst: &ProblemInstance) -> Result<SearchSpec> {
        let resolved = match self {
            SearchSpec::ScaledLogGrid {
                lo_factor,
                hi_factor,
                points,
                refine,
            } => {
                let s = gram_scale(inst);
                SearchSpec::LogGrid {
                    lo: lo_factor * s,
                    hi: hi_factor * s,
                    points: *points,
                    refine: *refine,
                }
            }
            SearchSpec::AutoPath {
                lo_factor,
                lambda2,
                points,
            } => {
                let hi = inst
                    .tasks
                    .iter()
                    .map(|t| 2.0 * (&t.x * &t.y).amax())
                    .fold(0.0, f64::max);
                SearchSpec::Path {
                    lo: lo_factor * hi,
                    hi,
                    lambda2: lambda2.clone(),
                    points: *points,
                }
            }
            other => other.clone(),
        };
        resolved.validate()?;
        Ok(resolved)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |m: String| Err(Error::EmptyDomain(m));
        match self {
            SearchSpec::LogGrid { lo, hi, points, .. } => {
                if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi) || *points == 0 {
                    return empty(format!("log grid [{lo}, {hi}] with {points} points"));
                }
            }
            SearchSpec::ScaledLogGrid {
                lo_factor,
                hi_factor,
                points,
                ..
            } => {
                if !(*lo_factor > 0.0 && lo_factor <= hi_factor) || *points == 0 {
                    return empty(format!("scaled grid [{lo_factor}, {hi_factor}] with {points} points"));
                }
            }
            SearchSpec::Path { lo, hi, lambda2, .. } => {
                if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi) {
                    return empty(format!("lambda1 range [{lo}, {hi}]"));
                }
                if lambda2.is_empty() || lambda2.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                    return empty("lambda2 list must be non-empty and nonnegative".into());
                }
            }
            SearchSpec::AutoPath { lo_factor, lambda2, .. } => {
                if !(*lo_factor > 0.0 && *lo_factor < 1.0) {
                    return empty(format!("lo_factor {lo_factor} must lie in (0, 1)"));
                }
                if lambda2.is_empty() {
                    return empty("lambda2 list must be non-empty".into());
                }
            }
            SearchSpec::Points { points } => {
                if points.is_empty() {
                    return empty("no search points".into());
                }
            }
        }
        Ok(())
    }

    /// Grid values of a resolved log grid.
    pub fn grid_values(&self) -> Vec<f64> {
        match self {
            SearchSpec::LogGrid { lo, hi, points, .. } => log_grid(*lo, *hi, *points),
            SearchSpec::Path { lo, hi, points, .. } => log_grid(*lo, *hi, (*points).max(2)),
            SearchSpec::Points { points } => points.iter().map(|p| p.lambda).collect(),
            _ => Vec::new(),
        }
    }
}

/// `trace(XXᵀ)/d`: `n σ_x²/d` under the generator, else the instance mean.
pub fn gram_scale(inst: &ProblemInstance) -> f64 {
    match &inst.generator {
        Some(g) => inst.n as f64 * g.input.entry_var(),
        None => inst.mean_gram_scale(),
    }
}

/// `(1/T) Σ_t (1/n_v) Σ_i l(x_vᵀŵᵗ, y_v)`, each `ŵᵗ` fitted on task `t`'s
/// training block. Sums are order independent.
pub fn validation_loss(inst: &ProblemInstance, est: &EstimatorSpec, loss: &LossSpec) -> Result<f64> {
    Ok(stable_mean(per_task_validation_losses(inst, est, loss)?))
}

/// Mean validation loss of each task, in task order.
pub fn per_task_validation_losses(
    inst: &ProblemInstance,
    est: &EstimatorSpec,
    loss: &LossSpec,
) -> Result<Vec<f64>> {
    est.validate(inst.d)?;
    inst.tasks
        .iter()
        .enumerate()
        .map(|(t, task)| {
            let w = est.solve(&task.x, &task.y).map_err(|e| e.at_task(t))?.weights();
            let pred = task.xv.tr_mul(&w);
            Ok(stable_mean(
                pred.iter()
                    .zip(task.yv.iter())
                    .map(|(p, y)| loss.eval(*p, *y))
                    .collect(),
            ))
        })
        .collect()
}

/// Largest single validation loss of ridge over the default grid; the
/// empirical stand-in for the loss bound `C`.
pub fn max_ridge_loss_on_default_grid(inst: &ProblemInstance) -> Result<f64> {
    let search = SearchSpec::default_ridge().resolve(inst)?;
    let grid = search.grid_values();
    let set = CurveSet::ridge(inst, &Family::Ridge, &Target::Validation(LossSpec::Squared))?;
    Ok(grid
        .iter()
        .map(|&l| set.max_example_loss(l))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};
    use crate::tasks::Task;

    #[test]
    fn scalar_validation_loss() {
        let task = Task::new(
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 2.0),
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 1.0),
        )
        .unwrap();
        let inst = ProblemInstance::from_tasks(vec![task], 0).unwrap();
        let l = validation_loss(&inst, &EstimatorSpec::Ridge { lambda: 2.0 }, &LossSpec::Squared).unwrap();
        assert!((l - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn clipped_loss_is_capped() {
        let l = LossSpec::ClippedSquared { cap: 2.0 };
        assert_eq!(l.eval(10.0, 0.0), 2.0);
        assert_eq!(l.eval(1.0, 0.0), 1.0);
        assert_eq!(l.lipschitz(), Some(2.0 * 2f64.sqrt()));
    }
}
