//! Penalized least-squares estimators.
//!
//! All solvers minimize, for a task with design `X` (`d x n`) and responses
//! `y`,
//!
//! ```text
//! ‖Xᵀw − y‖² + λ₁‖w‖₁ + λ₂‖w − μ‖²
//! ```
//!
//! with the relevant penalties switched on. Ridge is `λ₁ = 0, μ = 0`,
//! re-centered ridge is `λ₁ = 0`, LASSO is `λ₂ = 0, μ = 0` and the elastic
//! net is `μ = 0`. The gradient of the squared term keeps its factor 2, so
//! on the active set the stationarity condition reads
//! `2X_E(X_Eᵀw − y) + 2λ₂w_E = −λ₁ s`.

mod path;
mod prox;
mod ridge;

pub use path::{
    en_kkt_residual, lasso_path, lasso_path_gram, solve_elastic_net, PathSegment, PATH_TIE_TOLERANCE,
};
pub use prox::{prox_oracle, ProxOptions};
pub use ridge::{solve_recentered_ridge, solve_ridge, RidgeCache};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Which estimator to fit and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Ridge { lambda: f64 },
    RecenteredRidge { lambda: f64, mu: Vec<f64> },
    Lasso { lambda1: f64 },
    ElasticNet { lambda1: f64, lambda2: f64 },
}

impl EstimatorSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        match self {
            EstimatorSpec::Ridge { lambda } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return bad(format!("ridge lambda must be finite and >= 0, got {lambda}"));
                }
            }
            EstimatorSpec::RecenteredRidge { lambda, mu } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return bad(format!("ridge lambda must be finite and >= 0, got {lambda}"));
                }
                if mu.len() != d {
                    return bad(format!("mu has length {}, expected {d}", mu.len()));
                }
                if mu.iter().any(|v| !v.is_finite()) {
                    return bad("mu has non-finite entries".into());
                }
            }
            EstimatorSpec::Lasso { lambda1 } => {
                if !(lambda1.is_finite() && *lambda1 > 0.0) {
                    return bad(format!("lasso lambda1 must be finite and > 0, got {lambda1}"));
                }
            }
            EstimatorSpec::ElasticNet { lambda1, lambda2 } => {
                if !(lambda1.is_finite() && *lambda1 >= 0.0 && lambda2.is_finite() && *lambda2 >= 0.0) {
                    return bad(format!(
                        "elastic net needs finite lambda1, lambda2 >= 0, got ({lambda1}, {lambda2})"
                    ));
                }
                if *lambda1 == 0.0 && *lambda2 == 0.0 {
                    return bad("elastic net needs lambda1 > 0 or lambda2 > 0".into());
                }
            }
        }
        Ok(())
    }

    /// Fits the estimator on one training block.
    pub fn solve(&self, x: &Matrix, y: &Vector) -> Result<SolveResult> {
        match self {
            EstimatorSpec::Ridge { lambda } => solve_ridge(x, y, *lambda),
            EstimatorSpec::RecenteredRidge { lambda, mu } => {
                solve_recentered_ridge(x, y, *lambda, &Vector::from_column_slice(mu))
            }
            EstimatorSpec::Lasso { lambda1 } => solve_elastic_net(x, y, *lambda1, 0.0),
            EstimatorSpec::ElasticNet { lambda1, lambda2 } => solve_elastic_net(x, y, *lambda1, *lambda2),
        }
    }
}

/// Fitted coefficients plus the active-set certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub w_hat: Vec<f64>,
    /// Indices with non-zero coefficients, ascending.
    pub active_set: Vec<usize>,
    /// `sign(w_hat[j])` for each `j` in `active_set`.
    pub signs: Vec<f64>,
    pub kkt_residual: f64,
}

impl SolveResult {
    pub(crate) fn from_weights(w: &Vector, kkt_residual: f64) -> Self {
        let active_set: Vec<usize> = (0..w.len()).filter(|&j| w[j] != 0.0).collect();
        let signs = active_set.iter().map(|&j| w[j].signum()).collect();
        SolveResult {
            w_hat: w.iter().copied().collect(),
            active_set,
            signs,
            kkt_residual,
        }
    }

    pub fn weights(&self) -> Vector {
        Vector::from_column_slice(&self.w_hat)
    }
}

pub(crate) fn check_task(x: &Matrix, y: &Vector) -> Result<()> {
    crate::linalg::check_matrix(x, "X")?;
    if y.len() != x.ncols() {
        return Err(Error::InvalidInput(format!(
            "y has length {}, X has {} columns",
            y.len(),
            x.ncols()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("y has non-finite entries".into()));
    }
    Ok(())
}
