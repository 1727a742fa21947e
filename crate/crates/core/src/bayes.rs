//! Gaussian-prior posterior mean and its equivalence with re-centered ridge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::solve_recentered_ridge;
use crate::linalg::{check_matrix, Matrix, Vector};

/// `w* ~ N(μ*, ω² I)`, `y = Xᵀw* + ε`, `ε ~ N(0, σ² I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPriorModel {
    pub mu_star: Vec<f64>,
    pub omega: f64,
    pub sigma_noise: f64,
}

impl GaussianPriorModel {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite() && self.sigma_noise > 0.0 && self.sigma_noise.is_finite()) {
            return Err(Error::NonPositive(format!(
                "omega = {} and sigma = {} must be positive",
                self.omega, self.sigma_noise
            )));
        }
        if self.mu_star.len() != d {
            return Err(Error::InvalidInput(format!(
                "mu_star has length {}, expected {d}",
                self.mu_star.len()
            )));
        }
        Ok(())
    }

    /// `σ²/ω²`.
    pub fn ridge_lambda(&self) -> f64 {
        (self.sigma_noise * self.sigma_noise) / (self.omega * self.omega)
    }

    pub fn mu(&self) -> Vector {
        Vector::from_column_slice(&self.mu_star)
    }
}

/// `E[w* | X, y]`, computed as `Σ_post (Xy/σ² + μ*/ω²)` with
/// `Σ_post = (XXᵀ/σ² + I/ω²)⁻¹`.
pub fn posterior_mean(x: &Matrix, y: &Vector, model: &GaussianPriorModel) -> Result<Vector> {
    check_matrix(x, "X")?;
    let d = x.nrows();
    model.validate(d)?;
    if y.len() != x.ncols() {
        return Err(Error::InvalidInput(format!("y has length {}, expected {}", y.len(), x.ncols())));
    }
    let s2 = model.sigma_noise * model.sigma_noise;
    let w2 = model.omega * model.omega;
    let precision = (x * x.transpose()) / s2 + Matrix::identity(d, d) / w2;
    let rhs = (x * y) / s2 + model.mu() / w2;
    precision.lu().solve(&rhs).ok_or(Error::Singular)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapCheck {
    pub max_diff: f64,
    pub pass: bool,
}

/// `‖posterior_mean − ŵ_(σ²/ω², μ*)‖∞` against `tol`.
pub fn check_map_equals_bayes(x: &Matrix, y: &Vector, model: &GaussianPriorModel, tol: f64) -> Result<MapCheck> {
    let post = posterior_mean(x, y, model)?;
    let ridge = solve_recentered_ridge(x, y, model.ridge_lambda(), &model.mu())?.weights();
    let max_diff = (post - ridge).amax();
    Ok(MapCheck {
        max_diff,
        pass: max_diff <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> (Matrix, Vector, GaussianPriorModel) {
        (
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 2.0),
            GaussianPriorModel {
                mu_star: vec![4.0],
                omega: 1.0,
                sigma_noise: 1.0,
            },
        )
    }

    #[test]
    fn scalar_posterior() {
        let (x, y, m) = scalar();
        assert_eq!(posterior_mean(&x, &y, &m).unwrap()[0], 3.0);
        let c = check_map_equals_bayes(&x, &y, &m, 0.0).unwrap();
        assert_eq!(c.max_diff, 0.0);
    }

    #[test]
    fn rejects_zero_scale() {
        let (x, y, mut m) = scalar();
        m.omega = 0.0;
        assert!(matches!(posterior_mean(&x, &y, &m), Err(Error::NonPositive(_))));
    }
}
