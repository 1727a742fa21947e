use crate::error::{Error, Result};
use crate::linalg::{gram, solve_shifted, GramEigen, Matrix, Vector};

use super::{check_task, SolveResult};

/// `(XXᵀ + λI)⁻¹ X y`.
pub fn solve_ridge(x: &Matrix, y: &Vector, lambda: f64) -> Result<SolveResult> {
    solve_penalized(x, y, lambda, None)
}

/// `argmin ‖Xᵀw − y‖² + λ‖w − μ‖²`, i.e. `(XXᵀ + λI)⁻¹ (X y + λ μ)`.
pub fn solve_recentered_ridge(x: &Matrix, y: &Vector, lambda: f64, mu: &Vector) -> Result<SolveResult> {
    if mu.len() != x.nrows() {
        return Err(Error::InvalidInput(format!(
            "mu has length {}, expected {}",
            mu.len(),
            x.nrows()
        )));
    }
    solve_penalized(x, y, lambda, Some(mu))
}

fn solve_penalized(x: &Matrix, y: &Vector, lambda: f64, mu: Option<&Vector>) -> Result<SolveResult> {
    check_task(x, y)?;
    let g = gram(x);
    let mut rhs = x * y;
    if let Some(mu) = mu {
        rhs.axpy(lambda, mu, 1.0);
    }
    let w = solve_shifted(&g, lambda, &rhs)?;
    let mut resid = &g * &w + lambda * &w - &rhs;
    resid *= 2.0;
    Ok(SolveResult::from_weights(&w, resid.amax()))
}

/// Ridge fits of one task for many `λ` at once, through the eigenbasis of
/// `XXᵀ`: with `G = V diag(e) Vᵀ`, the coefficients of `ŵ_λ` in that basis
/// are `(p + λq) / (e + λ)` where `p = VᵀXy` and `q = Vᵀμ`.
#[derive(Debug, Clone)]
pub struct RidgeCache {
    pub eig: GramEigen,
    pub p: Vec<f64>,
    pub q: Option<Vec<f64>>,
}

impl RidgeCache {
    pub fn new(x: &Matrix, y: &Vector, mu: Option<&Vector>) -> Result<Self> {
        check_task(x, y)?;
        let eig = GramEigen::new(&gram(x))?;
        let vt = eig.vectors.transpose();
        let p = (&vt * (x * y)).iter().copied().collect();
        let q = mu.map(|m| (&vt * m).iter().copied().collect());
        Ok(RidgeCache { eig, p, q })
    }

    /// Coefficients of `ŵ_λ` in the eigenbasis.
    pub fn coefficients(&self, lambda: f64) -> Vec<f64> {
        let e = &self.eig.values;
        match &self.q {
            None => self.p.iter().zip(e).map(|(p, e)| p / (e + lambda)).collect(),
            Some(q) => self
                .p
                .iter()
                .zip(q)
                .zip(e)
                .map(|((p, q), e)| (p + lambda * q) / (e + lambda))
                .collect(),
        }
    }

    pub fn weights(&self, lambda: f64) -> Vector {
        &self.eig.vectors * Vector::from_vec(self.coefficients(lambda))
    }

    /// Rotates a vector into the eigenbasis.
    pub fn rotate(&self, v: &Vector) -> Vec<f64> {
        (self.eig.vectors.transpose() * v).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_closed_form() {
        let x = Matrix::from_element(1, 1, 2.0);
        let r = solve_ridge(&x, &Vector::from_element(1, 3.0), 2.0).unwrap();
        assert!((r.w_hat[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_ols() {
        let r = solve_ridge(&Matrix::identity(2, 2), &Vector::from_vec(vec![1.0, 2.0]), 0.0).unwrap();
        assert_eq!(r.w_hat, vec![1.0, 2.0]);
    }

    #[test]
    fn zero_mu_matches_plain_ridge() {
        let x = Matrix::from_row_slice(2, 3, &[1.0, 0.5, -0.3, 0.2, 1.1, 0.7]);
        let y = Vector::from_vec(vec![0.3, -1.0, 2.0]);
        let a = solve_ridge(&x, &y, 0.7).unwrap();
        let b = solve_recentered_ridge(&x, &y, 0.7, &Vector::zeros(2)).unwrap();
        assert_eq!(a.w_hat, b.w_hat);
    }

    #[test]
    fn heavy_penalty_pulls_toward_mu() {
        let x = Matrix::from_element(1, 1, 1.0);
        let r = solve_recentered_ridge(&x, &Vector::zeros(1), 1e6, &Vector::from_element(1, 5.0)).unwrap();
        assert!((r.w_hat[0] - 5.0).abs() < 1e-4);
    }

    #[test]
    fn cache_matches_direct_solve() {
        let x = Matrix::from_row_slice(2, 3, &[1.0, 0.5, -0.3, 0.2, 1.1, 0.7]);
        let y = Vector::from_vec(vec![0.3, -1.0, 2.0]);
        let mu = Vector::from_vec(vec![0.4, -0.2]);
        let cache = RidgeCache::new(&x, &y, Some(&mu)).unwrap();
        for lambda in [0.01, 0.3, 4.0] {
            let direct = solve_recentered_ridge(&x, &y, lambda, &mu).unwrap().weights();
            assert!((cache.weights(lambda) - direct).amax() < 1e-12);
        }
    }
}
