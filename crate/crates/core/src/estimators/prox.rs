//! Proximal-gradient reference solver, used to cross-check the closed forms
//! and the homotopy. It shares no code with them beyond the Gram product.

use crate::error::{Error, Result};
use crate::linalg::{gram, Matrix, Spectrum, Vector, DEFAULT_RANK_TOLERANCE};

use super::check_task;

#[derive(Debug, Clone, Copy)]
pub struct ProxOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for ProxOptions {
    fn default() -> Self {
        ProxOptions {
            max_iters: 500_000,
            tol: 1e-10,
        }
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimizes `‖Xᵀw − y‖² + λ₁‖w‖₁ + λ₂‖w − μ‖²` by ISTA with step
/// `1 / (2 e_max(XXᵀ) + 2λ₂)`, stopping once the minimal subgradient norm
/// (∞-norm) drops to `tol`.
pub fn prox_oracle(
    x: &Matrix,
    y: &Vector,
    lambda1: f64,
    lambda2: f64,
    mu: Option<&Vector>,
    opts: ProxOptions,
) -> Result<Vector> {
    check_task(x, y)?;
    let d = x.nrows();
    let g = gram(x);
    let c = x * y;
    let zero = Vector::zeros(d);
    let mu = mu.unwrap_or(&zero);
    let e_max = Spectrum::of(&g, DEFAULT_RANK_TOLERANCE)?.largest();
    let lip = 2.0 * e_max + 2.0 * lambda2;
    if lip == 0.0 {
        return Ok(zero);
    }
    let step = 1.0 / lip;

    let grad = |w: &Vector| 2.0 * (&g * w - &c) + 2.0 * lambda2 * (w - mu);
    let residual = |w: &Vector, gr: &Vector| {
        (0..d)
            .map(|j| {
                if w[j] != 0.0 {
                    (gr[j] + lambda1 * w[j].signum()).abs()
                } else {
                    (gr[j].abs() - lambda1).max(0.0)
                }
            })
            .fold(0.0_f64, f64::max)
    };

    let mut w = Vector::zeros(d);
    let mut gr = grad(&w);
    let mut res = residual(&w, &gr);
    for _ in 0..opts.max_iters {
        if res <= opts.tol {
            return Ok(w);
        }
        for j in 0..d {
            w[j] = soft_threshold(w[j] - step * gr[j], step * lambda1);
        }
        gr = grad(&w);
        res = residual(&w, &gr);
    }
    if res <= opts.tol {
        return Ok(w);
    }
    Err(Error::NotConverged {
        iterate: w.iter().copied().collect(),
        residual: res,
        iters: opts.max_iters,
    })
}
