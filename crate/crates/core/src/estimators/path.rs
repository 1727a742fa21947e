//! Homotopy (active-set) solver for the LASSO / elastic-net path in `λ₁`.
//!
//! With `G = XXᵀ`, `c = Xy` and the correlation `r(w) = 2(c − Gw − λ₂w)`,
//! a point `w` is optimal at `λ₁` iff `r_j = λ₁ s_j` on the active set `E`
//! and `|r_j| ≤ λ₁` off it. For fixed `(E, s)` the active coefficients are
//! affine in `λ₁`:
//!
//! ```text
//! w_E(λ₁) = (G_EE + λ₂I)⁻¹ (c_E − λ₁ s / 2) = a + λ₁ b.
//! ```
//!
//! Starting from `λ_max = 2‖c‖∞`, where `w = 0`, the solver walks `λ₁`
//! downward and stops at every join (an inactive correlation reaches the
//! penalty level) or leave (an active coefficient reaches zero).

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, principal_submatrix, cholesky_shifted_solve, Matrix, Spectrum, Vector, DEFAULT_RANK_TOLERANCE};

use super::{check_task, solve_ridge, SolveResult};

/// Events closer than this (relative to `λ_max`) are treated as simultaneous.
pub const PATH_TIE_TOLERANCE: f64 = 1e-12;

/// One linear piece of the path: on `[lambda_lo, lambda_hi]`,
/// `ŵ(λ₁) = intercept + λ₁ · slope`, zero outside `active`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub active: Vec<usize>,
    pub signs: Vec<f64>,
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
}

impl PathSegment {
    pub fn weights_at(&self, lambda1: f64) -> Vector {
        Vector::from_iterator(
            self.intercept.len(),
            self.intercept.iter().zip(&self.slope).map(|(a, b)| a + lambda1 * b),
        )
    }

    pub fn intercept_vec(&self) -> Vector {
        Vector::from_column_slice(&self.intercept)
    }

    pub fn slope_vec(&self) -> Vector {
        Vector::from_column_slice(&self.slope)
    }

    fn zero(d: usize, lo: f64, hi: f64) -> Self {
        PathSegment {
            lambda_lo: lo,
            lambda_hi: hi,
            active: Vec::new(),
            signs: Vec::new(),
            intercept: vec![0.0; d],
            slope: vec![0.0; d],
        }
    }
}

/// Path over `[lo, hi]` for one task, segments in ascending `λ₁`.
pub fn lasso_path(x: &Matrix, y: &Vector, lambda2: f64, lo: f64, hi: f64) -> Result<Vec<PathSegment>> {
    check_task(x, y)?;
    lasso_path_gram(&gram(x), &(x * y), lambda2, lo, hi)
}

/// As [`lasso_path`], from precomputed `G = XXᵀ` and `c = Xy`.
pub fn lasso_path_gram(g: &Matrix, c: &Vector, lambda2: f64, lo: f64, hi: f64) -> Result<Vec<PathSegment>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(Error::InvalidInput(format!(
            "path range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(lambda2.is_finite() && lambda2 >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda2 must be finite and >= 0, got {lambda2}")));
    }
    let mut segs = Homotopy::new(g, c, lambda2).run(lo, hi)?;
    segs.reverse();
    Ok(segs)
}

/// Elastic-net (or LASSO when `λ₂ = 0`) fit at a single `λ₁`.
pub fn solve_elastic_net(x: &Matrix, y: &Vector, lambda1: f64, lambda2: f64) -> Result<SolveResult> {
    check_task(x, y)?;
    if !(lambda1.is_finite() && lambda1 >= 0.0 && lambda2.is_finite() && lambda2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "penalties must be finite and >= 0, got ({lambda1}, {lambda2})"
        )));
    }
    if lambda1 == 0.0 {
        if lambda2 == 0.0 {
            return Err(Error::InvalidInput("elastic net needs lambda1 > 0 or lambda2 > 0".into()));
        }
        return solve_ridge(x, y, lambda2);
    }
    let g = gram(x);
    let c = x * y;
    let h = Homotopy::new(&g, &c, lambda2);
    let w = if lambda1 >= h.lambda_max {
        Vector::zeros(g.nrows())
    } else {
        let segs = h.run(lambda1, h.lambda_max)?;
        let last = segs.last().expect("non-empty path");
        polish(&g, &c, lambda1, lambda2, &last.active, &last.signs)?
    };
    let kkt = en_kkt_residual(&g, &c, lambda1, lambda2, &w);
    if kkt > 1e-7 * h.lambda_max.max(1.0) {
        return Err(Error::Degenerate {
            best: w.iter().copied().collect(),
            kkt_residual: kkt,
        });
    }
    Ok(SolveResult::from_weights(&w, kkt))
}

/// Direct solve of the active-set system at `λ₁`, zero elsewhere.
fn polish(g: &Matrix, c: &Vector, lambda1: f64, lambda2: f64, active: &[usize], signs: &[f64]) -> Result<Vector> {
    let mut w = Vector::zeros(g.nrows());
    if active.is_empty() {
        return Ok(w);
    }
    let rhs = Vector::from_iterator(
        active.len(),
        active.iter().zip(signs).map(|(&j, s)| c[j] - 0.5 * lambda1 * s),
    );
    let sol = cholesky_shifted_solve(&principal_submatrix(g, active), lambda2, &rhs)
        .ok_or(Error::RankDeficientActiveSet { size: active.len() })?;
    for (k, &j) in active.iter().enumerate() {
        w[j] = sol[k];
    }
    Ok(w)
}

/// Largest violation of the optimality conditions at `w`.
pub fn en_kkt_residual(g: &Matrix, c: &Vector, lambda1: f64, lambda2: f64, w: &Vector) -> f64 {
    let r = 2.0 * (c - g * w - lambda2 * w);
    let mut worst = 0.0_f64;
    for j in 0..w.len() {
        let v = if w[j] != 0.0 {
            (r[j] - lambda1 * w[j].signum()).abs()
        } else {
            (r[j].abs() - lambda1).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Join { index: usize, sign: f64 },
    Leave { index: usize },
}

struct Homotopy<'a> {
    g: &'a Matrix,
    c: &'a Vector,
    lambda2: f64,
    lambda_max: f64,
}

impl<'a> Homotopy<'a> {
    fn new(g: &'a Matrix, c: &'a Vector, lambda2: f64) -> Self {
        Homotopy {
            g,
            c,
            lambda2,
            lambda_max: 2.0 * c.amax(),
        }
    }

    /// `(a, b)` with `w_E(λ) = a + λb` for the given active set.
    fn affine(&self, active: &[usize], signs: &[f64]) -> Result<(Vector, Vector)> {
        let k = active.len();
        if k == 0 {
            return Ok((Vector::zeros(0), Vector::zeros(0)));
        }
        let mut sub = principal_submatrix(self.g, active);
        if self.lambda2 == 0.0 {
            let spec = Spectrum::of(&sub, DEFAULT_RANK_TOLERANCE)?;
            if spec.rank() < k {
                return Err(Error::RankDeficientActiveSet { size: k });
            }
        }
        for i in 0..k {
            sub[(i, i)] += self.lambda2;
        }
        let chol = Cholesky::new(sub).ok_or(Error::RankDeficientActiveSet { size: k })?;
        let c_e = Vector::from_iterator(k, active.iter().map(|&j| self.c[j]));
        let half_s = Vector::from_iterator(k, signs.iter().map(|s| -0.5 * s));
        Ok((chol.solve(&c_e), chol.solve(&half_s)))
    }

    /// Segments from `hi` down to `lo`, in descending order.
    fn run(&self, lo: f64, hi: f64) -> Result<Vec<PathSegment>> {
        let d = self.g.nrows();
        let lmax = self.lambda_max;
        let mut out = Vec::new();
        if lmax <= lo {
            out.push(PathSegment::zero(d, lo, hi));
            return Ok(out);
        }
        if hi > lmax {
            out.push(PathSegment::zero(d, lmax, hi));
        }
        let eps = PATH_TIE_TOLERANCE * lmax;
        let mut cur = lmax;
        let mut active: Vec<usize> = Vec::new();
        let mut signs: Vec<f64> = Vec::new();
        for j in 0..d {
            if 2.0 * self.c[j].abs() >= lmax - eps {
                active.push(j);
                signs.push(self.c[j].signum());
            }
        }

        let cap = 50 * d + 100;
        for _ in 0..cap {
            let (a, b) = self.affine(&active, &signs)?;
            let events = self.next_events(&active, &signs, &a, &b, cur, eps);
            let next = events.first().map(|e| e.0).unwrap_or(f64::NEG_INFINITY);

            let seg_lo = next.max(lo);
            let (clip_lo, clip_hi) = (seg_lo, cur.min(hi));
            if clip_hi > clip_lo {
                let mut intercept = vec![0.0; d];
                let mut slope = vec![0.0; d];
                for (k, &j) in active.iter().enumerate() {
                    intercept[j] = a[k];
                    slope[j] = b[k];
                }
                out.push(PathSegment {
                    lambda_lo: clip_lo,
                    lambda_hi: clip_hi,
                    active: active.clone(),
                    signs: signs.clone(),
                    intercept,
                    slope,
                });
            }
            if next <= lo {
                return Ok(out);
            }

            // Simultaneous events: joins before leaves, lowest index first.
            let tied: Vec<Event> = events
                .iter()
                .take_while(|e| e.0 >= next - eps)
                .map(|e| e.1)
                .collect();
            let mut joins: Vec<(usize, f64)> = tied
                .iter()
                .filter_map(|e| match e {
                    Event::Join { index, sign } => Some((*index, *sign)),
                    Event::Leave { .. } => None,
                })
                .collect();
            let mut leaves: Vec<usize> = tied
                .iter()
                .filter_map(|e| match e {
                    Event::Leave { index } => Some(*index),
                    Event::Join { .. } => None,
                })
                .collect();
            joins.sort_by_key(|j| j.0);
            leaves.sort_unstable();
            for (j, s) in joins {
                let pos = active.partition_point(|&i| i < j);
                active.insert(pos, j);
                signs.insert(pos, s);
            }
            for k in leaves {
                if let Ok(pos) = active.binary_search(&k) {
                    active.remove(pos);
                    signs.remove(pos);
                }
            }
            cur = next;
        }

        let (a, b) = self.affine(&active, &signs)?;
        let mut w = Vector::zeros(d);
        for (k, &j) in active.iter().enumerate() {
            w[j] = a[k] + cur * b[k];
        }
        Err(Error::Degenerate {
            kkt_residual: en_kkt_residual(self.g, self.c, cur, self.lambda2, &w),
            best: w.iter().copied().collect(),
        })
    }

    /// Candidate events strictly below `cur`, sorted by decreasing `λ`.
    fn next_events(
        &self,
        active: &[usize],
        signs: &[f64],
        a: &Vector,
        b: &Vector,
        cur: f64,
        eps: f64,
    ) -> Vec<(f64, Event)> {
        let d = self.g.nrows();
        let ok = |l: f64| l.is_finite() && l > 0.0 && l < cur - eps;
        let mut events = Vec::new();

        let mut in_active = vec![false; d];
        for &j in active {
            in_active[j] = true;
        }
        for j in (0..d).filter(|&j| !in_active[j]) {
            let mut ga = 0.0;
            let mut gb = 0.0;
            for (k, &i) in active.iter().enumerate() {
                ga += self.g[(j, i)] * a[k];
                gb += self.g[(j, i)] * b[k];
            }
            let alpha = 2.0 * (self.c[j] - ga);
            let beta = -2.0 * gb;
            // r_j(λ) = α + λβ meets +λ or −λ; crossing inward requires sβ < 1.
            let mut best: Option<(f64, f64)> = None;
            for s in [1.0, -1.0] {
                let denom = 1.0 - s * beta;
                if denom <= 0.0 {
                    continue;
                }
                let l = s * alpha / denom;
                if ok(l) && best.is_none_or(|(bl, _)| l > bl) {
                    best = Some((l, s));
                }
            }
            if let Some((l, s)) = best {
                events.push((l, Event::Join { index: j, sign: s }));
            }
        }
        for (k, &j) in active.iter().enumerate() {
            // The coefficient shrinks toward zero as λ falls only if s·b > 0.
            if signs[k] * b[k] > 0.0 {
                let l = -a[k] / b[k];
                if ok(l) {
                    events.push((l, Event::Leave { index: j }));
                }
            }
        }
        events.sort_by(|x, y| y.0.total_cmp(&x.0));
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Matrix {
        Matrix::from_element(1, 1, v)
    }

    #[test]
    fn one_dimensional_elastic_net() {
        let r = solve_elastic_net(&scalar(1.0), &Vector::from_element(1, 2.0), 1.0, 1.0).unwrap();
        assert!((r.w_hat[0] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn full_shrinkage_above_threshold() {
        let y = Vector::from_element(1, 2.0);
        for l1 in [4.0, 5.0, 100.0] {
            let r = solve_elastic_net(&scalar(1.0), &y, l1, 0.0).unwrap();
            assert_eq!(r.w_hat, vec![0.0]);
            assert!(r.active_set.is_empty());
        }
    }

    #[test]
    fn zero_l1_reduces_to_ridge() {
        let x = Matrix::from_row_slice(2, 3, &[1.0, 0.5, -0.3, 0.2, 1.1, 0.7]);
        let y = Vector::from_vec(vec![0.3, -1.0, 2.0]);
        let a = solve_elastic_net(&x, &y, 0.0, 0.8).unwrap();
        let b = solve_ridge(&x, &y, 0.8).unwrap();
        assert_eq!(a.w_hat, b.w_hat);
    }

    #[test]
    fn one_dimensional_path() {
        let path = lasso_path(&scalar(1.0), &Vector::from_element(1, 2.0), 0.0, 0.5, 10.0).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path[0].lambda_lo, 0.5);
        assert_eq!(path[0].lambda_hi, 4.0);
        assert_eq!(path[1].lambda_lo, 4.0);
        for l in [0.5, 1.0, 3.0] {
            assert!((path[0].weights_at(l)[0] - (2.0 - l / 2.0)).abs() < 1e-14);
        }
        assert_eq!(path[1].weights_at(7.0)[0], 0.0);
    }

    #[test]
    fn range_is_validated() {
        let x = scalar(1.0);
        let y = Vector::from_element(1, 1.0);
        assert!(lasso_path(&x, &y, 0.0, 0.0, 1.0).is_err());
        assert!(lasso_path(&x, &y, 0.0, 2.0, 1.0).is_err());
    }
}
