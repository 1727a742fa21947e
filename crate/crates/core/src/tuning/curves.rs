//! Per-task loss curves as functions of the hyperparameter.
//!
//! Ridge curves keep the task's Gram eigenbasis so that every evaluation
//! costs `O(n_v d)`. LASSO / elastic-net curves keep the task's path: on each
//! segment the fitted residuals are affine in `λ₁`, so the squared loss is a
//! quadratic in `λ₁` there.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{lasso_path_gram, RidgeCache};
use crate::linalg::{gram, Matrix, Vector};
use crate::numeric::stable_mean;
use crate::tasks::{ProblemInstance, Task};

use super::{Family, LossSpec};

/// What a curve measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Mean loss on the task's own validation block.
    Validation(LossSpec),
    /// Population squared loss for isotropic inputs,
    /// `input_var · ‖ŵ − w*‖² + noise_var`.
    Population { input_var: f64, noise_var: f64 },
}

#[derive(Debug, Clone)]
enum RidgeEval {
    Validation { a: Matrix, yv: Vec<f64>, loss: LossSpec },
    Population { z: Vec<f64>, input_var: f64, noise_var: f64 },
}

#[derive(Debug, Clone)]
struct RidgeCurve {
    e: Vec<f64>,
    p: Vec<f64>,
    q: Option<Vec<f64>>,
    eval: RidgeEval,
}

impl RidgeCurve {
    fn coefficients(&self, lambda: f64) -> Vec<f64> {
        match &self.q {
            None => self.p.iter().zip(&self.e).map(|(p, e)| p / (e + lambda)).collect(),
            Some(q) => self
                .p
                .iter()
                .zip(q)
                .zip(&self.e)
                .map(|((p, q), e)| (p + lambda * q) / (e + lambda))
                .collect(),
        }
    }

    fn residuals(a: &Matrix, yv: &[f64], coef: &[f64]) -> Vec<f64> {
        (0..a.nrows())
            .map(|i| {
                let mut s = 0.0;
                for (k, c) in coef.iter().enumerate() {
                    s += a[(i, k)] * c;
                }
                s - yv[i]
            })
            .collect()
    }

    fn value(&self, lambda: f64) -> f64 {
        let coef = self.coefficients(lambda);
        match &self.eval {
            RidgeEval::Validation { a, yv, loss } => stable_mean(
                Self::residuals(a, yv, &coef)
                    .into_iter()
                    .map(|r| loss.of_residual(r))
                    .collect(),
            ),
            RidgeEval::Population {
                z,
                input_var,
                noise_var,
            } => {
                let dist: f64 = coef.iter().zip(z).map(|(c, z)| (c - z) * (c - z)).sum();
                input_var * dist + noise_var
            }
        }
    }

    fn example_losses(&self, lambda: f64) -> Option<Vec<f64>> {
        match &self.eval {
            RidgeEval::Validation { a, yv, loss } => Some(
                Self::residuals(a, yv, &self.coefficients(lambda))
                    .into_iter()
                    .map(|r| loss.of_residual(r))
                    .collect(),
            ),
            RidgeEval::Population { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Piece {
    /// `c0 + c1 λ + c2 λ²`.
    Quad([f64; 3]),
    /// Mean of `loss(u_i + λ v_i)`.
    Residual { u: Vec<f64>, v: Vec<f64>, loss: LossSpec },
}

impl Piece {
    fn value(&self, lambda: f64) -> f64 {
        match self {
            Piece::Quad(c) => c[0] + lambda * (c[1] + lambda * c[2]),
            Piece::Residual { u, v, loss } => stable_mean(
                u.iter()
                    .zip(v)
                    .map(|(u, v)| loss.of_residual(u + lambda * v))
                    .collect(),
            ),
        }
    }

    fn quadratic(&self) -> Option<[f64; 3]> {
        match self {
            Piece::Quad(c) => Some(*c),
            Piece::Residual {
                u,
                v,
                loss: LossSpec::Squared,
            } => {
                let m = u.len() as f64;
                let uu: f64 = u.iter().map(|x| x * x).sum();
                let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
                let vv: f64 = v.iter().map(|x| x * x).sum();
                Some([uu / m, 2.0 * uv / m, vv / m])
            }
            Piece::Residual { .. } => None,
        }
    }

    fn example_losses(&self, lambda: f64) -> Option<Vec<f64>> {
        match self {
            Piece::Quad(_) => None,
            Piece::Residual { u, v, loss } => Some(
                u.iter()
                    .zip(v)
                    .map(|(u, v)| loss.of_residual(u + lambda * v))
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct PiecewiseCurve {
    /// Ascending segment boundaries; piece `k` lives on `[bounds[k], bounds[k+1]]`.
    pub(crate) bounds: Vec<f64>,
    pieces: Vec<Piece>,
}

impl PiecewiseCurve {
    fn locate(&self, lambda: f64) -> usize {
        let k = self.bounds.partition_point(|&b| b <= lambda);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    fn value(&self, lambda: f64) -> f64 {
        self.pieces[self.locate(lambda)].value(lambda)
    }

    pub(crate) fn quadratics(&self) -> Option<Vec<[f64; 3]>> {
        self.pieces.iter().map(Piece::quadratic).collect()
    }
}

#[derive(Debug, Clone)]
enum TaskCurve {
    Ridge(RidgeCurve),
    Piecewise(PiecewiseCurve),
}

impl TaskCurve {
    fn value(&self, lambda: f64) -> f64 {
        match self {
            TaskCurve::Ridge(c) => c.value(lambda),
            TaskCurve::Piecewise(c) => c.value(lambda),
        }
    }

    fn example_losses(&self, lambda: f64) -> Option<Vec<f64>> {
        match self {
            TaskCurve::Ridge(c) => c.example_losses(lambda),
            TaskCurve::Piecewise(c) => c.pieces[c.locate(lambda)].example_losses(lambda),
        }
    }
}

/// Loss curves of every task of an instance, for one family (and one `λ₂`
/// for path families).
#[derive(Debug, Clone)]
pub struct CurveSet {
    curves: Vec<TaskCurve>,
    pub lambda2: Option<f64>,
}

const PAR_THRESHOLD: usize = 256;

impl CurveSet {
    /// Ridge or re-centered ridge curves.
    pub fn ridge(inst: &ProblemInstance, family: &Family, target: &Target) -> Result<Self> {
        if family.is_path() {
            return Err(Error::InvalidInput("ridge curves need a ridge-type family".into()));
        }
        let curves = build_all(inst, |task| ridge_curve(task, family, target))?;
        Ok(CurveSet { curves, lambda2: None })
    }

    /// Path curves over `λ₁ ∈ [lo, hi]` at fixed `λ₂`.
    pub fn path(inst: &ProblemInstance, lo: f64, hi: f64, lambda2: f64, target: &Target) -> Result<Self> {
        let curves = build_all(inst, |task| path_curve(task, lo, hi, lambda2, target))?;
        Ok(CurveSet {
            curves,
            lambda2: Some(lambda2),
        })
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Per-task values at `λ`, in task order.
    pub fn per_task(&self, lambda: f64) -> Vec<f64> {
        if self.curves.len() >= PAR_THRESHOLD {
            self.curves.par_iter().map(|c| c.value(lambda)).collect()
        } else {
            self.curves.iter().map(|c| c.value(lambda)).collect()
        }
    }

    /// Mean over tasks at `λ`.
    pub fn value(&self, lambda: f64) -> f64 {
        stable_mean(self.per_task(lambda))
    }

    /// Per-task, per-example validation losses (validation targets only).
    pub fn example_losses(&self, lambda: f64) -> Option<Vec<Vec<f64>>> {
        self.curves.iter().map(|c| c.example_losses(lambda)).collect()
    }

    pub fn max_example_loss(&self, lambda: f64) -> f64 {
        self.example_losses(lambda)
            .unwrap_or_default()
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    pub(crate) fn piecewise(&self) -> Option<Vec<&PiecewiseCurve>> {
        self.curves
            .iter()
            .map(|c| match c {
                TaskCurve::Piecewise(p) => Some(p),
                TaskCurve::Ridge(_) => None,
            })
            .collect()
    }
}

fn build_all<F>(inst: &ProblemInstance, f: F) -> Result<Vec<TaskCurve>>
where
    F: Fn(&Task) -> Result<TaskCurve> + Sync,
{
    let run = |(t, task): (usize, &Task)| f(task).map_err(|e| e.at_task(t));
    if inst.tasks.len() >= PAR_THRESHOLD {
        inst.tasks.par_iter().enumerate().map(run).collect()
    } else {
        inst.tasks.iter().enumerate().map(run).collect()
    }
}

fn population_params(task: &Task, target: &Target) -> Result<Option<(Vector, f64, f64)>> {
    match target {
        Target::Validation(_) => Ok(None),
        Target::Population {
            input_var,
            noise_var,
        } => {
            let w = task.w_star.clone().ok_or_else(|| {
                Error::InvalidInput("population target needs well-specified tasks".into())
            })?;
            Ok(Some((w, *input_var, *noise_var)))
        }
    }
}

fn ridge_curve(task: &Task, family: &Family, target: &Target) -> Result<TaskCurve> {
    let mu = match family {
        Family::RecenteredRidge { mu } => {
            if mu.len() != task.d() {
                return Err(Error::InvalidInput(format!(
                    "mu has length {}, expected {}",
                    mu.len(),
                    task.d()
                )));
            }
            Some(Vector::from_column_slice(mu))
        }
        _ => None,
    };
    let cache = RidgeCache::new(&task.x, &task.y, mu.as_ref())?;
    let eval = match (population_params(task, target)?, target) {
        (Some((w, input_var, noise_var)), _) => RidgeEval::Population {
            z: cache.rotate(&w),
            input_var,
            noise_var,
        },
        (None, Target::Validation(loss)) => RidgeEval::Validation {
            a: task.xv.tr_mul(&cache.eig.vectors),
            yv: task.yv.iter().copied().collect(),
            loss: *loss,
        },
        (None, Target::Population { .. }) => unreachable!(),
    };
    Ok(TaskCurve::Ridge(RidgeCurve {
        e: cache.eig.values,
        p: cache.p,
        q: cache.q,
        eval,
    }))
}

fn path_curve(task: &Task, lo: f64, hi: f64, lambda2: f64, target: &Target) -> Result<TaskCurve> {
    let segs = lasso_path_gram(&gram(&task.x), &(&task.x * &task.y), lambda2, lo, hi)?;
    let pop = population_params(task, target)?;
    let mut bounds: Vec<f64> = segs.iter().map(|s| s.lambda_lo).collect();
    bounds.push(segs.last().expect("path covers range").lambda_hi);
    let pieces = segs
        .iter()
        .map(|s| {
            let a = s.intercept_vec();
            let b = s.slope_vec();
            match (&pop, target) {
                (Some((w, iv, nv)), _) => {
                    let u = a - w;
                    Piece::Quad([
                        iv * u.norm_squared() + nv,
                        2.0 * iv * u.dot(&b),
                        iv * b.norm_squared(),
                    ])
                }
                (None, Target::Validation(loss)) => Piece::Residual {
                    u: (task.xv.tr_mul(&a) - &task.yv).iter().copied().collect(),
                    v: task.xv.tr_mul(&b).iter().copied().collect(),
                    loss: *loss,
                },
                (None, Target::Population { .. }) => unreachable!(),
            }
        })
        .collect();
    Ok(TaskCurve::Piecewise(PiecewiseCurve { bounds, pieces }))
}
