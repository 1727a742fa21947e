//! Empirical Rademacher complexities of the tuned loss class.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, stable_mean, McEstimate};
use crate::rng::{substream, Tag};
use crate::tasks::ProblemInstance;
use crate::tuning::{CurveSet, Family, HyperPoint, LossSpec, SearchSpec, Target};

/// Largest `T` for exhaustive sign enumeration.
const MAX_ENUM_T: usize = 20;

const PAR_THRESHOLD: usize = 256;

/// Validation losses of every task at every point of a search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub points: Vec<HyperPoint>,
    /// `per_task[p][t]`: mean validation loss of task `t` at point `p`.
    pub per_task: Vec<Vec<f64>>,
    /// `per_example[p][t][i]`.
    pub per_example: Vec<Vec<Vec<f64>>>,
}

impl LossTable {
    pub fn tasks(&self) -> usize {
        self.per_task.first().map_or(0, Vec::len)
    }
}

/// Tabulates validation losses over the grid of the resolved `search`
/// (refinement is not part of the class).
pub fn loss_table(inst: &ProblemInstance, family: &Family, search: &SearchSpec, loss: &LossSpec) -> Result<LossTable> {
    let resolved = search.resolve(inst)?;
    let target = Target::Validation(*loss);
    let mut sets = Vec::new();
    match (&resolved, family) {
        (SearchSpec::LogGrid { .. } | SearchSpec::Points { .. }, Family::Ridge | Family::RecenteredRidge { .. }) => {
            sets.push((CurveSet::ridge(inst, family, &target)?, resolved.grid_values()));
        }
        (SearchSpec::Path { lo, hi, lambda2, .. }, Family::Lasso | Family::ElasticNet) => {
            let l2s = if matches!(family, Family::Lasso) { vec![0.0] } else { lambda2.clone() };
            for l2 in l2s {
                sets.push((CurveSet::path(inst, *lo, *hi, l2, &target)?, resolved.grid_values()));
            }
        }
        (SearchSpec::Points { points }, Family::Lasso | Family::ElasticNet) => {
            // One path per distinct λ₂ spanning that λ₂'s points.
            let mut l2s: Vec<f64> = points.iter().map(|p| p.lambda2.unwrap_or(0.0)).collect();
            l2s.sort_by(f64::total_cmp);
            l2s.dedup();
            for l2 in l2s {
                let lams: Vec<f64> = points
                    .iter()
                    .filter(|p| p.lambda2.unwrap_or(0.0) == l2)
                    .map(|p| p.lambda)
                    .collect();
                let lo = lams.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = lams.iter().copied().fold(0.0, f64::max);
                if !(lo > 0.0) {
                    return Err(Error::EmptyDomain("path points need lambda1 > 0".into()));
                }
                let hi = if hi > lo { hi } else { lo * (1.0 + 1e-9) };
                sets.push((CurveSet::path(inst, lo, hi, l2, &target)?, lams));
            }
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "search domain {resolved:?} does not match the estimator family"
            )))
        }
    }
    let mut table = LossTable {
        points: Vec::new(),
        per_task: Vec::new(),
        per_example: Vec::new(),
    };
    for (set, lams) in &sets {
        for &l in lams {
            table.points.push(HyperPoint {
                lambda: l,
                lambda2: set.lambda2.filter(|_| matches!(family, Family::ElasticNet)),
            });
            table.per_task.push(set.per_task(l));
            table
                .per_example
                .push(set.example_losses(l).expect("validation curves carry example losses"));
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    /// `E_σ[sup_λ (1/T) Σ_t σᵗ l̄ᵗ(λ)]`, one sign per task.
    pub task_level: McEstimate,
    /// `E_σ[sup_λ (1/(n_v T)) Σ_{t,i} σ^{t(i)} l^{t(i)}(λ)]`, one sign per
    /// validation example.
    pub example_level: McEstimate,
    pub task_draws: Vec<f64>,
    pub example_draws: Vec<f64>,
    pub grid_size: usize,
}

fn signed_sup(rows: &[Vec<f64>], signs: &[f64]) -> f64 {
    rows.iter()
        .map(|row| {
            let terms: Vec<f64> = row.iter().zip(signs).map(|(l, s)| l * s).collect();
            pairwise_sum(&terms) / row.len() as f64
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Sign-sampling estimate of both complexities over the search grid. Sign
/// vector `s` is drawn from stream `(seed, s)`.
pub fn rademacher_estimate(
    inst: &ProblemInstance,
    family: &Family,
    search: &SearchSpec,
    loss: &LossSpec,
    num_sign_samples: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if num_sign_samples == 0 {
        return Err(Error::InvalidInput("num_sign_samples must be >= 1".into()));
    }
    let table = loss_table(inst, family, search, loss)?;
    let flat: Vec<Vec<f64>> = table.per_example.iter().map(|p| p.concat()).collect();
    let t = table.tasks();
    let m = flat.first().map_or(0, Vec::len);
    let draw = |s: usize| {
        let mut rng = substream(seed, s as u64, Tag::Signs);
        let mut sign = || if rng.random::<bool>() { 1.0 } else { -1.0 };
        let task_signs: Vec<f64> = (0..t).map(|_| sign()).collect();
        let example_signs: Vec<f64> = (0..m).map(|_| sign()).collect();
        (signed_sup(&table.per_task, &task_signs), signed_sup(&flat, &example_signs))
    };
    let draws: Vec<(f64, f64)> = if num_sign_samples >= PAR_THRESHOLD {
        (0..num_sign_samples).into_par_iter().map(draw).collect()
    } else {
        (0..num_sign_samples).map(draw).collect()
    };
    let task_draws: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let example_draws: Vec<f64> = draws.iter().map(|d| d.1).collect();
    Ok(RademacherEstimate {
        task_level: McEstimate::from_samples(&task_draws),
        example_level: McEstimate::from_samples(&example_draws),
        task_draws,
        example_draws,
        grid_size: table.points.len(),
    })
}

fn all_signs(t: usize) -> Result<impl Iterator<Item = Vec<f64>>> {
    if t > MAX_ENUM_T {
        return Err(Error::InvalidInput(format!(
            "sign enumeration supports at most {MAX_ENUM_T} terms, got {t}"
        )));
    }
    Ok((0..1u64 << t).map(move |mask| (0..t).map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 }).collect()))
}

/// Exact task-level complexity of `table` by enumerating all `2^T` sign
/// vectors.
pub fn enumerate_task_level(table: &LossTable) -> Result<f64> {
    let values: Vec<f64> = all_signs(table.tasks())?
        .map(|s| signed_sup(&table.per_task, &s))
        .collect();
    Ok(stable_mean(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhintchineCheck {
    /// `E_σ |Σ σᵗ xᵗ|`, exact.
    pub lhs: f64,
    /// `(Σ (xᵗ)²)^{1/2}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `E_σ|Σ σᵗxᵗ|` (by enumeration) with `‖x‖₂`.
pub fn khintchine_check(x: &[f64]) -> Result<KhintchineCheck> {
    let sums: Vec<f64> = all_signs(x.len())?
        .map(|s| {
            let terms: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a * b).collect();
            pairwise_sum(&terms).abs()
        })
        .collect();
    let lhs = stable_mean(sums);
    let rhs = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(KhintchineCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn khintchine_two_terms() {
        // E|σ₁·3 + σ₂·4| = (7 + 1 + 1 + 7)/4 = 4 ≤ 5.
        let k = khintchine_check(&[3.0, 4.0]).unwrap();
        assert_eq!(k.lhs, 4.0);
        assert_eq!(k.rhs, 5.0);
        assert!(k.holds);
    }

    #[test]
    fn singleton_class_enumerates_to_zero() {
        let table = LossTable {
            points: vec![HyperPoint::new(1.0)],
            per_task: vec![vec![0.3, 1.1, 2.0]],
            per_example: vec![vec![vec![0.3], vec![1.1], vec![2.0]]],
        };
        assert!(enumerate_task_level(&table).unwrap().abs() < 1e-15);
    }

    #[test]
    fn two_point_class() {
        // sup over {c, −c} of (1/T) Σ σ l = |Σ σ c|/T.
        let c = [0.5, 1.5];
        let table = LossTable {
            points: vec![HyperPoint::new(1.0), HyperPoint::new(2.0)],
            per_task: vec![c.to_vec(), c.iter().map(|v| -v).collect()],
            per_example: Vec::new(),
        };
        let k = khintchine_check(&c).unwrap();
        assert!((enumerate_task_level(&table).unwrap() - k.lhs / 2.0).abs() < 1e-15);
    }
}
