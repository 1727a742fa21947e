use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_grid, McEstimate};
use crate::tasks::ProblemInstance;

use super::curves::{CurveSet, Target};
use super::{per_task_validation_losses, Family, HyperPoint, LossSpec, SearchSpec};

/// Golden-section refinement stops once the bracket spans this much in `ln λ`.
pub const REFINE_LOG_WIDTH: f64 = 1e-4;

/// Path candidates re-evaluated exactly after the quadratic sweep.
const EXACT_CANDIDATES: usize = 8;

/// Sweep sums are rebuilt from scratch after this many updates.
const RESUM_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEval {
    pub point: HyperPoint,
    pub loss: f64,
    /// Standard error of the task average.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub lambda_erm: HyperPoint,
    pub loss_at_erm: f64,
    pub se_at_erm: f64,
    /// Loss curve on the reporting grid.
    pub grid: Vec<GridEval>,
    /// Every other point evaluated exactly during the search.
    pub refinement: Vec<GridEval>,
    pub refinement_trace: Vec<Bracket>,
    /// The resolved search domain.
    pub search: SearchSpec,
}

impl TuneResult {
    pub fn evaluations(&self) -> impl Iterator<Item = &GridEval> {
        self.grid.iter().chain(self.refinement.iter())
    }
}

/// `λ_ERM`: the minimizer of the instance's validation loss over `search`.
pub fn tune_erm(
    inst: &ProblemInstance,
    family: &Family,
    search: &SearchSpec,
    loss: &LossSpec,
) -> Result<TuneResult> {
    let resolved = search.resolve(inst)?;
    let target = Target::Validation(*loss);
    match (&resolved, family.is_path()) {
        (SearchSpec::Points { points }, true) => {
            let evals = points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let per_task = per_task_validation_losses(inst, &family.estimator(*p), loss)
                        .map_err(|e| e.at_grid_point(i, p.lambda))?;
                    let est = McEstimate::from_samples(&per_task);
                    Ok(GridEval {
                        point: *p,
                        loss: est.mean,
                        se: est.se,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(finish(evals, Vec::new(), Vec::new(), resolved))
        }
        (SearchSpec::LogGrid { .. } | SearchSpec::Points { .. }, false) => {
            let set = CurveSet::ridge(inst, family, &target)?;
            tune_on_curves(&[set], &resolved)
        }
        (SearchSpec::Path { lo, hi, lambda2, .. }, true) => {
            let lambda2: Vec<f64> = match family {
                Family::Lasso => vec![0.0],
                _ => lambda2.clone(),
            };
            let sets = lambda2
                .iter()
                .map(|&l2| CurveSet::path(inst, *lo, *hi, l2, &target))
                .collect::<Result<Vec<_>>>()?;
            tune_on_curves(&sets, &resolved)
        }
        _ => Err(Error::InvalidInput(format!(
            "search domain {resolved:?} does not match the estimator family"
        ))),
    }
}

fn eval_point(set: &CurveSet, lambda: f64) -> GridEval {
    let per_task = set.per_task(lambda);
    let est = McEstimate::from_samples(&per_task);
    GridEval {
        point: HyperPoint {
            lambda,
            lambda2: set.lambda2,
        },
        loss: est.mean,
        se: est.se,
    }
}

/// Minimizes the task-average of prepared curves over a resolved domain.
pub fn tune_on_curves(sets: &[CurveSet], search: &SearchSpec) -> Result<TuneResult> {
    let mut grid = Vec::new();
    let mut extra = Vec::new();
    let mut trace = Vec::new();
    match search {
        SearchSpec::LogGrid { lo, hi, points, refine } => {
            let set = single(sets)?;
            grid = log_grid(*lo, *hi, *points)
                .into_iter()
                .map(|l| eval_point(set, l))
                .collect();
            if *refine && grid.len() >= 2 {
                golden_refine(set, &grid, &mut extra, &mut trace);
            }
        }
        SearchSpec::Points { points } => {
            let set = single(sets)?;
            grid = points.iter().map(|p| eval_point(set, p.lambda)).collect();
        }
        SearchSpec::Path { lo, hi, points, .. } => {
            for set in sets {
                let start = grid.len();
                grid.extend(log_grid(*lo, *hi, (*points).max(2)).into_iter().map(|l| eval_point(set, l)));
                match sweep_candidates(set, *lo, *hi) {
                    Some(cands) => {
                        for (l, r, lambda) in cands {
                            extra.push(eval_point(set, lambda));
                            trace.push(Bracket {
                                lo: l,
                                hi: r,
                                lambda2: set.lambda2,
                            });
                        }
                    }
                    None => {
                        let slice = grid[start..].to_vec();
                        golden_refine(set, &slice, &mut extra, &mut trace);
                    }
                }
            }
        }
        other => {
            return Err(Error::InvalidInput(format!("search domain {other:?} is not resolved")));
        }
    }
    Ok(finish(grid, extra, trace, search.clone()))
}

fn single(sets: &[CurveSet]) -> Result<&CurveSet> {
    match sets {
        [s] => Ok(s),
        _ => Err(Error::InvalidInput("expected exactly one curve set".into())),
    }
}

fn finish(grid: Vec<GridEval>, refinement: Vec<GridEval>, trace: Vec<Bracket>, search: SearchSpec) -> TuneResult {
    let best = grid
        .iter()
        .chain(refinement.iter())
        .min_by(|a, b| {
            a.loss
                .total_cmp(&b.loss)
                .then(a.point.lambda.total_cmp(&b.point.lambda))
        })
        .expect("non-empty search")
        .clone();
    TuneResult {
        lambda_erm: best.point,
        loss_at_erm: best.loss,
        se_at_erm: best.se,
        grid,
        refinement,
        refinement_trace: trace,
        search,
    }
}

/// Golden-section search in `ln λ` on the bracket around the best grid point.
fn golden_refine(set: &CurveSet, grid: &[GridEval], extra: &mut Vec<GridEval>, trace: &mut Vec<Bracket>) {
    let i = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.loss.total_cmp(&b.1.loss))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let mut a = grid[i.saturating_sub(1)].point.lambda.ln();
    let mut b = grid[(i + 1).min(grid.len() - 1)].point.lambda.ln();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |u: f64, extra: &mut Vec<GridEval>| {
        let e = eval_point(set, u.exp());
        let l = e.loss;
        extra.push(e);
        l
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c, extra);
    let mut fd = eval(d, extra);
    trace.push(Bracket {
        lo: a.exp(),
        hi: b.exp(),
        lambda2: set.lambda2,
    });
    while b - a > REFINE_LOG_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c, extra);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d, extra);
        }
        trace.push(Bracket {
            lo: a.exp(),
            hi: b.exp(),
            lambda2: set.lambda2,
        });
    }
}

/// Sweeps the union of all tasks' breakpoints, minimizing the summed
/// quadratic on each elementary interval. Returns the best few
/// `(interval_lo, interval_hi, λ)` by the swept value, or `None` if some
/// task's loss is not piecewise quadratic.
fn sweep_candidates(set: &CurveSet, lo: f64, hi: f64) -> Option<Vec<(f64, f64, f64)>> {
    let curves = set.piecewise()?;
    let quads: Vec<Vec<[f64; 3]>> = curves.iter().map(|c| c.quadratics()).collect::<Option<_>>()?;

    let mut events: Vec<(f64, usize)> = Vec::new();
    for (t, c) in curves.iter().enumerate() {
        for &b in &c.bounds[1..c.bounds.len() - 1] {
            events.push((b, t));
        }
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut ptr = vec![0usize; quads.len()];
    let resum = |ptr: &[usize]| {
        let mut s = [0.0; 3];
        for (t, q) in quads.iter().enumerate() {
            for k in 0..3 {
                s[k] += q[ptr[t]][k];
            }
        }
        s
    };
    let mut sum = resum(&ptr);
    let mut updates = 0usize;
    let mut cands: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut left = lo;
    let mut idx = 0;
    loop {
        let right = events.get(idx).map_or(hi, |e| e.0.min(hi));
        if right > left {
            let (lambda, value) = minimize_quadratic(sum, left, right);
            cands.push((value, left, right, lambda));
        }
        while idx < events.len() && events[idx].0 <= right {
            let t = events[idx].1;
            let old = quads[t][ptr[t]];
            ptr[t] = (ptr[t] + 1).min(quads[t].len() - 1);
            let new = quads[t][ptr[t]];
            for k in 0..3 {
                sum[k] += new[k] - old[k];
            }
            idx += 1;
            updates += 1;
            if updates % RESUM_EVERY == 0 {
                sum = resum(&ptr);
            }
        }
        left = right;
        if idx >= events.len() && left >= hi {
            break;
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.3.total_cmp(&b.3)));
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for (_, l, r, lambda) in cands {
        if out.iter().all(|o| o.2 != lambda) {
            out.push((l, r, lambda));
        }
        if out.len() == EXACT_CANDIDATES {
            break;
        }
    }
    Some(out)
}

fn minimize_quadratic(q: [f64; 3], l: f64, r: f64) -> (f64, f64) {
    let f = |x: f64| q[0] + x * (q[1] + x * q[2]);
    let mut best = if f(l) <= f(r) { (l, f(l)) } else { (r, f(r)) };
    if q[2] > 0.0 {
        let m = (-q[1] / (2.0 * q[2])).clamp(l, r);
        if f(m) < best.1 {
            best = (m, f(m));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimizer_is_clamped() {
        let q = [1.0, -2.0, 1.0];
        assert_eq!(minimize_quadratic(q, 0.0, 3.0).0, 1.0);
        assert_eq!(minimize_quadratic(q, 2.0, 3.0).0, 2.0);
        assert_eq!(minimize_quadratic([0.0, 1.0, -1.0], 0.0, 3.0).0, 3.0);
    }
}
