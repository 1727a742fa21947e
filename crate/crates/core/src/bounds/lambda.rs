//! Monte Carlo estimates of the distribution-dependent constants.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::lasso_path;
use crate::linalg::{gram, principal_submatrix, Matrix, Spectrum, Vector, DEFAULT_RANK_TOLERANCE};
use crate::numeric::McEstimate;
use crate::rng::{derive_seed, substream, Tag};
use crate::tasks::Generator;

/// Largest `d` for which every subset is enumerated.
pub const EXACT_ENUM_MAX_D: usize = 15;

/// Default number of sampled subsets beyond [`EXACT_ENUM_MAX_D`].
pub const DEFAULT_SUBSET_SAMPLES: usize = 4096;

const PAR_THRESHOLD: usize = 256;

/// Which coordinate subsets `E` a max over subsets ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetMode {
    /// All `2^d − 1` non-empty subsets; `d ≤ 15`.
    ExactEnum,
    /// `k` uniform non-empty subsets per task. When `k ≥ 2^d − 1` every
    /// subset is used instead. Biased downward otherwise.
    SampledSubsets { k: usize },
    /// Only the active sets met along the task's LASSO/EN path over
    /// `[lo_factor · λ_max, λ_max]`.
    PathObserved { lo_factor: f64 },
}

impl SubsetMode {
    /// `ExactEnum` up to [`EXACT_ENUM_MAX_D`], sampling beyond.
    pub fn auto(d: usize) -> Self {
        if d <= EXACT_ENUM_MAX_D {
            SubsetMode::ExactEnum
        } else {
            SubsetMode::SampledSubsets {
                k: DEFAULT_SUBSET_SAMPLES,
            }
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            SubsetMode::ExactEnum if d > EXACT_ENUM_MAX_D => Err(Error::DimensionTooLarge(d)),
            SubsetMode::SampledSubsets { k: 0 } => Err(Error::InvalidInput("subset sample count must be >= 1".into())),
            SubsetMode::PathObserved { lo_factor } if !(*lo_factor > 0.0 && *lo_factor < 1.0) => Err(
                Error::InvalidInput(format!("lo_factor {lo_factor} must lie in (0, 1)")),
            ),
            _ => Ok(()),
        }
    }

    fn is_biased(&self, d: usize) -> bool {
        match self {
            SubsetMode::ExactEnum => false,
            SubsetMode::SampledSubsets { k } => !covers_all(*k, d),
            SubsetMode::PathObserved { .. } => true,
        }
    }
}

fn covers_all(k: usize, d: usize) -> bool {
    d < 63 && k as u64 >= (1u64 << d) - 1
}

/// A Monte Carlo mean of per-draw maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEstimate {
    pub estimate: McEstimate,
    pub per_draw: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl MaxEstimate {
    fn new(per_draw: Vec<f64>, warning: Option<String>) -> Self {
        MaxEstimate {
            estimate: McEstimate::from_samples(&per_draw),
            per_draw,
            warning,
        }
    }

    pub fn mean(&self) -> f64 {
        self.estimate.mean
    }

    pub fn se(&self) -> f64 {
        self.estimate.se
    }
}

fn check_reps(mc_reps: usize, t: usize) -> Result<()> {
    if mc_reps == 0 {
        return Err(Error::InvalidInput("mc_reps must be >= 1".into()));
    }
    if t == 0 {
        return Err(Error::InvalidInput("T must be >= 1".into()));
    }
    Ok(())
}

fn rep_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, &[Tag::MonteCarlo as u64, rep as u64])
}

fn par_collect<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(count: usize, f: F) -> Result<Vec<T>> {
    if count >= PAR_THRESHOLD {
        (0..count).into_par_iter().map(f).collect()
    } else {
        (0..count).map(f).collect()
    }
}

fn inv_v(g: &Matrix, shift: f64) -> Result<f64> {
    Ok(1.0 / (Spectrum::of(g, DEFAULT_RANK_TOLERANCE)?.smallest_nonzero() + shift))
}

/// `Λ_D^T` from an arbitrary design source: the mean over `mc_reps` draws of
/// `max_t 1/V(XᵗXᵗᵀ)`, where `design(rep, t)` supplies `Xᵗ` of draw `rep`.
pub fn lambda_dt_from_designs<F>(design: F, t: usize, mc_reps: usize) -> Result<MaxEstimate>
where
    F: Fn(usize, usize) -> Matrix + Sync,
{
    check_reps(mc_reps, t)?;
    let per_draw = par_collect(mc_reps, |r| {
        (0..t).try_fold(0.0f64, |acc, i| Ok(acc.max(inv_v(&gram(&design(r, i)), 0.0)?)))
    })?;
    Ok(MaxEstimate::new(per_draw, None))
}

/// `Λ_D^T = E[max_t 1/V(XᵗXᵗᵀ)]` over `T` fresh training designs of `n`
/// columns. Draw `r` uses the same designs whatever `T` is, so per-draw
/// values are nondecreasing in `T`.
pub fn estimate_lambda_dt(gen: &Generator, t: usize, n: usize, mc_reps: usize, seed: u64) -> Result<MaxEstimate> {
    gen.validate()?;
    lambda_dt_from_designs(|r, i| gen.sample_design(n, rep_seed(seed, r), i as u64), t, mc_reps)
}

/// Index lists of the subsets a mode visits for one task.
fn subsets(
    mode: &SubsetMode,
    d: usize,
    rng_key: (u64, u64),
    task: Option<(&Matrix, &Vector, f64)>,
) -> Result<Vec<Vec<usize>>> {
    let from_mask = |mask: u64| (0..d).filter(|j| mask >> j & 1 == 1).collect::<Vec<_>>();
    match mode {
        SubsetMode::ExactEnum => Ok((1..1u64 << d).map(from_mask).collect()),
        SubsetMode::SampledSubsets { k } if covers_all(*k, d) => Ok((1..1u64 << d).map(from_mask).collect()),
        SubsetMode::SampledSubsets { k } => {
            let mut rng = substream(rng_key.0, rng_key.1, Tag::Subsets);
            Ok((0..*k)
                .map(|_| loop {
                    let e: Vec<usize> = (0..d).filter(|_| rng.random::<bool>()).collect();
                    if !e.is_empty() {
                        break e;
                    }
                })
                .collect())
        }
        SubsetMode::PathObserved { lo_factor } => {
            let (x, y, lambda2) = task.ok_or_else(|| Error::InvalidInput("path-observed subsets need responses".into()))?;
            let hi = 2.0 * (x * y).amax();
            if hi <= 0.0 {
                return Ok(Vec::new());
            }
            let mut seen: Vec<Vec<usize>> = Vec::new();
            for seg in lasso_path(x, y, lambda2, lo_factor * hi, hi)? {
                if !seg.active.is_empty() && !seen.contains(&seg.active) {
                    seen.push(seg.active.clone());
                }
            }
            Ok(seen)
        }
    }
}

/// `max_E f(E, spectrum of X_E X_Eᵀ)` over the given subsets of `g = XXᵀ`.
/// An empty subset list gives 0.
pub fn subset_max<F>(g: &Matrix, subsets: &[Vec<usize>], f: F) -> Result<f64>
where
    F: Fn(&[usize], &Spectrum) -> f64,
{
    subsets.iter().try_fold(0.0f64, |acc, e| {
        let s = Spectrum::of(&principal_submatrix(g, e), DEFAULT_RANK_TOLERANCE)?;
        Ok(acc.max(f(e, &s)))
    })
}

fn bias_warning(mode: &SubsetMode, d: usize) -> Option<String> {
    mode.is_biased(d)
        .then(|| format!("{mode:?} visits a subset of the 2^{d} - 1 sets; the estimate is biased downward"))
}

/// `Λ̃_D^T = E[max_{t,E} 1/(V(X_E X_Eᵀ) + λ₂)]`; `λ₂ = 0` gives the LASSO
/// constant. Draws share designs with [`estimate_lambda_dt`] at equal seeds.
pub fn estimate_lambda_tilde_dt(
    gen: &Generator,
    t: usize,
    n: usize,
    mc_reps: usize,
    mode: SubsetMode,
    lambda2: f64,
    seed: u64,
) -> Result<MaxEstimate> {
    gen.validate()?;
    check_reps(mc_reps, t)?;
    let d = gen.d();
    mode.validate(d)?;
    if !(lambda2.is_finite() && lambda2 >= 0.0) {
        return Err(Error::InvalidInput(format!("lambda2 must be finite and >= 0, got {lambda2}")));
    }
    let needs_y = matches!(mode, SubsetMode::PathObserved { .. });
    let per_draw = par_collect(mc_reps, |r| {
        let rs = rep_seed(seed, r);
        (0..t).try_fold(0.0f64, |acc, i| {
            let (x, y) = if needs_y {
                let task = gen.sample_task(n, 1, rs, i as u64);
                (task.x, Some(task.y))
            } else {
                (gen.sample_design(n, rs, i as u64), None)
            };
            let sets = subsets(&mode, d, (rs, i as u64), y.as_ref().map(|y| (&x, y, lambda2)))?;
            let v = subset_max(&gram(&x), &sets, |_, s| 1.0 / (s.smallest_nonzero() + lambda2))?;
            Ok(acc.max(v))
        })
    })?;
    Ok(MaxEstimate::new(per_draw, bias_warning(&mode, d)))
}

/// Expectation inside the validation-sampling term of the LASSO and
/// elastic-net bounds. `lambda1_bar` is in the bounds' convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubsetTerm {
    /// `max_E ‖y‖/√V_E + Λ̄√d/V_E`.
    Lasso { lambda1_bar: f64 },
    /// `max_E ‖y‖√V*_E/(V*_E + Λ₂) + Λ̄₁√d/(V_E + Λ₂)`, with `V*_E` the
    /// non-zero eigenvalue maximizing `√e/(e + Λ₂)`.
    ElasticNet { lambda1_bar: f64, lambda2: f64 },
}

impl SubsetTerm {
    /// The term for one task with `‖y‖ = y_norm`.
    pub fn eval(&self, y_norm: f64, d: usize, s: &Spectrum) -> f64 {
        let v = s.smallest_nonzero();
        let root_d = (d as f64).sqrt();
        match *self {
            SubsetTerm::Lasso { lambda1_bar } => y_norm / v.sqrt() + lambda1_bar * root_d / v,
            SubsetTerm::ElasticNet { lambda1_bar, lambda2 } => {
                let star = s
                    .nonzero()
                    .map(|e| e.sqrt() / (e + lambda2))
                    .fold(0.0, f64::max);
                y_norm * star + lambda1_bar * root_d / (v + lambda2)
            }
        }
    }

    fn lambda2(&self) -> f64 {
        match self {
            SubsetTerm::Lasso { .. } => 0.0,
            SubsetTerm::ElasticNet { lambda2, .. } => *lambda2,
        }
    }
}

/// `E_{X,y}[max_E term]` over `mc_reps` fresh tasks.
pub fn estimate_subset_term(
    gen: &Generator,
    n: usize,
    mc_reps: usize,
    mode: SubsetMode,
    term: SubsetTerm,
    seed: u64,
) -> Result<MaxEstimate> {
    gen.validate()?;
    check_reps(mc_reps, 1)?;
    let d = gen.d();
    mode.validate(d)?;
    let per_draw = par_collect(mc_reps, |r| {
        let task = gen.sample_task(n, 1, rep_seed(seed, r), 0);
        let sets = subsets(&mode, d, (rep_seed(seed, r), 0), Some((&task.x, &task.y, term.lambda2())))?;
        let y_norm = task.y.norm();
        subset_max(&gram(&task.x), &sets, |_, s| term.eval(y_norm, d, s))
    })?;
    Ok(MaxEstimate::new(per_draw, bias_warning(&mode, d)))
}

/// Single-task expectations entering the ridge bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub e_xv_norm: McEstimate,
    pub e_xv_norm_sq: McEstimate,
    pub e_y_over_sqrt_v: McEstimate,
    pub e_y_sq_over_v: McEstimate,
    pub e_ws_plus_noise: McEstimate,
    /// `E[‖w* − μ*‖ + ‖ε‖/√V(XXᵀ)]`.
    pub e_ws_centered_plus_noise: McEstimate,
}

/// Estimates [`Expectations`] from `mc_reps` fresh tasks of `n` training
/// columns (and one validation column each).
pub fn estimate_expectations(gen: &Generator, n: usize, mc_reps: usize, seed: u64) -> Result<Expectations> {
    gen.validate()?;
    check_reps(mc_reps, 1)?;
    let draws = par_collect(mc_reps, |r| {
        let task = gen.sample_task(n, 1, rep_seed(seed, r), 0);
        let v = Spectrum::of(&gram(&task.x), DEFAULT_RANK_TOLERANCE)?.smallest_nonzero();
        let xv = task.xv.column(0).norm();
        let y = task.y.norm();
        let w = task.w_star.clone().unwrap_or_else(|| Vector::zeros(gen.d()));
        let centered = (&w - gen.prior.mean_vec(gen.d())).norm();
        let eps = task.noise.as_ref().map_or(0.0, |e| e.norm()) / v.sqrt();
        Ok([xv, xv * xv, y / v.sqrt(), y * y / v, w.norm() + eps, centered + eps])
    })?;
    let col = |k: usize| McEstimate::from_samples(&draws.iter().map(|d| d[k]).collect::<Vec<_>>());
    Ok(Expectations {
        e_xv_norm: col(0),
        e_xv_norm_sq: col(1),
        e_y_over_sqrt_v: col(2),
        e_y_sq_over_v: col(3),
        e_ws_plus_noise: col(4),
        e_ws_centered_plus_noise: col(5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{InputDist, InputFamily, NoiseSpec, PriorSpec};

    fn gen(d: usize) -> Generator {
        Generator {
            input: InputDist::new(InputFamily::UniformEntries, 1.0, d),
            prior: PriorSpec::gaussian(1.0),
            noise: NoiseSpec::gaussian(0.5),
        }
    }

    #[test]
    fn orthonormal_designs_give_one() {
        let e = lambda_dt_from_designs(|_, _| Matrix::identity(3, 5), 4, 3).unwrap();
        assert_eq!(e.per_draw, vec![1.0; 3]);
    }

    #[test]
    fn per_draw_monotone_in_t() {
        let a = estimate_lambda_dt(&gen(3), 1, 6, 20, 5).unwrap();
        let b = estimate_lambda_dt(&gen(3), 16, 6, 20, 5).unwrap();
        assert!(a.per_draw.iter().zip(&b.per_draw).all(|(x, y)| x <= y));
    }

    #[test]
    fn single_coordinate_has_one_subset() {
        let g = gen(1);
        let plain = estimate_lambda_dt(&g, 3, 4, 10, 9).unwrap();
        let tilde = estimate_lambda_tilde_dt(&g, 3, 4, 10, SubsetMode::ExactEnum, 0.0, 9).unwrap();
        assert_eq!(plain.per_draw, tilde.per_draw);
    }

    #[test]
    fn full_sampling_equals_enumeration() {
        let g = gen(6);
        let exact = estimate_lambda_tilde_dt(&g, 2, 4, 5, SubsetMode::ExactEnum, 0.0, 1).unwrap();
        let sampled = estimate_lambda_tilde_dt(&g, 2, 4, 5, SubsetMode::SampledSubsets { k: 64 }, 0.0, 1).unwrap();
        assert_eq!(exact.per_draw, sampled.per_draw);
        assert!(sampled.warning.is_none());
    }

    #[test]
    fn enumeration_capped() {
        let r = estimate_lambda_tilde_dt(&gen(16), 1, 4, 1, SubsetMode::ExactEnum, 0.0, 0);
        assert!(matches!(r, Err(Error::DimensionTooLarge(_))));
    }

    #[test]
    fn en_star_eigenvalue_without_shift_is_smallest() {
        let s = Spectrum::from_eigenvalues(vec![4.0, 1.0, 0.25], 1e-10);
        let lasso = SubsetTerm::Lasso { lambda1_bar: 0.0 }.eval(2.0, 1, &s);
        let en = SubsetTerm::ElasticNet {
            lambda1_bar: 0.0,
            lambda2: 0.0,
        }
        .eval(2.0, 1, &s);
        assert_eq!(lasso, 4.0);
        assert_eq!(en, 4.0);
    }
}
