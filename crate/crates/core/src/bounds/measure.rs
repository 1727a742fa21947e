//! Assembling [`BoundInputs`] from an instance and its generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DEFAULT_RANK_TOLERANCE;
use crate::rng::{derive_seed, Tag};
use crate::tasks::{empirical_constants, Generator, ProblemInstance};
use crate::tuning::LossSpec;

use super::lambda::{
    estimate_expectations, estimate_lambda_dt, estimate_lambda_tilde_dt, estimate_subset_term, SubsetMode, SubsetTerm,
};
use super::{BoundInputs, ConstantsSource, TheoremId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    pub delta: f64,
    /// Monte Carlo draws behind each expectation.
    pub mc_reps: usize,
    /// Defaults to [`SubsetMode::auto`].
    #[serde(default)]
    pub subset_mode: Option<SubsetMode>,
    /// `Λ̄₁` in the solver's convention (largest `λ₁` searched).
    #[serde(default)]
    pub lambda1_max: Option<f64>,
    #[serde(default)]
    pub lambda2_min: Option<f64>,
    /// Center estimate `μ̂` for the re-centered bound.
    #[serde(default)]
    pub mu_hat: Option<Vec<f64>>,
    #[serde(default = "super::half")]
    pub lambda1_convention: f64,
    pub seed: u64,
}

impl MeasureOptions {
    pub fn new(delta: f64, mc_reps: usize, seed: u64) -> Self {
        MeasureOptions {
            delta,
            mc_reps,
            subset_mode: None,
            lambda1_max: None,
            lambda2_min: None,
            mu_hat: None,
            lambda1_convention: 0.5,
            seed,
        }
    }
}

/// Fills every input `theorem` needs. Maxima (`M`, `b_v`, `M̃`) come from
/// `inst`; expectations and `Λ` constants from fresh draws of `gen` at the
/// instance's `T` and `n`. `L` and `C` come from the loss when it is
/// bounded, otherwise from the instance's largest observed loss.
pub fn measure_bound_inputs(
    inst: &ProblemInstance,
    gen: &Generator,
    theorem: TheoremId,
    loss: &LossSpec,
    opts: &MeasureOptions,
) -> Result<BoundInputs> {
    if gen.d() != inst.d {
        return Err(Error::InvalidInput(format!(
            "generator has d = {}, instance has d = {}",
            gen.d(),
            inst.d
        )));
    }
    let (t, n, d) = (inst.t(), inst.n, inst.d);
    let mut p = BoundInputs::new(t, n, inst.n_v, d, opts.delta);
    p.lambda1_convention = opts.lambda1_convention;
    let seed = |k: u64| derive_seed(opts.seed, &[Tag::MonteCarlo as u64, k]);

    let emp = empirical_constants(inst, opts.mc_reps, DEFAULT_RANK_TOLERANCE)?;
    p.m = Some(emp.m);
    p.b_v = Some(emp.b_v);
    p.m_tilde = Some(emp.m_tilde);
    match (loss.bound(), loss.lipschitz()) {
        (Some(c), Some(l)) => {
            p.c = Some(c);
            p.l = Some(l);
        }
        _ => {
            p.c = Some(emp.c_hat);
            p.l = Some(emp.l_hat);
            p.constants_source = ConstantsSource::Empirical;
        }
    }

    let ex = estimate_expectations(gen, n, opts.mc_reps, seed(0))?;
    p.e_xv_norm = Some(ex.e_xv_norm.mean);
    p.e_xv_norm_sq = Some(ex.e_xv_norm_sq.mean);
    p.e_y_over_sqrt_v = Some(ex.e_y_over_sqrt_v.mean);
    p.e_y_sq_over_v = Some(ex.e_y_sq_over_v.mean);
    p.e_ws_plus_noise = Some(if theorem == TheoremId::RecenteredRidge {
        ex.e_ws_centered_plus_noise.mean
    } else {
        ex.e_ws_plus_noise.mean
    });

    let mode = opts.subset_mode.unwrap_or_else(|| SubsetMode::auto(d));
    let bar = |p: &BoundInputs| -> Result<f64> {
        Ok(p.lambda1_convention * opts.lambda1_max.ok_or(Error::MissingInput("lambda1_max"))?)
    };
    match theorem {
        TheoremId::Ridge | TheoremId::RidgeWellSpecified | TheoremId::RidgeAlternative => {
            p.lambda_dt = Some(estimate_lambda_dt(gen, t, n, opts.mc_reps, seed(1))?.mean());
        }
        TheoremId::RecenteredRidge => {
            p.lambda_dt = Some(estimate_lambda_dt(gen, t, n, opts.mc_reps, seed(1))?.mean());
            let mu_hat = opts.mu_hat.as_ref().ok_or(Error::MissingInput("mu_hat"))?;
            if mu_hat.len() != d {
                return Err(Error::InvalidInput(format!("mu_hat has length {}, expected {d}", mu_hat.len())));
            }
            let mu = gen.prior.mean_vec(d);
            p.mu_err = Some(mu_hat.iter().zip(mu.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt());
        }
        TheoremId::Lasso => {
            let lambda1_bar = bar(&p)?;
            p.lambda1_max = opts.lambda1_max;
            p.lambda_tilde_dt = Some(estimate_lambda_tilde_dt(gen, t, n, opts.mc_reps, mode, 0.0, seed(1))?.mean());
            p.e_lasso_term = Some(
                estimate_subset_term(gen, n, opts.mc_reps, mode, SubsetTerm::Lasso { lambda1_bar }, seed(2))?.mean(),
            );
        }
        TheoremId::ElasticNet => {
            let lambda1_bar = bar(&p)?;
            let lambda2 = opts.lambda2_min.ok_or(Error::MissingInput("lambda2_min"))?;
            p.lambda1_max = opts.lambda1_max;
            p.lambda2_min = Some(lambda2);
            p.lambda_tilde_dt_en =
                Some(estimate_lambda_tilde_dt(gen, t, n, opts.mc_reps, mode, lambda2, seed(1))?.mean());
            p.e_en_term = Some(
                estimate_subset_term(
                    gen,
                    n,
                    opts.mc_reps,
                    mode,
                    SubsetTerm::ElasticNet { lambda1_bar, lambda2 },
                    seed(2),
                )?
                .mean(),
            );
        }
    }
    Ok(p)
}
