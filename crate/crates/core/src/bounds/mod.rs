//! Generalization bounds for hyperparameter tuning, evaluated from measured
//! constants.
//!
//! [`eval_bound`] transcribes each bound's right-hand side term by term.
//! The distribution-dependent constants come from [`estimate_lambda_dt`],
//! [`estimate_lambda_tilde_dt`], [`estimate_subset_term`] and
//! [`estimate_expectations`]; the complexity terms themselves can be checked
//! against [`rademacher_estimate`].

mod lambda;
mod measure;
mod rademacher;

pub use lambda::{
    estimate_expectations, estimate_lambda_dt, estimate_lambda_tilde_dt, estimate_subset_term,
    lambda_dt_from_designs, subset_max, Expectations, MaxEstimate, SubsetMode, SubsetTerm,
    DEFAULT_SUBSET_SAMPLES, EXACT_ENUM_MAX_D,
};
pub use measure::{measure_bound_inputs, MeasureOptions};
pub use rademacher::{
    enumerate_task_level, khintchine_check, loss_table, rademacher_estimate, KhintchineCheck, LossTable,
    RademacherEstimate,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

/// Which bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// Ridge, general tasks.
    Ridge,
    /// Ridge, well-specified linear tasks.
    RidgeWellSpecified,
    /// LASSO over `λ₁ ∈ [Λ_lo, Λ̄]`.
    Lasso,
    /// Elastic net over `λ₁ ≤ Λ̄₁`, `λ₂ ≥ Λ₂`.
    ElasticNet,
    /// Re-centered ridge with a fixed center estimate `μ̂`.
    RecenteredRidge,
    /// Ridge via a covering argument over the expected validation loss.
    RidgeAlternative,
}

impl TheoremId {
    pub const ALL: [TheoremId; 6] = [
        TheoremId::Ridge,
        TheoremId::RidgeWellSpecified,
        TheoremId::Lasso,
        TheoremId::ElasticNet,
        TheoremId::RecenteredRidge,
        TheoremId::RidgeAlternative,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::Ridge => "ridge",
            TheoremId::RidgeWellSpecified => "ridge_well_specified",
            TheoremId::Lasso => "lasso",
            TheoremId::ElasticNet => "elastic_net",
            TheoremId::RecenteredRidge => "recentered_ridge",
            TheoremId::RidgeAlternative => "ridge_alternative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Where `L` and `C` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsSource {
    #[default]
    Supplied,
    /// Measured as `C_hat` (largest observed loss) and `L_hat = 2√C_hat`.
    Empirical,
}

fn half() -> f64 {
    0.5
}

/// Every quantity any bound needs. Counts are required; the rest are
/// optional and checked against the selected bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub t: usize,
    pub n: usize,
    pub n_v: usize,
    pub d: usize,
    pub delta: f64,
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub constants_source: ConstantsSource,
    /// `max ‖Xy‖`.
    #[serde(default)]
    pub m: Option<f64>,
    /// `max ‖x_v‖`.
    #[serde(default)]
    pub b_v: Option<f64>,
    /// `max ‖y‖/√V(XXᵀ)`.
    #[serde(default)]
    pub m_tilde: Option<f64>,
    /// `Λ_D^T`.
    #[serde(default)]
    pub lambda_dt: Option<f64>,
    /// `Λ̃_D^T`, the max over tasks and subsets of `1/V(X_E X_Eᵀ)`.
    #[serde(default)]
    pub lambda_tilde_dt: Option<f64>,
    /// As `lambda_tilde_dt` with `Λ₂` added to each `V`.
    #[serde(default)]
    pub lambda_tilde_dt_en: Option<f64>,
    #[serde(default)]
    pub e_xv_norm: Option<f64>,
    #[serde(default)]
    pub e_xv_norm_sq: Option<f64>,
    /// `E[‖y‖/√V(XXᵀ)]`.
    #[serde(default)]
    pub e_y_over_sqrt_v: Option<f64>,
    /// `E[‖y‖²/V(XXᵀ)]`.
    #[serde(default)]
    pub e_y_sq_over_v: Option<f64>,
    /// `E[‖w*‖ + ‖ε‖/√V(XXᵀ)]`.
    #[serde(default)]
    pub e_ws_plus_noise: Option<f64>,
    /// `Λ̄₁`, the largest `λ₁` searched.
    #[serde(default)]
    pub lambda1_max: Option<f64>,
    /// `Λ₂`, the smallest `λ₂` searched.
    #[serde(default)]
    pub lambda2_min: Option<f64>,
    /// `E[max_E (‖y‖/√V_E + Λ̄√d/V_E)]`.
    #[serde(default)]
    pub e_lasso_term: Option<f64>,
    /// `E[max_E (‖y‖√V*_E/(V*_E+Λ₂) + Λ̄₁√d/(V_E+Λ₂))]`.
    #[serde(default)]
    pub e_en_term: Option<f64>,
    /// `‖μ̂ − μ*‖`.
    #[serde(default)]
    pub mu_err: Option<f64>,
    /// Multiplier turning the `λ₁` of `‖Xᵀw−y‖² + λ₁‖w‖₁` into the
    /// `λ₁` of the bounds, whose active-set solution is
    /// `(X_E X_Eᵀ)⁻¹(X_E y − λ₁ s)`.
    #[serde(default = "half")]
    pub lambda1_convention: f64,
}

impl BoundInputs {
    pub fn new(t: usize, n: usize, n_v: usize, d: usize, delta: f64) -> Self {
        BoundInputs {
            t,
            n,
            n_v,
            d,
            delta,
            l: None,
            c: None,
            constants_source: ConstantsSource::Supplied,
            m: None,
            b_v: None,
            m_tilde: None,
            lambda_dt: None,
            lambda_tilde_dt: None,
            lambda_tilde_dt_en: None,
            e_xv_norm: None,
            e_xv_norm_sq: None,
            e_y_over_sqrt_v: None,
            e_y_sq_over_v: None,
            e_ws_plus_noise: None,
            lambda1_max: None,
            lambda2_min: None,
            e_lasso_term: None,
            e_en_term: None,
            mu_err: None,
            lambda1_convention: 0.5,
        }
    }

    fn named(&self) -> [(&'static str, Option<f64>); 20] {
        [
            ("l", self.l),
            ("c", self.c),
            ("m", self.m),
            ("b_v", self.b_v),
            ("m_tilde", self.m_tilde),
            ("lambda_dt", self.lambda_dt),
            ("lambda_tilde_dt", self.lambda_tilde_dt),
            ("lambda_tilde_dt_en", self.lambda_tilde_dt_en),
            ("e_xv_norm", self.e_xv_norm),
            ("e_xv_norm_sq", self.e_xv_norm_sq),
            ("e_y_over_sqrt_v", self.e_y_over_sqrt_v),
            ("e_y_sq_over_v", self.e_y_sq_over_v),
            ("e_ws_plus_noise", self.e_ws_plus_noise),
            ("lambda1_max", self.lambda1_max),
            ("lambda2_min", self.lambda2_min),
            ("e_lasso_term", self.e_lasso_term),
            ("e_en_term", self.e_en_term),
            ("mu_err", self.mu_err),
            ("lambda1_convention", Some(self.lambda1_convention)),
            ("delta", Some(self.delta)),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.t == 0 || self.n == 0 || self.n_v == 0 || self.d == 0 {
            return Err(Error::InvalidInput("T, n, n_v and d must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        for (name, v) in self.named() {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        Ok(())
    }
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    v.ok_or(Error::MissingInput(name))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub terms: Vec<BoundTerm>,
    /// Pairwise sum of the term values, in order.
    pub total: f64,
    pub inputs: BoundInputs,
}

impl BoundReport {
    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }
}

/// Evaluates the right-hand side of `theorem` at `inputs`.
pub fn eval_bound(theorem: TheoremId, inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let p = inputs;
    let t = p.t as f64;
    let n_v = p.n_v as f64;
    let d = p.d as f64;
    let delta = p.delta;
    let root_t = t.sqrt();
    let root_nvt = (n_v * t).sqrt();

    let l = || need(p.l, "l");
    let c = || need(p.c, "c");
    let m = || need(p.m, "m");
    let b_v = || need(p.b_v, "b_v");
    let e_xv = || need(p.e_xv_norm, "e_xv_norm");
    let e_xv_sq = || need(p.e_xv_norm_sq, "e_xv_norm_sq");
    let lam = || need(p.lambda_dt, "lambda_dt");
    let loss_conc = || -> Result<f64> { Ok(5.0 * c()? * ((16.0 / delta).ln() / (2.0 * t)).sqrt()) };

    let ridge_terms = |second: f64| -> Result<Vec<(&'static str, f64)>> {
        Ok(vec![
            ("task_sampling", 2.0 * m()? * l()? * lam()? * e_xv()? / root_t),
            ("validation_sampling", 2.0 * l()? * e_xv_sq()?.sqrt() * second / root_nvt),
            (
                "validation_concentration",
                2.0 * m()? * l()? * b_v()? * lam()? * ((4.0 * t / delta).ln() / 2.0).sqrt() / root_nvt,
            ),
            ("loss_concentration", loss_conc()?),
        ])
    };

    let terms: Vec<(&'static str, f64)> = match theorem {
        TheoremId::Ridge => ridge_terms(need(p.e_y_over_sqrt_v, "e_y_over_sqrt_v")?)?,
        TheoremId::RidgeWellSpecified => ridge_terms(need(p.e_ws_plus_noise, "e_ws_plus_noise")?)?,
        TheoremId::RecenteredRidge => {
            let mut v = vec![("center_error", l()? * e_xv()? * need(p.mu_err, "mu_err")?)];
            v.extend(ridge_terms(need(p.e_ws_plus_noise, "e_ws_plus_noise")?)?);
            v
        }
        TheoremId::Lasso => {
            let bar = p.lambda1_convention * need(p.lambda1_max, "lambda1_max")?;
            let tilde = need(p.lambda_tilde_dt, "lambda_tilde_dt")?;
            vec![
                ("task_sampling", 2.0 * l()? * bar * tilde * e_xv()? * d.sqrt() / root_t),
                (
                    "validation_sampling",
                    2.0 * l()? * e_xv_sq()?.sqrt() / root_nvt * need(p.e_lasso_term, "e_lasso_term")?,
                ),
                (
                    "validation_concentration",
                    l()? * b_v()? * bar * tilde / root_nvt * (2.0 * (t / delta).ln()).sqrt(),
                ),
                ("loss_concentration", loss_conc()?),
            ]
        }
        TheoremId::ElasticNet => {
            let bar = p.lambda1_convention * need(p.lambda1_max, "lambda1_max")?;
            let tilde = need(p.lambda_tilde_dt_en, "lambda_tilde_dt_en")?;
            need(p.lambda2_min, "lambda2_min")?;
            vec![
                (
                    "task_sampling",
                    2.0 * l()? * bar * d.sqrt() / root_t
                        * (e_xv()? + b_v()? * ((t / delta).ln() / (2.0 * n_v)).sqrt())
                        * tilde,
                ),
                (
                    "validation_sampling",
                    2.0 * l()? * e_xv_sq()?.sqrt() / root_nvt * need(p.e_en_term, "e_en_term")?,
                ),
                ("loss_concentration", loss_conc()?),
            ]
        }
        TheoremId::RidgeAlternative => vec![
            ("task_sampling", 2.0 * m()? * l()? * lam()? * e_xv()? / root_t),
            (
                "validation_sampling",
                2.0 * l()? / n_v.sqrt() * e_xv_sq()?.sqrt() * need(p.e_y_sq_over_v, "e_y_sq_over_v")?.sqrt(),
            ),
            (
                "validation_concentration",
                2.0 * l()? * need(p.m_tilde, "m_tilde")? / (n_v.sqrt() * t.powf(0.25))
                    * e_xv_sq()?.sqrt()
                    * ((4.0 / delta).ln() / 2.0).powf(0.25),
            ),
            ("loss_concentration", loss_conc()?),
        ],
    };
    let values: Vec<f64> = terms.iter().map(|t| t.1).collect();
    Ok(BoundReport {
        theorem,
        total: pairwise_sum(&values),
        terms: terms
            .into_iter()
            .map(|(label, value)| BoundTerm {
                label: label.to_string(),
                value,
            })
            .collect(),
        inputs: inputs.clone(),
    })
}

/// Distribution-free reference rates, unit constants:
/// `(√((ln d + ln(1/δ))/T), √((d + ln(1/δ))/T))`. The second is the
/// pseudo-dimension-`d` rate of earlier worst-case analyses.
pub fn reference_curve_distfree(d: usize, t: usize, delta: f64) -> Result<(f64, f64)> {
    if d == 0 || t == 0 {
        return Err(Error::InvalidInput("d and T must be >= 1".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1], got {delta}")));
    }
    let (d, t, log_inv) = (d as f64, t as f64, (1.0 / delta).ln());
    Ok((((d.ln() + log_inv) / t).sqrt(), ((d + log_inv) / t).sqrt()))
}
