use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{normal_ci, pairwise_sum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// Normal 95% interval for the slope.
    pub ci: (f64, f64),
    /// Whether per-point standard errors were used as weights.
    pub weighted: bool,
}

/// Least-squares line through `(ln x, ln y)`.
///
/// Points are weighted by `(y/se)²`, the inverse variance of `ln y` under the
/// delta method, when every `se` is positive; otherwise equally. The slope's
/// standard error uses the residual scale with `k − 2` degrees of freedom.
pub fn fit_loglog_slope(points: &[(f64, f64, f64)]) -> Result<SlopeFit> {
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::NonPositive(format!("point (x = {}, y = {})", p.0, p.1)));
    }
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!("slope fit needs >= 3 points, got {}", points.len())));
    }
    let weighted = points.iter().all(|p| p.2 > 0.0 && p.2.is_finite());
    let w: Vec<f64> = points
        .iter()
        .map(|p| if weighted { (p.1 / p.2).powi(2) } else { 1.0 })
        .collect();
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let sum = |f: &dyn Fn(usize) -> f64| pairwise_sum(&(0..points.len()).map(f).collect::<Vec<_>>());

    let sw = sum(&|i| w[i]);
    let mx = sum(&|i| w[i] * lx[i]) / sw;
    let my = sum(&|i| w[i] * ly[i]) / sw;
    let sxx = sum(&|i| w[i] * (lx[i] - mx).powi(2));
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("slope fit needs at least two distinct x".into()));
    }
    let slope = sum(&|i| w[i] * (lx[i] - mx) * (ly[i] - my)) / sxx;
    let intercept = my - slope * mx;
    let rss = sum(&|i| w[i] * (ly[i] - intercept - slope * lx[i]).powi(2));
    let slope_se = (rss / (points.len() - 2) as f64 / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_se,
        ci: normal_ci(slope, slope_se),
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 10.0].iter().map(|&x| (x, 3.0 * x * x, 0.0)).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(!f.weighted);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pts = [(1.0, 4.0, 0.1), (2.0, 4.0, 0.1), (8.0, 4.0, 0.1)];
        let f = fit_loglog_slope(&pts).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!(f.ci.0 <= 0.0 && 0.0 <= f.ci.1 + 1e-12);
    }

    #[test]
    fn nonpositive_rejected() {
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0, 0.0), (2.0, -1.0, 0.0), (3.0, 1.0, 0.0)]),
            Err(Error::NonPositive(_))
        ));
    }
}
