//! Summation and Monte Carlo summary helpers.
//!
//! Every reduction in the crate goes through [`stable_sum`] or
//! [`pairwise_sum`], so results do not depend on how work was split across
//! threads.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Pairwise (cascade) summation in the given order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().fold(0.0, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Permutation-invariant sum: values are sorted by total order first.
pub fn stable_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    pairwise_sum(&values)
}

/// Permutation-invariant mean. Empty input gives NaN.
pub fn stable_mean(values: Vec<f64>) -> f64 {
    let n = values.len();
    stable_sum(values) / n as f64
}

/// Mean of a sample with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = stable_mean(samples.to_vec());
        let se = if n > 1 {
            let sq = stable_sum(samples.iter().map(|v| (v - mean) * (v - mean)).collect());
            (sq / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            se,
            samples: n,
        }
    }

    pub fn ci95(&self) -> (f64, f64) {
        normal_ci(self.mean, self.se)
    }
}

pub fn normal_ci(mean: f64, se: f64) -> (f64, f64) {
    (mean - Z95 * se, mean + Z95 * se)
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        hi
                    } else if i == 0 {
                        lo
                    } else {
                        (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}
