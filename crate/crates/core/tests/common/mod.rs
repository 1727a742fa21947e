#![allow(dead_code)]

//! Reference implementations used as oracles. None of them call into the
//! library's linear algebra.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use regtune::linalg::{Matrix, Vector};
use regtune::tasks::{Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// A task with a sparse planted signal and unit noise.
pub fn sparse_task(rng: &mut ChaCha8Rng, d: usize, n: usize) -> (Matrix, Vector) {
    let x = gaussian_matrix(rng, d, n);
    let w = Vector::from_fn(d, |j, _| if j % 3 == 0 { 1.0 + j as f64 / d as f64 } else { 0.0 });
    let y = x.tr_mul(&w) + gaussian_vector(rng, n);
    (x, y)
}

pub fn generator(family: InputFamily, d: usize, omega: f64, sigma: f64) -> Generator {
    Generator {
        input: InputDist::new(family, 1.0, d),
        prior: PriorSpec::gaussian(omega),
        noise: NoiseSpec::gaussian(sigma),
    }
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// `XXᵀ` by the textbook triple loop.
pub fn naive_gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x.len();
    let n = x.first().map_or(0, Vec::len);
    let mut g = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..n {
                s += x[i][k] * x[j][k];
            }
            g[i][j] = s;
        }
    }
    g
}

/// `XᵀX`, the `n x n` companion Gram matrix.
pub fn naive_gram_t(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x.len();
    let n = x.first().map_or(0, Vec::len);
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..d).map(|k| x[k][i] * x[k][j]).sum();
        }
    }
    g
}

/// Number of eigenvalues of symmetric `a` below `s`, by Sylvester's law of
/// inertia applied to an unpivoted LDLᵀ of `a − sI`.
pub fn count_below(a: &[Vec<f64>], s: f64) -> usize {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= s;
    }
    let scale = a.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut negatives = 0;
    for p in 0..k {
        let mut piv = m[p][p];
        if piv.abs() < 1e-300 {
            piv = -1e-14 * scale;
        }
        if piv < 0.0 {
            negatives += 1;
        }
        for i in p + 1..k {
            let f = m[i][p] / piv;
            for j in p + 1..k {
                m[i][j] -= f * m[p][j];
            }
        }
    }
    negatives
}

/// The `index`-th smallest eigenvalue (0-based) of a PSD matrix by bisection.
pub fn bisect_eigenvalue(a: &[Vec<f64>], index: usize) -> f64 {
    let hi0: f64 = (0..a.len()).map(|i| a[i][i]).sum::<f64>() + 1.0;
    let (mut lo, mut hi) = (-1.0, hi0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(a, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi0 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenvalue of `XXᵀ` when `n ≥ d`, otherwise of `XᵀX`; either
/// way the smallest non-zero eigenvalue of a generic design.
pub fn smallest_nonzero_oracle(x: &[Vec<f64>]) -> f64 {
    let (d, n) = (x.len(), x[0].len());
    if n >= d {
        bisect_eigenvalue(&naive_gram(x), 0)
    } else {
        bisect_eigenvalue(&naive_gram_t(x), 0)
    }
}

/// Conjugate gradients for SPD `a`.
pub fn cg(a: &[Vec<f64>], b: &[f64], tol: f64) -> Vec<f64> {
    let k = b.len();
    let mul = |v: &[f64]| -> Vec<f64> { (0..k).map(|i| (0..k).map(|j| a[i][j] * v[j]).sum()).collect() };
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(x, y)| x * y).sum() };
    let mut x = vec![0.0; k];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bnorm = dot(b, b).sqrt().max(1e-300);
    for _ in 0..10 * k + 100 {
        if rr.sqrt() <= tol * bnorm {
            break;
        }
        let ap = mul(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..k {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        for i in 0..k {
            p[i] = r[i] + rr_new / rr * p[i];
        }
        rr = rr_new;
    }
    x
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, v)| {
        let mut r = r.clone();
        r.push(*v);
        r
    }).collect();
    for p in 0..k {
        let best = (p..k).max_by(|&i, &j| m[i][p].abs().total_cmp(&m[j][p].abs())).unwrap();
        m.swap(p, best);
        for i in p + 1..k {
            let f = m[i][p] / m[p][p];
            for j in p..=k {
                m[i][j] -= f * m[p][j];
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][k] - s) / m[i][i];
    }
    x
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
