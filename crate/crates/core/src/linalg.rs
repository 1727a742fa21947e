//! Dense kernels: Gram products, Gram spectra and shifted symmetric solves.
//!
//! Inputs follow the column-per-example layout: a design `X` is `d x n` and
//! its Gram matrix is the `d x d` product `X Xᵀ`.
//!
//! "Smallest eigenvalue" always means the smallest *non-zero* eigenvalue of
//! the Gram matrix, where non-zero is decided relative to the largest
//! eigenvalue (see [`Spectrum`]).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative rank tolerance: eigenvalues at or below
/// `DEFAULT_RANK_TOLERANCE * e_max` count as zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-10;

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Rejects empty matrices and non-finite entries.
pub fn check_matrix(m: &Matrix, name: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput(format!(
            "{name} must have at least one row and column"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// `X Xᵀ`, symmetrized on return.
pub fn gram(x: &Matrix) -> Matrix {
    let mut g = x * x.transpose();
    symmetrize(&mut g);
    g
}

fn symmetrize(g: &mut Matrix) {
    let d = g.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
}

/// Largest `|G_ij - G_ji|`.
pub fn asymmetry(g: &Matrix) -> f64 {
    let d = g.nrows();
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(g: &Matrix) -> Result<()> {
    if g.nrows() != g.ncols() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let asym = asymmetry(g);
    if asym > SYMMETRY_TOLERANCE * g.amax() {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

/// Eigenvalues of a PSD Gram matrix, sorted nonincreasing and clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    rank_tolerance: f64,
}

impl Spectrum {
    pub fn from_eigenvalues(mut values: Vec<f64>, rank_tolerance: f64) -> Self {
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Spectrum {
            eigenvalues: values,
            rank_tolerance,
        }
    }

    pub fn of(g: &Matrix, rank_tolerance: f64) -> Result<Self> {
        check_symmetric(g)?;
        let values = g.symmetric_eigenvalues();
        Ok(Self::from_eigenvalues(values.iter().copied().collect(), rank_tolerance))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    fn cutoff(&self) -> f64 {
        self.rank_tolerance * self.largest()
    }

    /// Eigenvalues treated as non-zero, nonincreasing.
    pub fn nonzero(&self) -> impl Iterator<Item = f64> + '_ {
        let cut = self.cutoff();
        self.eigenvalues.iter().copied().filter(move |&e| e > cut)
    }

    pub fn rank(&self) -> usize {
        self.nonzero().count()
    }

    /// `V(G)`; `+inf` when every eigenvalue is zero.
    pub fn smallest_nonzero(&self) -> f64 {
        self.nonzero().last().unwrap_or(f64::INFINITY)
    }
}

/// Smallest non-zero eigenvalue of a symmetric PSD matrix.
pub fn smallest_nonzero_eig(g: &Matrix, rank_tolerance: f64) -> Result<f64> {
    Ok(Spectrum::of(g, rank_tolerance)?.smallest_nonzero())
}

/// Solves `(G + shift I) x = b` through a Cholesky factorization.
pub fn solve_shifted(g: &Matrix, shift: f64, b: &Vector) -> Result<Vector> {
    if !shift.is_finite() || shift < 0.0 {
        return Err(Error::InvalidInput(format!(
            "shift must be finite and nonnegative, got {shift}"
        )));
    }
    check_symmetric(g)?;
    if b.len() != g.nrows() {
        return Err(Error::InvalidInput(format!(
            "right-hand side has length {}, expected {}",
            b.len(),
            g.nrows()
        )));
    }
    if shift == 0.0 {
        let spec = Spectrum::of(g, DEFAULT_RANK_TOLERANCE)?;
        if spec.rank() < g.nrows() {
            return Err(Error::Singular);
        }
    }
    let mut a = g.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += shift;
    }
    if a.nrows() == 1 {
        return if a[(0, 0)] > 0.0 {
            Ok(b / a[(0, 0)])
        } else {
            Err(Error::Singular)
        };
    }
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.solve(b)),
        None => {
            // Roundoff can push a barely-definite matrix out of Cholesky's reach.
            let eig = SymmetricEigen::new(a);
            if eig.eigenvalues.iter().any(|&e| e <= 0.0) {
                return Err(Error::Singular);
            }
            let proj = eig.eigenvectors.transpose() * b;
            let scaled = proj.component_div(&eig.eigenvalues);
            Ok(&eig.eigenvectors * scaled)
        }
    }
}

/// `(A + shift I)⁻¹ b` by Cholesky alone; `None` if the factorization fails.
pub fn cholesky_shifted_solve(a: &Matrix, shift: f64, b: &Vector) -> Option<Vector> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += shift;
    }
    m.cholesky().map(|ch| ch.solve(b))
}

/// Cached eigendecomposition `G = V diag(values) Vᵀ` for many shifted solves.
#[derive(Debug, Clone)]
pub struct GramEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl GramEigen {
    pub fn new(g: &Matrix) -> Result<Self> {
        check_symmetric(g)?;
        let eig = SymmetricEigen::new(g.clone());
        Ok(GramEigen {
            values: eig.eigenvalues.iter().map(|v| v.max(0.0)).collect(),
            vectors: eig.eigenvectors,
        })
    }

    pub fn spectrum(&self, rank_tolerance: f64) -> Spectrum {
        Spectrum::from_eigenvalues(self.values.clone(), rank_tolerance)
    }
}

/// Principal submatrix `G[idx, idx]`.
pub fn principal_submatrix(g: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_of_identity_is_identity() {
        assert_eq!(gram(&Matrix::identity(2, 2)), Matrix::identity(2, 2));
    }

    #[test]
    fn gram_of_row_vector() {
        let x = Matrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert_eq!(gram(&x), Matrix::from_element(1, 1, 5.0));
    }

    #[test]
    fn smallest_nonzero_of_identity() {
        let v = smallest_nonzero_eig(&Matrix::identity(3, 3), 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_eigenvalue_is_skipped() {
        let g = Matrix::from_diagonal(&Vector::from_vec(vec![9.0, 0.0, 4.0]));
        assert_eq!(smallest_nonzero_eig(&g, 1e-10).unwrap(), 4.0);
    }

    #[test]
    fn zero_matrix_signals_infinity() {
        let g = Matrix::zeros(3, 3);
        assert!(smallest_nonzero_eig(&g, 1e-10).unwrap().is_infinite());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let g = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            smallest_nonzero_eig(&g, 1e-10),
            Err(Error::NonSymmetric(_))
        ));
    }

    #[test]
    fn shifted_identity_system() {
        let x = solve_shifted(&Matrix::identity(2, 2), 1.0, &Vector::from_vec(vec![2.0, 4.0])).unwrap();
        assert!((x - Vector::from_vec(vec![1.0, 2.0])).amax() < 1e-15);
    }

    #[test]
    fn shifted_scalar_system() {
        let g = Matrix::from_element(1, 1, 4.0);
        let x = solve_shifted(&g, 2.0, &Vector::from_element(1, 6.0)).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unshifted_singular_system_errors() {
        let g = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(
            solve_shifted(&g, 0.0, &Vector::from_vec(vec![1.0, 1.0])),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn negative_shift_rejected() {
        let g = Matrix::identity(2, 2);
        assert!(solve_shifted(&g, -1.0, &Vector::zeros(2)).is_err());
    }
}
