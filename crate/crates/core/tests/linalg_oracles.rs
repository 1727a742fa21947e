mod common;

use common::*;
use rand::Rng;
use regtune::linalg::{gram, principal_submatrix, smallest_nonzero_eig, solve_shifted, Spectrum, Vector, DEFAULT_RANK_TOLERANCE};

#[test]
fn gram_matches_triple_loop() {
    let mut r = rng(1);
    for _ in 0..20 {
        let (d, n) = (r.random_range(1..12), r.random_range(1..30));
        let x = gaussian_matrix(&mut r, d, n);
        let g = gram(&x);
        let naive = naive_gram(&to_rows(&x));
        for i in 0..d {
            for j in 0..d {
                assert!((g[(i, j)] - naive[i][j]).abs() <= 1e-12 * (1.0 + naive[i][j].abs()));
            }
        }
        assert_eq!(g, g.transpose(), "gram must be exactly symmetric");
    }
}

#[test]
fn smallest_eigenvalue_matches_bisection() {
    let mut r = rng(2);
    for _ in 0..30 {
        let d = r.random_range(1..10);
        let n = r.random_range(d..3 * d + 5);
        let x = gaussian_matrix(&mut r, d, n);
        let got = smallest_nonzero_eig(&gram(&x), DEFAULT_RANK_TOLERANCE).unwrap();
        let want = smallest_nonzero_oracle(&to_rows(&x));
        assert!((got - want).abs() <= 1e-9 * (1.0 + want), "{got} vs {want}");
    }
}

#[test]
fn rank_deficient_design_uses_companion_spectrum() {
    // With n < d, the non-zero eigenvalues of XXᵀ are those of XᵀX.
    let mut r = rng(3);
    for _ in 0..20 {
        let d = r.random_range(4..12);
        let n = r.random_range(1..d);
        let x = gaussian_matrix(&mut r, d, n);
        let s = Spectrum::of(&gram(&x), DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(s.rank(), n);
        let want = bisect_eigenvalue(&naive_gram_t(&to_rows(&x)), 0);
        assert!((s.smallest_nonzero() - want).abs() <= 1e-9 * (1.0 + want));
    }
}

#[test]
fn shifted_solve_matches_conjugate_gradients() {
    let mut r = rng(4);
    for _ in 0..20 {
        let d = r.random_range(1..15);
        let n = r.random_range(1..30);
        let x = gaussian_matrix(&mut r, d, n);
        let b = gaussian_vector(&mut r, d);
        let shift = r.random_range(0.1..5.0);
        let got = solve_shifted(&gram(&x), shift, &b).unwrap();
        let mut a = naive_gram(&to_rows(&x));
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += shift;
        }
        let want = cg(&a, b.as_slice(), 1e-14);
        assert!(max_abs_diff(got.as_slice(), &want) <= 1e-9);
    }
}

#[test]
fn principal_submatrix_is_gram_of_selected_rows() {
    let mut r = rng(5);
    let x = gaussian_matrix(&mut r, 7, 11);
    let idx = [0, 3, 4, 6];
    let sub = principal_submatrix(&gram(&x), &idx);
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| to_rows(&x)[i].clone()).collect();
    let naive = naive_gram(&rows);
    for i in 0..idx.len() {
        for j in 0..idx.len() {
            assert!((sub[(i, j)] - naive[i][j]).abs() <= 1e-12);
        }
    }
}

#[test]
fn scalar_solve_is_plain_division() {
    let g = regtune::linalg::Matrix::from_element(1, 1, 1.0);
    let v = solve_shifted(&g, 1.0, &Vector::from_element(1, 6.0)).unwrap();
    assert_eq!(v[0], 3.0);
}
