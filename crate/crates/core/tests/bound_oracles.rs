mod common;

use common::*;
use regtune::bounds::*;
use regtune::linalg::gram;
use regtune::rng::{derive_seed, Tag};
use regtune::tasks::{sample_instance, InputFamily};
use regtune::tuning::{Family, LossSpec, SearchSpec};

#[test]
fn lambda_dt_matches_an_independent_monte_carlo() {
    let gen = generator(InputFamily::UniformEntries, 3, 1.0, 0.5);
    let (t, n, reps, seed) = (4, 9, 25, 77);
    let est = estimate_lambda_dt(&gen, t, n, reps, seed).unwrap();
    let mut total = 0.0;
    for r in 0..reps {
        let rs = derive_seed(seed, &[Tag::MonteCarlo as u64, r as u64]);
        let worst = (0..t)
            .map(|i| 1.0 / smallest_nonzero_oracle(&to_rows(&gen.sample_design(n, rs, i as u64))))
            .fold(0.0, f64::max);
        assert!((est.per_draw[r] - worst).abs() <= 1e-8 * worst);
        total += worst;
    }
    let mean = total / reps as f64;
    assert!((est.mean() - mean).abs() <= 1e-8 * mean);
}

/// Max over all non-empty subsets of `1/(V(X_E X_Eᵀ) + λ₂)` by an explicit
/// double loop over index sets.
fn brute_force_subsets(x: &[Vec<f64>], lambda2: f64) -> f64 {
    let d = x.len();
    let g = naive_gram(x);
    let mut best = 0.0_f64;
    for mask in 1u32..(1 << d) {
        let idx: Vec<usize> = (0..d).filter(|j| mask >> j & 1 == 1).collect();
        let mut sub = vec![vec![0.0; idx.len()]; idx.len()];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub[a][b] = g[i][j];
            }
        }
        best = best.max(1.0 / (bisect_eigenvalue(&sub, 0) + lambda2));
    }
    best
}

#[test]
fn subset_maximum_matches_brute_force_at_d8() {
    let gen = generator(InputFamily::GaussianEntries, 8, 1.0, 0.5);
    let (n, seed) = (20, 5);
    for &l2 in &[0.0, 0.7] {
        let est = estimate_lambda_tilde_dt(&gen, 2, n, 3, SubsetMode::ExactEnum, l2, seed).unwrap();
        for r in 0..3 {
            let rs = derive_seed(seed, &[Tag::MonteCarlo as u64, r as u64]);
            let want = (0..2)
                .map(|i| brute_force_subsets(&to_rows(&gen.sample_design(n, rs, i)), l2))
                .fold(0.0, f64::max);
            assert!((est.per_draw[r] - want).abs() <= 1e-8 * want, "{} vs {want}", est.per_draw[r]);
        }
    }
}

#[test]
fn full_rank_subset_maximum_is_the_full_design() {
    // Eigenvalue interlacing: no principal submatrix has a smaller minimum.
    let gen = generator(InputFamily::GaussianEntries, 5, 1.0, 0.5);
    let plain = estimate_lambda_dt(&gen, 3, 30, 20, 8).unwrap();
    let tilde = estimate_lambda_tilde_dt(&gen, 3, 30, 20, SubsetMode::ExactEnum, 0.0, 8).unwrap();
    for (a, b) in plain.per_draw.iter().zip(&tilde.per_draw) {
        assert!((a - b).abs() <= 1e-10 * a);
    }
}

#[test]
fn exhaustive_sampling_equals_enumeration() {
    let gen = generator(InputFamily::GaussianEntries, 4, 1.0, 0.5);
    let a = estimate_lambda_tilde_dt(&gen, 2, 12, 5, SubsetMode::ExactEnum, 0.2, 1).unwrap();
    let b = estimate_lambda_tilde_dt(&gen, 2, 12, 5, SubsetMode::SampledSubsets { k: 15 }, 0.2, 1).unwrap();
    assert_eq!(a.per_draw, b.per_draw);
    assert!(b.warning.is_none());
    let c = estimate_lambda_tilde_dt(&gen, 2, 12, 5, SubsetMode::SampledSubsets { k: 3 }, 0.2, 1).unwrap();
    assert!(c.warning.is_some());
    assert!(c.per_draw.iter().zip(&a.per_draw).all(|(s, e)| s <= e));
}

#[test]
fn subset_max_uses_the_supplied_sets() {
    let mut r = rng(3);
    let x = gaussian_matrix(&mut r, 4, 10);
    let g = gram(&x);
    let one = subset_max(&g, &[vec![2]], |_, s| s.smallest_nonzero()).unwrap();
    assert!((one - g[(2, 2)]).abs() <= 1e-12 * g[(2, 2)]);
    assert_eq!(subset_max(&g, &[], |_, _| 1.0).unwrap(), 0.0);
}

fn filled(t: usize) -> BoundInputs {
    let mut p = BoundInputs::new(t, 20, 10, 4, 0.05);
    p.l = Some(2.0);
    p.c = Some(3.0);
    p.m = Some(5.0);
    p.b_v = Some(2.5);
    p.m_tilde = Some(4.0);
    p.lambda_dt = Some(0.3);
    p.lambda_tilde_dt = Some(0.4);
    p.lambda_tilde_dt_en = Some(0.35);
    p.e_xv_norm = Some(1.5);
    p.e_xv_norm_sq = Some(2.4);
    p.e_y_over_sqrt_v = Some(1.2);
    p.e_y_sq_over_v = Some(1.6);
    p.e_ws_plus_noise = Some(0.9);
    p.lambda1_max = Some(6.0);
    p.lambda2_min = Some(0.1);
    p.e_lasso_term = Some(7.0);
    p.e_en_term = Some(5.0);
    p.mu_err = Some(0.2);
    p
}

#[test]
fn well_specified_bound_is_tighter_when_its_expectation_is() {
    let p = filled(100);
    let general = eval_bound(TheoremId::Ridge, &p).unwrap();
    let ws = eval_bound(TheoremId::RidgeWellSpecified, &p).unwrap();
    for (a, b) in ws.terms.iter().zip(&general.terms) {
        assert_eq!(a.label, b.label);
        assert!(a.value <= b.value);
    }
}

#[test]
fn recentered_bound_adds_a_center_term() {
    let p = filled(100);
    let ws = eval_bound(TheoremId::RidgeWellSpecified, &p).unwrap();
    let rc = eval_bound(TheoremId::RecenteredRidge, &p).unwrap();
    assert_eq!(rc.terms.len(), ws.terms.len() + 1);
    let extra = rc.term("center_error").unwrap();
    assert!((extra - 2.0 * 1.5 * 0.2).abs() < 1e-15);
    assert!((rc.total - ws.total - extra).abs() < 1e-12);
}

#[test]
fn measured_inputs_suffice_for_every_bound() {
    let gen = generator(InputFamily::GaussianEntries, 3, 1.0, 0.5);
    let inst = sample_instance(&gen, 6, 12, 4, 2).unwrap();
    let mut opts = MeasureOptions::new(0.05, 50, 3);
    opts.lambda1_max = Some(10.0);
    opts.lambda2_min = Some(0.1);
    opts.mu_hat = Some(vec![0.1, 0.0, -0.1]);
    for th in TheoremId::ALL {
        let p = measure_bound_inputs(&inst, &gen, th, &LossSpec::Squared, &opts).unwrap();
        assert_eq!(p.constants_source, ConstantsSource::Empirical);
        let r = eval_bound(th, &p).unwrap();
        assert!(r.total.is_finite() && r.total > 0.0, "{th:?}");
    }
    let clipped = LossSpec::ClippedSquared { cap: 4.0 };
    let p = measure_bound_inputs(&inst, &gen, TheoremId::Ridge, &clipped, &opts).unwrap();
    assert_eq!((p.c, p.l, p.constants_source), (Some(4.0), Some(4.0), ConstantsSource::Supplied));
}

#[test]
fn rademacher_estimate_agrees_with_enumeration() {
    let gen = generator(InputFamily::GaussianEntries, 2, 1.0, 0.5);
    let inst = sample_instance(&gen, 8, 6, 3, 11).unwrap();
    let search = SearchSpec::LogGrid {
        lo: 1e-2,
        hi: 1e2,
        points: 10,
        refine: false,
    };
    let table = loss_table(&inst, &Family::Ridge, &search, &LossSpec::Squared).unwrap();
    let exact = enumerate_task_level(&table).unwrap();
    let est = rademacher_estimate(&inst, &Family::Ridge, &search, &LossSpec::Squared, 3000, 4).unwrap();
    assert!((est.task_level.mean - exact).abs() <= 4.0 * est.task_level.se);
    assert_eq!(est.grid_size, 10);
    assert_eq!(est.task_draws.len(), 3000);
}

#[test]
fn khintchine_by_enumeration() {
    let k = khintchine_check(&[1.0, 1.0]).unwrap();
    assert_eq!((k.lhs, k.rhs), (1.0, 2f64.sqrt()));
    let k = khintchine_check(&[2.0]).unwrap();
    assert_eq!(k.lhs, 2.0);
    assert!(k.holds);
}
