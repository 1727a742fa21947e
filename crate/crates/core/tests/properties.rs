mod common;

use proptest::prelude::*;
use regtune::bayes::{posterior_mean, GaussianPriorModel};
use regtune::bounds::{eval_bound, khintchine_check, BoundInputs, TheoremId};
use regtune::estimators::{en_kkt_residual, lasso_path, solve_elastic_net, solve_recentered_ridge, solve_ridge};
use regtune::experiment::fit_loglog_slope;
use regtune::io::{read_binary, write_binary};
use regtune::linalg::{gram, Matrix, Vector};
use regtune::tasks::{sample_instance, InputFamily};

fn task(seed: u64, d: usize, n: usize) -> (Matrix, Vector) {
    common::sparse_task(&mut common::rng(seed), d, n)
}

fn inputs(t: usize, n_v: usize, delta: f64) -> BoundInputs {
    let mut p = BoundInputs::new(t, 20, n_v, 5, delta);
    for (slot, v) in [
        (&mut p.l, 2.0),
        (&mut p.c, 1.5),
        (&mut p.m, 4.0),
        (&mut p.b_v, 2.0),
        (&mut p.m_tilde, 3.0),
        (&mut p.lambda_dt, 0.2),
        (&mut p.lambda_tilde_dt, 0.3),
        (&mut p.lambda_tilde_dt_en, 0.25),
        (&mut p.e_xv_norm, 1.4),
        (&mut p.e_xv_norm_sq, 2.1),
        (&mut p.e_y_over_sqrt_v, 1.1),
        (&mut p.e_y_sq_over_v, 1.3),
        (&mut p.e_ws_plus_noise, 0.8),
        (&mut p.lambda1_max, 5.0),
        (&mut p.lambda2_min, 0.2),
        (&mut p.e_lasso_term, 6.0),
        (&mut p.e_en_term, 4.0),
        (&mut p.mu_err, 0.3),
    ] {
        *slot = Some(v);
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ridge_norm_shrinks_with_lambda(seed in 0u64..1000, d in 1usize..8, n in 1usize..20, a in 0.01f64..10.0, k in 1.01f64..10.0) {
        let (x, y) = task(seed, d, n);
        let small = solve_ridge(&x, &y, a).unwrap().weights().norm();
        let large = solve_ridge(&x, &y, a * k).unwrap().weights().norm();
        prop_assert!(large <= small * (1.0 + 1e-12));
    }

    #[test]
    fn recentered_ridge_tends_to_its_center(seed in 0u64..1000, d in 1usize..6, n in 1usize..12) {
        let (x, y) = task(seed, d, n);
        let mu = Vector::from_fn(d, |j, _| j as f64 - 1.0);
        let w = solve_recentered_ridge(&x, &y, 1e9, &mu).unwrap().weights();
        prop_assert!((w - mu).amax() < 1e-6);
    }

    #[test]
    fn elastic_net_certifies_optimality(seed in 0u64..1000, d in 1usize..10, frac in 0.01f64..1.2, l2 in 0.0f64..3.0) {
        let (x, y) = task(seed, d, 3 * d + 2);
        let l1 = frac * 2.0 * (&x * &y).amax();
        prop_assume!(l1 > 0.0 || l2 > 0.0);
        let s = solve_elastic_net(&x, &y, l1, l2).unwrap();
        let scale = 1.0 + (&x * &y).amax();
        prop_assert!(en_kkt_residual(&gram(&x), &(&x * &y), l1, l2, &s.weights()) <= 1e-9 * scale);
        for (k, &j) in s.active_set.iter().enumerate() {
            prop_assert_eq!(s.signs[k], s.w_hat[j].signum());
        }
    }

    #[test]
    fn path_is_continuous_and_covers_its_range(seed in 0u64..1000, d in 1usize..10, l2 in prop_oneof![Just(0.0), 0.05f64..3.0]) {
        let (x, y) = task(seed, d, 2 * d + 3);
        let hi = 2.0 * (&x * &y).amax() * 1.2;
        let lo = hi * 1e-3;
        let path = lasso_path(&x, &y, l2, lo, hi).unwrap();
        prop_assert_eq!(path[0].lambda_lo, lo);
        prop_assert_eq!(path[path.len() - 1].lambda_hi, hi);
        for w in path.windows(2) {
            prop_assert_eq!(w[0].lambda_hi, w[1].lambda_lo);
            let b = w[0].lambda_hi;
            prop_assert!((w[0].weights_at(b) - w[1].weights_at(b)).amax() <= 1e-9);
        }
        prop_assert!(path.last().unwrap().active.is_empty());
    }

    #[test]
    fn bounds_shrink_as_tasks_grow(t in 1usize..5000, k in 2usize..50, delta in 0.001f64..0.35) {
        for th in TheoremId::ALL {
            let a = eval_bound(th, &inputs(t, 10, delta)).unwrap().total;
            let b = eval_bound(th, &inputs(t * k, 10, delta)).unwrap().total;
            prop_assert!(b <= a * (1.0 + 1e-12), "{:?}: T={} gives {}, T={} gives {}", th, t, a, t * k, b);
        }
    }

    #[test]
    fn bounds_shrink_with_more_validation_data(n_v in 1usize..500, k in 2usize..20, delta in 0.001f64..0.35) {
        for th in TheoremId::ALL {
            let a = eval_bound(th, &inputs(100, n_v, delta)).unwrap().total;
            let b = eval_bound(th, &inputs(100, n_v * k, delta)).unwrap().total;
            prop_assert!(b <= a * (1.0 + 1e-12), "{:?}", th);
        }
    }

    #[test]
    fn bounds_grow_with_confidence(d1 in 0.001f64..0.9, f in 0.01f64..0.99) {
        for th in TheoremId::ALL {
            let loose = eval_bound(th, &inputs(100, 10, d1)).unwrap().total;
            let tight = eval_bound(th, &inputs(100, 10, d1 * f)).unwrap().total;
            prop_assert!(tight >= loose, "{:?}", th);
        }
    }

    #[test]
    fn bound_terms_are_nonnegative(t in 1usize..1000, delta in 0.001f64..0.99) {
        for th in TheoremId::ALL {
            let r = eval_bound(th, &inputs(t, 10, delta)).unwrap();
            prop_assert!(r.terms.iter().all(|t| t.value >= 0.0));
            let sum: f64 = r.terms.iter().map(|t| t.value).sum();
            prop_assert!((sum - r.total).abs() <= 1e-12 * r.total.max(1.0));
        }
    }

    #[test]
    fn khintchine_holds(x in prop::collection::vec(-10.0f64..10.0, 1..12)) {
        let k = khintchine_check(&x).unwrap();
        prop_assert!(k.holds, "{} > {}", k.lhs, k.rhs);
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        prop_assert!(k.lhs <= l1 + 1e-9);
    }

    #[test]
    fn posterior_mean_is_recentered_ridge(seed in 0u64..1000, d in 1usize..8, n in 1usize..15, omega in 0.3f64..3.0, sigma in 0.3f64..3.0) {
        let (x, y) = task(seed, d, n);
        let model = GaussianPriorModel { mu_star: (0..d).map(|j| 0.5 * j as f64).collect(), omega, sigma_noise: sigma };
        let post = posterior_mean(&x, &y, &model).unwrap();
        let ridge = solve_recentered_ridge(&x, &y, model.ridge_lambda(), &model.mu()).unwrap().weights();
        prop_assert!((post - ridge).amax() <= 1e-9);
    }

    #[test]
    fn binary_container_round_trips(seed in 0u64..10_000, t in 1usize..5, d in 1usize..5, n in 1usize..6, n_v in 1usize..4) {
        let gen = common::generator(InputFamily::RademacherEntries, d, 0.7, 0.3);
        let inst = sample_instance(&gen, t, n, n_v, seed).unwrap();
        let mut buf = Vec::new();
        write_binary(&inst, &mut buf).unwrap();
        let back = read_binary(&buf[..]).unwrap();
        prop_assert_eq!(back.tasks, inst.tasks);
        prop_assert_eq!(back.seed, seed);
    }

    #[test]
    fn slope_fit_recovers_power_laws(scale in 0.01f64..100.0, p in -3.0f64..3.0) {
        let pts: Vec<(f64, f64, f64)> = [3.0, 10.0, 30.0, 100.0].iter().map(|&x: &f64| (x, scale * x.powf(p), 0.0)).collect();
        let f = fit_loglog_slope(&pts).unwrap();
        prop_assert!((f.slope - p).abs() < 1e-9);
    }
}
