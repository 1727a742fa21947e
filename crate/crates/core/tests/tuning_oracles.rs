mod common;

use common::*;
use regtune::linalg::{Matrix, Vector};
use regtune::numeric::log_grid;
use regtune::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec, ProblemInstance, Task};
use regtune::tuning::*;

fn instance(seed: u64) -> ProblemInstance {
    let gen = generator(InputFamily::GaussianEntries, 4, 0.6, 0.8);
    sample_instance(&gen, 15, 10, 6, seed).unwrap()
}

fn brute_force(inst: &ProblemInstance, family: &Family, lams: &[f64], l2: Option<f64>) -> (f64, f64) {
    lams.iter()
        .map(|&l| {
            let p = HyperPoint { lambda: l, lambda2: l2 };
            (l, validation_loss(inst, &family.estimator(p), &LossSpec::Squared).unwrap())
        })
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

#[test]
fn scalar_validation_loss() {
    let task = Task::new(
        Matrix::from_element(1, 1, 1.0),
        Vector::from_element(1, 2.0),
        Matrix::from_element(1, 1, 1.0),
        Vector::from_element(1, 1.0),
    )
    .unwrap();
    let inst = ProblemInstance::from_tasks(vec![task], 0).unwrap();
    let v = validation_loss(&inst, &Family::Ridge.estimator(HyperPoint::new(2.0)), &LossSpec::Squared).unwrap();
    assert!((v - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn ridge_erm_is_no_worse_than_a_dense_grid() {
    for seed in 0..5 {
        let inst = instance(seed);
        let search = SearchSpec::LogGrid {
            lo: 1e-3,
            hi: 1e3,
            points: 64,
            refine: true,
        };
        let tuned = tune_erm(&inst, &Family::Ridge, &search, &LossSpec::Squared).unwrap();
        let (_, best) = brute_force(&inst, &Family::Ridge, &log_grid(1e-3, 1e3, 20_000), None);
        assert!(tuned.loss_at_erm <= best + 1e-9 * best, "{} > {best}", tuned.loss_at_erm);
    }
}

#[test]
fn lasso_path_erm_is_exact() {
    for seed in 0..5 {
        let inst = instance(seed);
        let search = SearchSpec::Path {
            lo: 0.05,
            hi: 40.0,
            lambda2: vec![0.0],
            points: 16,
        };
        let tuned = tune_erm(&inst, &Family::Lasso, &search, &LossSpec::Squared).unwrap();
        let (_, best) = brute_force(&inst, &Family::Lasso, &log_grid(0.05, 40.0, 20_000), None);
        assert!(tuned.loss_at_erm <= best + 1e-12, "{} > {best}", tuned.loss_at_erm);
        let direct = validation_loss(&inst, &Family::Lasso.estimator(tuned.lambda_erm), &LossSpec::Squared).unwrap();
        assert!((direct - tuned.loss_at_erm).abs() <= 1e-10);
    }
}

#[test]
fn elastic_net_erm_picks_the_best_lambda2() {
    let inst = instance(9);
    let l2s = vec![0.1, 1.0, 10.0];
    let search = SearchSpec::Path {
        lo: 0.05,
        hi: 40.0,
        lambda2: l2s.clone(),
        points: 16,
    };
    let tuned = tune_erm(&inst, &Family::ElasticNet, &search, &LossSpec::Squared).unwrap();
    for l2 in l2s {
        let (_, best) = brute_force(&inst, &Family::ElasticNet, &log_grid(0.05, 40.0, 5_000), Some(l2));
        assert!(tuned.loss_at_erm <= best + 1e-12);
    }
}

#[test]
fn noiseless_tuning_lands_on_the_lower_edge() {
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 3),
        prior: PriorSpec::point_mass(vec![1.0, -2.0, 0.5]),
        noise: NoiseSpec::gaussian(0.0),
    };
    let inst = sample_instance(&gen, 5, 12, 4, 1).unwrap();
    let search = SearchSpec::LogGrid {
        lo: 1e-4,
        hi: 1e2,
        points: 32,
        refine: true,
    };
    let tuned = tune_erm(&inst, &Family::Ridge, &search, &LossSpec::Squared).unwrap();
    assert!(tuned.lambda_erm.lambda <= 1e-4 * 1.001, "{}", tuned.lambda_erm.lambda);
}

#[test]
fn oracle_finds_the_bayes_ratio() {
    // Coordinate variance ω² = 0.25 and σ² = 0.5: the Bayes ridge is λ = 2.
    let gen = generator(InputFamily::GaussianEntries, 3, 0.5, 0.5_f64.sqrt());
    let o = oracle_lambda_star(
        &gen,
        &Family::Ridge,
        &SearchSpec::default_ridge(),
        &LossSpec::Squared,
        12,
        5,
        OracleOptions {
            t_oracle: 20_000,
            seed: 4,
        },
    )
    .unwrap();
    assert!(o.analytic);
    assert!((o.lambda_star.lambda - 2.0).abs() < 0.2, "{:?}", o.lambda_star);
}

#[test]
fn excess_risk_is_nonnegative_on_the_oracle_bank() {
    let gen = generator(InputFamily::UniformEntries, 3, 0.5, 0.5);
    let o = oracle_lambda_star(
        &gen,
        &Family::Ridge,
        &SearchSpec::default_ridge(),
        &LossSpec::Squared,
        10,
        5,
        OracleOptions { t_oracle: 2000, seed: 1 },
    )
    .unwrap();
    let r = excess_risk(&gen, &Family::Ridge, &LossSpec::Squared, 20, 10, 5, 10, 3, &o).unwrap();
    assert!(r.gaps.iter().all(|g| *g >= -1e-12), "{:?}", r.gaps);
    let single: Vec<f64> = (0..10).map(|i| r.gaps[i]).collect();
    assert_eq!(r.mean_gap, regtune::numeric::stable_mean(single));
}
