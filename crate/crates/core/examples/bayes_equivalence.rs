//! The Gaussian posterior mean equals re-centered ridge at `λ = σ²/ω²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use regtune::bayes::{check_map_equals_bayes, posterior_mean, GaussianPriorModel};
use regtune::estimators::solve_recentered_ridge;
use regtune::linalg::{Matrix, Vector};

fn main() -> regtune::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let (d, n) = (4, 10);
    let x = Matrix::from_fn(d, n, |_, _| z());
    let y = Vector::from_fn(n, |_, _| z());
    let model = GaussianPriorModel {
        mu_star: vec![0.5, -1.0, 0.0, 2.0],
        omega: 0.7,
        sigma_noise: 0.3,
    };
    let post = posterior_mean(&x, &y, &model)?;
    let ridge = solve_recentered_ridge(&x, &y, model.ridge_lambda(), &model.mu())?;
    println!("lambda = {:.5}", model.ridge_lambda());
    println!("posterior mean {:?}", post.as_slice());
    println!("ridge          {:?}", ridge.w_hat);
    let check = check_map_equals_bayes(&x, &y, &model, 1e-10)?;
    println!("max diff {:.2e}, pass {}", check.max_diff, check.pass);
    Ok(())
}
