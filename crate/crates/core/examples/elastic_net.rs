//! Elastic-net tuning over a `(λ₁, λ₂)` domain of exact paths.

use regtune::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use regtune::tuning::{tune_erm, Family, LossSpec, SearchSpec};

fn main() -> regtune::Result<()> {
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 8),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.5),
    };
    let inst = sample_instance(&gen, 30, 40, 10, 3)?;
    let search = SearchSpec::default_path(vec![0.01, 0.1, 1.0, 10.0]);
    let r = tune_erm(&inst, &Family::ElasticNet, &search, &LossSpec::Squared)?;
    println!(
        "lambda1 = {:.4}, lambda2 = {:?}, validation loss = {:.4} (se {:.4})",
        r.lambda_erm.lambda, r.lambda_erm.lambda2, r.loss_at_erm, r.se_at_erm
    );
    println!("{} grid evaluations", r.evaluations().count());
    Ok(())
}
