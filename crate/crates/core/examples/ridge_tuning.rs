//! Tune a shared ridge penalty by validation ERM and compare with `λ*`.

use regtune::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use regtune::tuning::{oracle_lambda_star, tune_erm, Family, LossSpec, OracleOptions, SearchSpec};

fn main() -> regtune::Result<()> {
    let (d, n, n_v) = (5, 50, 20);
    // Trace-normalized prior: E||w||² = 1, so σ²/ω² per coordinate is 0.4·5 = 2.
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, d),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.4_f64.sqrt()),
    };
    let loss = LossSpec::Squared;
    let oracle = oracle_lambda_star(
        &gen,
        &Family::Ridge,
        &SearchSpec::default_ridge(),
        &loss,
        n,
        n_v,
        OracleOptions { t_oracle: 5000, seed: 1 },
    )?;
    println!("lambda* = {:.4}, l_v(lambda*) = {:.5}", oracle.lambda_star.lambda, oracle.lv_star);
    for t in [10, 100, 1000] {
        let inst = sample_instance(&gen, t, n, n_v, 7 + t as u64)?;
        let r = tune_erm(&inst, &Family::Ridge, &oracle.search, &loss)?;
        let gap = oracle.value(r.lambda_erm)? - oracle.lv_star;
        println!("T = {t:>4}: lambda_erm = {:.4}, excess risk = {gap:.2e}", r.lambda_erm.lambda);
    }
    Ok(())
}
