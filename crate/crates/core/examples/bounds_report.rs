//! Every generalization bound, with inputs measured on one instance.

use regtune::bounds::{eval_bound, measure_bound_inputs, MeasureOptions, TheoremId};
use regtune::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use regtune::tuning::LossSpec;

fn main() -> regtune::Result<()> {
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 4),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.5),
    };
    let inst = sample_instance(&gen, 200, 24, 10, 11)?;
    let mut opts = MeasureOptions::new(0.05, 200, 5);
    opts.lambda1_max = Some(50.0);
    opts.lambda2_min = Some(0.1);
    opts.mu_hat = Some(vec![0.1; 4]);
    for theorem in [
        TheoremId::Ridge,
        TheoremId::RidgeWellSpecified,
        TheoremId::Lasso,
        TheoremId::ElasticNet,
        TheoremId::RecenteredRidge,
        TheoremId::RidgeAlternative,
    ] {
        let inputs = measure_bound_inputs(&inst, &gen, theorem, &LossSpec::ClippedSquared { cap: 4.0 }, &opts)?;
        let report = eval_bound(theorem, &inputs)?;
        println!("{theorem:?}: total {:.4}", report.total);
        for t in &report.terms {
            println!("    {:<28} {:.4}", t.label, t.value);
        }
    }
    Ok(())
}
