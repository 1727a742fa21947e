//! Monte Carlo `Λ_D^T`, the expected largest inverse smallest eigenvalue
//! across `T` designs, along `n` and `T`.

use regtune::experiment::{lambda_dt_scaling_study, LambdaStudySpec, NSweep, TSweep};
use regtune::tasks::{Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};

fn main() -> regtune::Result<()> {
    let spec = LambdaStudySpec {
        generator: Generator {
            input: InputDist::new(InputFamily::GaussianEntries, 1.0, 4),
            prior: PriorSpec::gaussian(1.0),
            noise: NoiseSpec::gaussian(0.5),
        },
        d_sweep: None,
        n_sweep: Some(NSweep { d: 4, grid: vec![24, 48, 96, 192], t: 1 }),
        t_sweep: Some(TSweep { d: 4, n: 24, grid: vec![1, 4, 16, 64] }),
        mc_reps: 500,
        seed: 4,
    };
    for r in lambda_dt_scaling_study(&spec)? {
        println!("{}", r.label);
        for p in &r.points {
            println!("    x = {:>4}: {:.4} ± {:.4}", p.x, p.mean, p.se);
        }
        if let Some(f) = r.fit {
            println!("    exponent {:.3}", f.slope);
        }
    }
    Ok(())
}
