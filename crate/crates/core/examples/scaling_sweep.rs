//! Excess risk of tuned ridge along `T`, with a log-log slope and plot.

use regtune::experiment::{run_sweep_with_progress, write_result, Axis, SweepSpec};
use regtune::tasks::{Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use regtune::tuning::{Family, LossSpec, SearchSpec};

fn main() -> regtune::Result<()> {
    let spec = SweepSpec {
        axis: Axis::T,
        grid: vec![10, 40, 160],
        t: 10,
        d: 4,
        n: 24,
        n_v: 10,
        generator: Generator {
            input: InputDist::new(InputFamily::GaussianEntries, 1.0, 4),
            prior: PriorSpec::gaussian(1.0),
            noise: NoiseSpec::gaussian(0.5),
        },
        family: Family::Ridge,
        search: SearchSpec::default_ridge(),
        loss: LossSpec::Squared,
        replicates: 40,
        seed: 17,
        oracle_tasks: 4000,
        n_rule: None,
        min_n_over_d: None,
        bound: None,
        delta: 0.05,
        injected: None,
    };
    let r = run_sweep_with_progress(&spec, &|p| println!("T = {:>4}: excess risk {:.3e} ± {:.1e}", p.t, p.mean, p.se))?;
    if let Some(f) = r.fit {
        println!("slope {:.3}, 95% CI [{:.3}, {:.3}]", f.slope, f.ci.0, f.ci.1);
    }
    let dir = std::env::temp_dir().join("regtune_scaling_sweep");
    write_result(&r, &dir, "sweep_T")?;
    println!("wrote {}", dir.display());
    Ok(())
}
