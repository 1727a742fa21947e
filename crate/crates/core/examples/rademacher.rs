//! Rademacher complexity of the tuned ridge class: sampled vs exact.

use regtune::bounds::{enumerate_task_level, khintchine_check, loss_table, rademacher_estimate};
use regtune::tasks::{sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use regtune::tuning::{Family, LossSpec, SearchSpec};

fn main() -> regtune::Result<()> {
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 3),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.5),
    };
    let search = SearchSpec::LogGrid { lo: 1e-2, hi: 1e3, points: 24, refine: false };
    let loss = LossSpec::Squared;
    for t in [4, 8, 12] {
        let inst = sample_instance(&gen, t, 12, 5, t as u64)?;
        let table = loss_table(&inst, &Family::Ridge, &search, &loss)?;
        let exact = enumerate_task_level(&table)?;
        let est = rademacher_estimate(&inst, &Family::Ridge, &search, &loss, 2000, 99)?;
        let k = khintchine_check(&table.per_task[0])?;
        println!(
            "T = {t:>2}: exact {exact:.5}, sampled {:.5} ± {:.5}, example level {:.5}; E|sum| {:.4} <= {:.4}",
            est.task_level.mean, est.task_level.se, est.example_level.mean, k.lhs, k.rhs
        );
    }
    Ok(())
}
