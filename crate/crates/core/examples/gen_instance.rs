//! Sample a multi-task instance, save it in both formats and reload it.

use regtune::io::{load_instance, save_instance};
use regtune::linalg::DEFAULT_RANK_TOLERANCE;
use regtune::tasks::{empirical_constants, sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};

fn main() -> regtune::Result<()> {
    let gen = Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 5),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.5),
    };
    let inst = sample_instance(&gen, 20, 30, 10, 42)?;
    let dir = std::env::temp_dir().join("regtune_gen_instance");
    std::fs::create_dir_all(&dir)?;
    for name in ["instance.bin", "instance.json"] {
        let path = dir.join(name);
        save_instance(&inst, &path)?;
        let back = load_instance(&path)?;
        assert_eq!(back.tasks, inst.tasks);
        println!("wrote {}", path.display());
    }
    let c = empirical_constants(&inst, 0, DEFAULT_RANK_TOLERANCE)?;
    println!("T = {}, d = {}, n = {}, n_v = {}", inst.t(), inst.d, inst.n, inst.n_v);
    println!("M = {:.4}, b_v = {:.4}, E||x_v|| = {:.4}", c.m, c.b_v, c.e_norm_xv);
    Ok(())
}
