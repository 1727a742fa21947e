//! Synthetic multi-task regression instances.
//!
//! Every input family is scaled so that `E[xxᵀ] = (σ_x²/d) I`, i.e. the
//! trace of the input covariance is `σ_x²`. Tasks are well specified:
//! `y = Xᵀw* + ε` with one `w*` per task drawn from the prior.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram, Matrix, Spectrum, Vector};
use crate::numeric::stable_mean;
use crate::rng::{derive_seed, substream, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFamily {
    /// iid `U[−a, a]` entries, `a = σ_x √(3/d)`; density bounded by `1/(2a)`.
    UniformEntries,
    /// iid `N(0, σ_x²/d)` entries (sub-Gaussian).
    GaussianEntries,
    /// iid `±σ_x/√d` entries.
    RademacherEntries,
    /// iid symmetric triangular entries on `[−b, b]`, `b = σ_x √(6/d)`.
    BoundedDensityCustom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDist {
    pub family: InputFamily,
    pub sigma_x: f64,
    pub d: usize,
}

impl InputDist {
    pub fn new(family: InputFamily, sigma_x: f64, d: usize) -> Self {
        InputDist { family, sigma_x, d }
    }

    /// Per-coordinate standard deviation.
    pub fn entry_sd(&self) -> f64 {
        self.sigma_x / (self.d as f64).sqrt()
    }

    /// Per-coordinate variance, the scale of `E[xxᵀ]`.
    pub fn entry_var(&self) -> f64 {
        self.sigma_x * self.sigma_x / self.d as f64
    }

    fn entry<R: Rng>(&self, rng: &mut R) -> f64 {
        let s = self.entry_sd();
        match self.family {
            InputFamily::UniformEntries => {
                let a = s * 3f64.sqrt();
                rng.random_range(-a..a)
            }
            InputFamily::GaussianEntries => s * rng.sample::<f64, _>(StandardNormal),
            InputFamily::RademacherEntries => {
                if rng.random::<bool>() {
                    s
                } else {
                    -s
                }
            }
            InputFamily::BoundedDensityCustom => {
                let b = s * 6f64.sqrt();
                b * (rng.random::<f64>() + rng.random::<f64>() - 1.0)
            }
        }
    }

    /// `d x cols` matrix of iid columns, filled column by column.
    pub fn sample_matrix<R: Rng>(&self, rng: &mut R, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..self.d * cols).map(|_| self.entry(rng)).collect();
        Matrix::from_vec(self.d, cols, data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    Gaussian,
    PointMass,
    /// Uniform on a ball with the same per-coordinate variance as the
    /// Gaussian choice (radius `s √(d + 2)`).
    UniformBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub family: PriorFamily,
    /// `μ*`; empty means the zero vector.
    #[serde(default)]
    pub mean: Vec<f64>,
    pub omega: f64,
    /// When set, `omega` is `σ_w` with `tr E[(w − μ)(w − μ)ᵀ] = σ_w²`.
    #[serde(default)]
    pub trace_normalized: bool,
}

impl PriorSpec {
    pub fn gaussian(omega: f64) -> Self {
        PriorSpec {
            family: PriorFamily::Gaussian,
            mean: Vec::new(),
            omega,
            trace_normalized: false,
        }
    }

    pub fn point_mass(w0: Vec<f64>) -> Self {
        PriorSpec {
            family: PriorFamily::PointMass,
            mean: w0,
            omega: 0.0,
            trace_normalized: false,
        }
    }

    pub fn mean_vec(&self, d: usize) -> Vector {
        if self.mean.is_empty() {
            Vector::zeros(d)
        } else {
            Vector::from_column_slice(&self.mean)
        }
    }

    /// Per-coordinate standard deviation of `w*`.
    pub fn coord_sd(&self, d: usize) -> f64 {
        match self.family {
            PriorFamily::PointMass => 0.0,
            _ if self.trace_normalized => self.omega / (d as f64).sqrt(),
            _ => self.omega,
        }
    }

    /// `E‖w* − μ*‖²`.
    pub fn second_moment(&self, d: usize) -> f64 {
        let s = self.coord_sd(d);
        d as f64 * s * s
    }

    fn sample<R: Rng>(&self, rng: &mut R, d: usize) -> Vector {
        let mut w = self.mean_vec(d);
        let s = self.coord_sd(d);
        match self.family {
            PriorFamily::PointMass => {}
            PriorFamily::Gaussian => {
                for j in 0..d {
                    w[j] += s * rng.sample::<f64, _>(StandardNormal);
                }
            }
            PriorFamily::UniformBall => {
                let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let r = s * (d as f64 + 2.0).sqrt() * rng.random::<f64>().powf(1.0 / d as f64);
                for j in 0..d {
                    w[j] += r * dir[j] / norm;
                }
            }
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Standard deviation.
    pub sigma: f64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Self {
        NoiseSpec {
            family: NoiseFamily::Gaussian,
            sigma,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R, len: usize) -> Vector {
        if self.sigma == 0.0 {
            return Vector::zeros(len);
        }
        match self.family {
            NoiseFamily::Gaussian => Vector::from_iterator(
                len,
                (0..len).map(|_| self.sigma * rng.sample::<f64, _>(StandardNormal)),
            ),
            NoiseFamily::Uniform => {
                let a = self.sigma * 3f64.sqrt();
                Vector::from_iterator(len, (0..len).map(|_| rng.random_range(-a..a)))
            }
        }
    }
}

/// The `(inputs, prior, noise)` triple tasks are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub input: InputDist,
    pub prior: PriorSpec,
    pub noise: NoiseSpec,
}

impl Generator {
    pub fn d(&self) -> usize {
        self.input.d
    }

    /// The same generator in dimension `d`. A non-empty prior mean cannot be
    /// resized and must already have length `d`.
    pub fn with_d(&self, d: usize) -> Result<Generator> {
        let mut g = self.clone();
        g.input.d = d;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        let d = self.input.d;
        if d == 0 {
            return bad("input.d must be >= 1".into());
        }
        if !(self.input.sigma_x.is_finite() && self.input.sigma_x > 0.0) {
            return bad(format!("input.sigma_x must be > 0, got {}", self.input.sigma_x));
        }
        if !(self.prior.omega.is_finite() && self.prior.omega >= 0.0) {
            return bad(format!("prior.omega must be >= 0, got {}", self.prior.omega));
        }
        if !self.prior.mean.is_empty() && self.prior.mean.len() != d {
            return bad(format!("prior.mean has length {}, expected {d}", self.prior.mean.len()));
        }
        if !(self.noise.sigma.is_finite() && self.noise.sigma >= 0.0) {
            return bad(format!("noise.sigma must be >= 0, got {}", self.noise.sigma));
        }
        Ok(())
    }

    /// Task `index` of the stream keyed by `seed`. Independent of how many
    /// other tasks are drawn.
    pub fn sample_task(&self, n: usize, n_v: usize, seed: u64, index: u64) -> Task {
        let d = self.d();
        let w = self.prior.sample(&mut substream(seed, index, Tag::Prior), d);
        let x = self.input.sample_matrix(&mut substream(seed, index, Tag::TrainInputs), n);
        let eps = self.noise.sample(&mut substream(seed, index, Tag::TrainNoise), n);
        let xv = self.input.sample_matrix(&mut substream(seed, index, Tag::ValInputs), n_v);
        let eps_v = self.noise.sample(&mut substream(seed, index, Tag::ValNoise), n_v);
        Task::well_specified(x, xv, w, &eps, &eps_v)
    }

    /// Training design only, for quantities that depend on inputs alone.
    pub fn sample_design(&self, n: usize, seed: u64, index: u64) -> Matrix {
        self.input
            .sample_matrix(&mut substream(seed, index, Tag::TrainInputs), n)
    }

    pub fn rng(seed: u64, index: u64, tag: Tag) -> ChaCha8Rng {
        substream(seed, index, tag)
    }
}

/// One task: training block `(X, y)`, validation block `(X_v, y_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub x: Matrix,
    pub y: Vector,
    pub xv: Matrix,
    pub yv: Vector,
    pub w_star: Option<Vector>,
    /// Realized training noise, stored as `y − Xᵀw*`.
    pub noise: Option<Vector>,
    pub noise_v: Option<Vector>,
}

impl Task {
    pub fn new(x: Matrix, y: Vector, xv: Matrix, yv: Vector) -> Result<Self> {
        let t = Task {
            x,
            y,
            xv,
            yv,
            w_star: None,
            noise: None,
            noise_v: None,
        };
        t.check()?;
        Ok(t)
    }

    fn well_specified(x: Matrix, xv: Matrix, w: Vector, eps: &Vector, eps_v: &Vector) -> Self {
        let signal = x.tr_mul(&w);
        let signal_v = xv.tr_mul(&w);
        let y = &signal + eps;
        let yv = &signal_v + eps_v;
        // Stored this way, y − Xᵀw* − noise is exactly zero in floating point.
        let noise = &y - &signal;
        let noise_v = &yv - &signal_v;
        Task {
            x,
            y,
            xv,
            yv,
            w_star: Some(w),
            noise: Some(noise),
            noise_v: Some(noise_v),
        }
    }

    pub fn d(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_v(&self) -> usize {
        self.xv.ncols()
    }

    pub fn check(&self) -> Result<()> {
        crate::linalg::check_matrix(&self.x, "X")?;
        crate::linalg::check_matrix(&self.xv, "X_v")?;
        let d = self.d();
        let ok = self.xv.nrows() == d
            && self.y.len() == self.n()
            && self.yv.len() == self.n_v()
            && self.w_star.as_ref().is_none_or(|w| w.len() == d)
            && self.noise.as_ref().is_none_or(|e| e.len() == self.n())
            && self.noise_v.as_ref().is_none_or(|e| e.len() == self.n_v());
        if !ok {
            return Err(Error::InvalidInput("task blocks have inconsistent dimensions".into()));
        }
        if self.y.iter().chain(self.yv.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("task responses have non-finite entries".into()));
        }
        Ok(())
    }

    /// `max |y − Xᵀw* − ε|` over both blocks; `None` unless well specified.
    pub fn specification_residual(&self) -> Option<f64> {
        let w = self.w_star.as_ref()?;
        let r = &self.y - self.x.tr_mul(w) - self.noise.as_ref()?;
        let rv = &self.yv - self.xv.tr_mul(w) - self.noise_v.as_ref()?;
        Some(r.amax().max(rv.amax()))
    }
}

/// An ordered collection of `T` tasks sharing `(d, n, n_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub d: usize,
    pub n: usize,
    pub n_v: usize,
    pub seed: u64,
    pub generator: Option<Generator>,
    pub tasks: Vec<Task>,
}

impl ProblemInstance {
    pub fn from_tasks(tasks: Vec<Task>, seed: u64) -> Result<Self> {
        let first = tasks
            .first()
            .ok_or_else(|| Error::InvalidInput("instance needs at least one task".into()))?;
        let (d, n, n_v) = (first.d(), first.n(), first.n_v());
        for (t, task) in tasks.iter().enumerate() {
            task.check().map_err(|e| e.at_task(t))?;
            if (task.d(), task.n(), task.n_v()) != (d, n, n_v) {
                return Err(Error::InvalidInput(format!(
                    "task {t} has shape ({}, {}, {}), expected ({d}, {n}, {n_v})",
                    task.d(),
                    task.n(),
                    task.n_v()
                )));
            }
        }
        Ok(ProblemInstance {
            d,
            n,
            n_v,
            seed,
            generator: None,
            tasks,
        })
    }

    pub fn t(&self) -> usize {
        self.tasks.len()
    }

    /// Mean of `trace(XXᵀ)/d` over tasks.
    pub fn mean_gram_scale(&self) -> f64 {
        stable_mean(
            self.tasks
                .iter()
                .map(|t| t.x.norm_squared() / self.d as f64)
                .collect(),
        )
    }
}

/// Draws `T` tasks; task `t` only depends on `(seed, t)`.
pub fn sample_instance(gen: &Generator, t: usize, n: usize, n_v: usize, seed: u64) -> Result<ProblemInstance> {
    gen.validate()?;
    for (name, v) in [("T", t), ("n", n), ("n_v", n_v)] {
        if v == 0 {
            return Err(Error::InvalidInput(format!("{name} must be >= 1")));
        }
    }
    let tasks: Vec<Task> = (0..t as u64)
        .into_par_iter()
        .map(|i| gen.sample_task(n, n_v, seed, i))
        .collect();
    Ok(ProblemInstance {
        d: gen.d(),
        n,
        n_v,
        seed,
        generator: Some(gen.clone()),
        tasks,
    })
}

/// Measured constants that enter the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    /// `max_t ‖Xᵗyᵗ‖`.
    pub m: f64,
    /// `max ‖x_v‖` over all validation columns.
    pub b_v: f64,
    /// `max_t ‖yᵗ‖ / √V(XᵗXᵗᵀ)`.
    pub m_tilde: f64,
    pub e_norm_xv: f64,
    pub e_norm_xv_sq: f64,
    /// `E[‖y‖/√V(XXᵀ)]`, averaged over tasks.
    pub e_y_over_sqrt_v: f64,
    /// `E[‖y‖²/V(XXᵀ)]`, averaged over tasks.
    pub e_y_sq_over_v: f64,
    /// `E[‖w*‖ + ‖ε‖/√V(XXᵀ)]`; present for well-specified instances.
    pub e_ws_plus_noise: Option<f64>,
    /// Largest per-example validation loss over the default ridge grid.
    pub c_hat: f64,
    /// `2√C_hat`.
    pub l_hat: f64,
    pub validation_columns: usize,
}

/// Constants of [`EmpiricalConstants`] measured on `inst`. Validation
/// expectations also use `extra_validation_samples` fresh columns when the
/// instance carries its generator.
pub fn empirical_constants(
    inst: &ProblemInstance,
    extra_validation_samples: usize,
    rank_tolerance: f64,
) -> Result<EmpiricalConstants> {
    if inst.tasks.is_empty() {
        return Err(Error::InvalidInput("instance has no tasks".into()));
    }
    let per_task: Vec<_> = inst
        .tasks
        .iter()
        .enumerate()
        .map(|(t, task)| {
            let v = Spectrum::of(&gram(&task.x), rank_tolerance)
                .map_err(|e| e.at_task(t))?
                .smallest_nonzero();
            let xy = (&task.x * &task.y).norm();
            let ny = task.y.norm();
            let ws = match (&task.w_star, &task.noise) {
                (Some(w), Some(e)) => Some(w.norm() + e.norm() / v.sqrt()),
                _ => None,
            };
            Ok((xy, ny / v.sqrt(), ny * ny / v, ws))
        })
        .collect::<Result<Vec<_>>>()?;

    let m = per_task.iter().map(|p| p.0).fold(0.0, f64::max);
    let m_tilde = per_task.iter().map(|p| p.1).fold(0.0, f64::max);
    let e_y_over_sqrt_v = stable_mean(per_task.iter().map(|p| p.1).collect());
    let e_y_sq_over_v = stable_mean(per_task.iter().map(|p| p.2).collect());
    let e_ws_plus_noise = per_task
        .iter()
        .map(|p| p.3)
        .collect::<Option<Vec<f64>>>()
        .map(stable_mean);

    let mut col_norms: Vec<f64> = inst
        .tasks
        .iter()
        .flat_map(|t| t.xv.column_iter().map(|c| c.norm()).collect::<Vec<_>>())
        .collect();
    let b_v = col_norms.iter().copied().fold(0.0, f64::max);
    if let (Some(gen), true) = (&inst.generator, extra_validation_samples > 0) {
        let mut rng = substream(derive_seed(inst.seed, &[Tag::Extra as u64]), 0, Tag::ValInputs);
        let extra = gen.input.sample_matrix(&mut rng, extra_validation_samples);
        col_norms.extend(extra.column_iter().map(|c| c.norm()));
    }
    let e_norm_xv = stable_mean(col_norms.clone());
    let e_norm_xv_sq = stable_mean(col_norms.iter().map(|v| v * v).collect());

    let c_hat = crate::tuning::max_ridge_loss_on_default_grid(inst)?;
    Ok(EmpiricalConstants {
        m,
        b_v,
        m_tilde,
        e_norm_xv,
        e_norm_xv_sq,
        e_y_over_sqrt_v,
        e_y_sq_over_v,
        e_ws_plus_noise,
        c_hat,
        l_hat: 2.0 * c_hat.sqrt(),
        validation_columns: col_norms.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generator(family: InputFamily, d: usize) -> Generator {
        Generator {
            input: InputDist::new(family, 1.0, d),
            prior: PriorSpec::gaussian(1.0),
            noise: NoiseSpec::gaussian(0.5),
        }
    }

    #[test]
    fn noiseless_point_mass_is_exact() {
        let gen = Generator {
            input: InputDist::new(InputFamily::UniformEntries, 1.0, 3),
            prior: PriorSpec::point_mass(vec![1.0, -2.0, 0.5]),
            noise: NoiseSpec::gaussian(0.0),
        };
        let inst = sample_instance(&gen, 5, 7, 2, 11).unwrap();
        let w0 = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        for t in &inst.tasks {
            assert_eq!(t.y, t.x.tr_mul(&w0));
        }
    }

    #[test]
    fn realized_noise_is_exact() {
        let inst = sample_instance(&generator(InputFamily::GaussianEntries, 4), 6, 9, 3, 1).unwrap();
        for t in &inst.tasks {
            assert_eq!(t.specification_residual(), Some(0.0));
        }
    }

    #[test]
    fn nesting_across_t() {
        let gen = generator(InputFamily::RademacherEntries, 3);
        let a = sample_instance(&gen, 10, 5, 2, 99).unwrap();
        let b = sample_instance(&gen, 20, 5, 2, 99).unwrap();
        assert_eq!(a.tasks[..], b.tasks[..10]);
    }

    #[test]
    fn zero_counts_rejected() {
        let gen = generator(InputFamily::UniformEntries, 2);
        assert!(sample_instance(&gen, 1, 1, 0, 0).is_err());
        assert!(sample_instance(&gen, 0, 1, 1, 0).is_err());
    }

    #[test]
    fn scalar_constants() {
        let task = Task::new(
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 2.0),
            Matrix::from_element(1, 1, 1.0),
            Vector::from_element(1, 1.0),
        )
        .unwrap();
        let inst = ProblemInstance::from_tasks(vec![task], 0).unwrap();
        let c = empirical_constants(&inst, 0, 1e-10).unwrap();
        assert_eq!(c.m, 2.0);
        assert_eq!(c.m_tilde, 2.0);
        assert_eq!(c.b_v, 1.0);
    }
}
