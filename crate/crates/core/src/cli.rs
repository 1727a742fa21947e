//! Config-driven commands behind the `regtune` binary.
//!
//! Every command reads an optional JSON config, applies flag overrides,
//! validates the result, runs, and writes its outputs plus a `manifest.json`
//! (tool version and resolved config, no timestamps) into the output
//! directory. Config problems map to exit code 2, failures while running to 1.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::{eval_bound, measure_bound_inputs, BoundInputs, BoundReport, MeasureOptions, TheoremId};
use crate::error::Error;
use crate::estimators::{EstimatorSpec, SolveResult};
use crate::experiment::{
    dimension_independence_study, lambda_dt_scaling_study, run_sweep, write_result, DimensionStudySpec,
    LambdaStudySpec, SweepSpec,
};
use crate::io::{load_instance, save_instance};
use crate::linalg::{Matrix, Vector, DEFAULT_RANK_TOLERANCE};
use crate::tasks::{empirical_constants, sample_instance, Generator, InputDist, InputFamily, NoiseSpec, PriorSpec};
use crate::tuning::{tune_erm, Family, LossSpec, SearchSpec};
use crate::verify::{verify_all, CriterionRun};

pub const TOOL: &str = "regtune";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid configuration.
    Config(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

/// Shape overrides accepted by `gen`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GenFlags {
    pub t: Option<usize>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub n_v: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Gen(GenFlags),
    Solve,
    Tune,
    Bounds,
    Experiment,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Solve => "solve",
            Command::Tune => "tune",
            Command::Bounds => "bounds",
            Command::Experiment => "experiment",
            Command::Verify => "verify",
        }
    }
}

fn default_rank_tolerance() -> f64 {
    DEFAULT_RANK_TOLERANCE
}

fn default_generator() -> Generator {
    Generator {
        input: InputDist::new(InputFamily::GaussianEntries, 1.0, 2),
        prior: PriorSpec::gaussian(1.0),
        noise: NoiseSpec::gaussian(0.5),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceFormat {
    #[default]
    Binary,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    #[serde(default = "default_generator")]
    pub generator: Generator,
    #[serde(default = "GenConfig::default_t", rename = "T")]
    pub t: usize,
    #[serde(default = "GenConfig::default_n")]
    pub n: usize,
    #[serde(default = "GenConfig::default_n_v")]
    pub n_v: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: InstanceFormat,
    #[serde(default = "default_rank_tolerance")]
    pub rank_tolerance: f64,
}

impl GenConfig {
    fn default_t() -> usize {
        10
    }
    fn default_n() -> usize {
        20
    }
    fn default_n_v() -> usize {
        10
    }

    fn validate(&self) -> CliResult<()> {
        for (name, v) in [("T", self.t), ("n", self.n), ("n_v", self.n_v), ("generator.input.d", self.generator.d())] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be >= 1")));
            }
        }
        self.generator.validate().map_err(config_err)?;
        check_rank_tolerance(self.rank_tolerance)
    }
}

fn check_rank_tolerance(v: f64) -> CliResult<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(CliError::Config(format!("rank_tolerance must be > 0, got {v}")));
    }
    Ok(())
}

/// A task given inline: `x` as `d` rows of `n` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTask {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub estimator: EstimatorSpec,
    #[serde(default)]
    pub instance: Option<PathBuf>,
    /// Task index within `instance`.
    #[serde(default)]
    pub task: usize,
    #[serde(default)]
    pub inline: Option<InlineTask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    pub instance: PathBuf,
    #[serde(default = "TuneConfig::default_family")]
    pub family: Family,
    /// Defaults to the standard ridge grid, or a path search over
    /// `λ₂ ∈ {0}` for the LASSO. Required for the elastic net.
    #[serde(default)]
    pub search: Option<SearchSpec>,
    #[serde(default = "TuneConfig::default_loss")]
    pub loss: LossSpec,
    #[serde(default = "default_rank_tolerance")]
    pub rank_tolerance: f64,
}

impl TuneConfig {
    fn default_family() -> Family {
        Family::Ridge
    }
    fn default_loss() -> LossSpec {
        LossSpec::Squared
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub theorem: TheoremId,
    /// Hand-filled inputs; otherwise they are measured on `instance`.
    #[serde(default)]
    pub inputs: Option<BoundInputs>,
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub loss: Option<LossSpec>,
    #[serde(default)]
    pub measure: Option<MeasureOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    Sweep(SweepSpec),
    LambdaDt(LambdaStudySpec),
    Dimension(DimensionStudySpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    workers: Option<usize>,
    config: &'a C,
    outputs: &'a [String],
}

/// What a command produced; `passed` is `false` only for a failing `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub passed: bool,
}

fn read_config<C: DeserializeOwned>(path: Option<&Path>) -> CliResult<C> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    serde_json::from_str(&text).map_err(|e| {
        let source = path.map_or("<no config>".to_string(), |p| p.display().to_string());
        CliError::Config(format!("{source}: {e}"))
    })
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(Error::from)?;
        Ok(Outputs { dir, names: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, body: &str) -> CliResult<()> {
        let p = self.path(name);
        fs::write(p, body).map_err(Error::from)?;
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> CliResult<()> {
        let body = serde_json::to_string_pretty(v).map_err(Error::from)? + "\n";
        self.write(name, &body)
    }

    fn finish<C: Serialize>(mut self, command: &str, workers: Option<usize>, config: &C) -> CliResult<Vec<String>> {
        self.names.sort();
        let m = Manifest {
            tool: TOOL,
            version: VERSION,
            command,
            workers,
            config,
            outputs: &self.names,
        };
        let body = serde_json::to_string_pretty(&m).map_err(Error::from)? + "\n";
        fs::write(self.dir.join("manifest.json"), body).map_err(Error::from)?;
        let mut all = self.names;
        all.push("manifest.json".into());
        Ok(all)
    }
}

/// Runs `cmd`. Progress and summaries go to stdout.
pub fn run(cmd: &Command, g: &GlobalArgs) -> CliResult<RunSummary> {
    if let Some(w) = g.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        // A second call in one process keeps the first pool, which is fine
        // for the binary's single invocation.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let config = g.config.as_deref();
    match cmd {
        Command::Gen(flags) => cmd_gen(read_config(config)?, flags, g),
        Command::Solve => cmd_solve(read_config(config)?, g),
        Command::Tune => cmd_tune(read_config(config)?, g),
        Command::Bounds => cmd_bounds(read_config(config)?, g),
        Command::Experiment => cmd_experiment(read_config(config)?, g),
        Command::Verify => cmd_verify(read_config(config)?, g),
    }
}

pub fn cmd_gen(mut cfg: GenConfig, flags: &GenFlags, g: &GlobalArgs) -> CliResult<RunSummary> {
    if let Some(t) = flags.t {
        cfg.t = t;
    }
    if let Some(n) = flags.n {
        cfg.n = n;
    }
    if let Some(n_v) = flags.n_v {
        cfg.n_v = n_v;
    }
    if let Some(d) = flags.d {
        cfg.generator.input.d = d;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    let inst = sample_instance(&cfg.generator, cfg.t, cfg.n, cfg.n_v, cfg.seed)?;
    let constants = empirical_constants(&inst, 0, cfg.rank_tolerance)?;
    let mut out = Outputs::new(&g.out)?;
    let file = match cfg.format {
        InstanceFormat::Binary => "instance.bin",
        InstanceFormat::Json => "instance.json",
    };
    save_instance(&inst, &out.path(file))?;
    out.json("constants.json", &constants)?;
    println!(
        "d = {}, n = {}, n_v = {}, T = {}; M = {:.6}, b_v = {:.6}, M~ = {:.6}, C_hat = {:.6}",
        inst.d,
        inst.n,
        inst.n_v,
        inst.t(),
        constants.m,
        constants.b_v,
        constants.m_tilde,
        constants.c_hat
    );
    Ok(RunSummary {
        outputs: out.finish("gen", g.workers, &cfg)?,
        passed: true,
    })
}

fn inline_task(t: &InlineTask) -> CliResult<(Matrix, Vector)> {
    let d = t.x.len();
    let n = t.x.first().map_or(0, Vec::len);
    if d == 0 || n == 0 {
        return Err(CliError::Config("inline.x must have at least one row and one column".into()));
    }
    if let Some(i) = t.x.iter().position(|r| r.len() != n) {
        return Err(CliError::Config(format!("inline.x row {i} has length {}, expected {n}", t.x[i].len())));
    }
    if t.y.len() != n {
        return Err(CliError::Config(format!("inline.y has length {}, expected {n}", t.y.len())));
    }
    Ok((Matrix::from_fn(d, n, |i, j| t.x[i][j]), Vector::from_column_slice(&t.y)))
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    task: Option<usize>,
    estimator: &'a EstimatorSpec,
    #[serde(flatten)]
    result: &'a SolveResult,
}

pub fn cmd_solve(cfg: SolveConfig, g: &GlobalArgs) -> CliResult<RunSummary> {
    let (x, y, task) = match (&cfg.instance, &cfg.inline) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either instance or inline, not both".into())),
        (None, None) => return Err(CliError::Config("missing task: set instance or inline".into())),
        (None, Some(t)) => {
            let (x, y) = inline_task(t)?;
            (x, y, None)
        }
        (Some(path), None) => {
            let inst = load_instance(path)?;
            let t = inst.tasks.get(cfg.task).ok_or_else(|| {
                CliError::Config(format!("task {} out of range (instance has {})", cfg.task, inst.t()))
            })?;
            (t.x.clone(), t.y.clone(), Some(cfg.task))
        }
    };
    cfg.estimator.validate(x.nrows()).map_err(config_err)?;
    let result = cfg.estimator.solve(&x, &y)?;
    let mut out = Outputs::new(&g.out)?;
    out.json(
        "solution.json",
        &SolveReport {
            task,
            estimator: &cfg.estimator,
            result: &result,
        },
    )?;
    println!(
        "w_hat = {:?}; active set {:?}; kkt residual {:.3e}",
        result.w_hat, result.active_set, result.kkt_residual
    );
    Ok(RunSummary {
        outputs: out.finish("solve", g.workers, &cfg)?,
        passed: true,
    })
}

pub fn cmd_tune(mut cfg: TuneConfig, g: &GlobalArgs) -> CliResult<RunSummary> {
    check_rank_tolerance(cfg.rank_tolerance)?;
    let search = match (&cfg.search, &cfg.family) {
        (Some(s), _) => s.clone(),
        (None, Family::Ridge | Family::RecenteredRidge { .. }) => SearchSpec::default_ridge(),
        (None, Family::Lasso) => SearchSpec::default_path(vec![0.0]),
        (None, Family::ElasticNet) => {
            return Err(CliError::Config("elastic net tuning needs an explicit search with lambda2 values".into()))
        }
    };
    search.validate().map_err(config_err)?;
    cfg.search = Some(search.clone());

    let inst = load_instance(&cfg.instance)?;
    if let Family::RecenteredRidge { mu } = &cfg.family {
        if mu.len() != inst.d {
            return Err(CliError::Config(format!("family.mu has length {}, expected {}", mu.len(), inst.d)));
        }
    }
    let tuned = tune_erm(&inst, &cfg.family, &search, &cfg.loss)?;
    let constants = empirical_constants(&inst, 0, cfg.rank_tolerance)?;

    let mut out = Outputs::new(&g.out)?;
    out.json("tune.json", &tuned)?;
    out.json("constants.json", &constants)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "lambda2", "loss", "se"]).map_err(Error::from)?;
    for e in &tuned.grid {
        w.write_record([
            e.point.lambda.to_string(),
            e.point.lambda2.map(|v| v.to_string()).unwrap_or_default(),
            e.loss.to_string(),
            e.se.to_string(),
        ])
        .map_err(Error::from)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    out.write("curve.csv", &String::from_utf8(body).expect("csv output is utf-8"))?;
    println!(
        "lambda_erm = {}{}; validation loss {:.6} (se {:.2e})",
        tuned.lambda_erm.lambda,
        tuned.lambda_erm.lambda2.map(|l| format!(", lambda2 = {l}")).unwrap_or_default(),
        tuned.loss_at_erm,
        tuned.se_at_erm
    );
    Ok(RunSummary {
        outputs: out.finish("tune", g.workers, &cfg)?,
        passed: true,
    })
}

fn report_csv(r: &BoundReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theorem", "term", "value"]).map_err(Error::from)?;
    for t in &r.terms {
        w.write_record([r.theorem.name(), &t.label, &t.value.to_string()]).map_err(Error::from)?;
    }
    w.write_record([r.theorem.name(), "total", &r.total.to_string()]).map_err(Error::from)?;
    let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(body).expect("csv output is utf-8"))
}

pub fn cmd_bounds(mut cfg: BoundsConfig, g: &GlobalArgs) -> CliResult<RunSummary> {
    let inputs = match (&cfg.inputs, &cfg.instance) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either inputs or instance, not both".into())),
        (None, None) => return Err(CliError::Config("missing inputs: set inputs or instance".into())),
        (Some(inputs), None) => {
            inputs.validate().map_err(config_err)?;
            inputs.clone()
        }
        (None, Some(path)) => {
            let inst = load_instance(path)?;
            let gen = inst
                .generator
                .clone()
                .ok_or_else(|| CliError::Config("instance carries no generator; supply inputs instead".into()))?;
            let mut opts = cfg.measure.clone().unwrap_or_else(|| MeasureOptions::new(0.05, 1000, 0));
            if let Some(s) = g.seed {
                opts.seed = s;
            }
            if !(opts.delta > 0.0 && opts.delta < 1.0) || opts.mc_reps == 0 {
                return Err(CliError::Config("measure.delta must lie in (0, 1) and mc_reps be >= 1".into()));
            }
            cfg.measure = Some(opts.clone());
            let loss = *cfg.loss.get_or_insert(LossSpec::Squared);
            measure_bound_inputs(&inst, &gen, cfg.theorem, &loss, &opts)?
        }
    };
    let report = eval_bound(cfg.theorem, &inputs)?;
    let mut out = Outputs::new(&g.out)?;
    out.json("bounds.json", &report)?;
    out.write("bounds.csv", &report_csv(&report)?)?;
    for t in &report.terms {
        println!("{:<28} {:.6e}", t.label, t.value);
    }
    println!("{:<28} {:.6e}", "total", report.total);
    Ok(RunSummary {
        outputs: out.finish("bounds", g.workers, &cfg)?,
        passed: true,
    })
}

pub fn cmd_experiment(mut cfg: ExperimentConfig, g: &GlobalArgs) -> CliResult<RunSummary> {
    let mut out = Outputs::new(&g.out)?;
    match &mut cfg {
        ExperimentConfig::Sweep(spec) => {
            if let Some(s) = g.seed {
                spec.seed = s;
            }
            spec.validate().map_err(config_err)?;
            let r = run_sweep(spec)?;
            write_result(&r, out.dir, &r.label)?;
            written(&mut out, &r.label);
            print_fit(&r.label, r.fit.map(|f| f.slope));
        }
        ExperimentConfig::LambdaDt(spec) => {
            if let Some(s) = g.seed {
                spec.seed = s;
            }
            if spec.mc_reps == 0 {
                return Err(CliError::Config("mc_reps must be >= 1".into()));
            }
            for r in lambda_dt_scaling_study(spec)? {
                write_result(&r, out.dir, &r.label)?;
                written(&mut out, &r.label);
                print_fit(&r.label, r.fit.map(|f| f.slope));
            }
        }
        ExperimentConfig::Dimension(spec) => {
            if let Some(s) = g.seed {
                spec.seed = s;
            }
            let study = dimension_independence_study(spec)?;
            write_result(&study.result, out.dir, &study.result.label)?;
            written(&mut out, &study.result.label);
            out.json("study.json", &study)?;
            println!(
                "excess-risk ratio {:.4} (reference {:.4})",
                study.ratio, study.reference_ratio
            );
        }
    }
    Ok(RunSummary {
        outputs: out.finish("experiment", g.workers, &cfg)?,
        passed: true,
    })
}

fn written(out: &mut Outputs, stem: &str) {
    for ext in ["csv", "json", "svg"] {
        out.names.push(format!("{stem}.{ext}"));
    }
}

fn print_fit(label: &str, slope: Option<f64>) {
    match slope {
        Some(s) => println!("{label}: log-log slope {s:.4}"),
        None => println!("{label}: fewer than 3 points, no slope"),
    }
}

/// One line per criterion, as printed by `verify` and the acceptance tests.
pub fn criterion_line(run: &CriterionRun) -> String {
    let o = &run.outcome;
    let verdict = if o.passed && run.within_budget() { "PASS" } else { "FAIL" };
    format!(
        "[{verdict}] {:>2} {:<24} {} (want {}); {:.1}s of {}s",
        o.id,
        o.name,
        o.measured,
        o.threshold,
        run.elapsed.as_secs_f64(),
        run.budget.as_secs()
    )
}

pub fn cmd_verify(mut cfg: VerifyConfig, g: &GlobalArgs) -> CliResult<RunSummary> {
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    let out = Outputs::new(&g.out)?;
    let report = verify_all(cfg.seed, out.dir, &|r| println!("{}", criterion_line(r)))?;
    let det = report.outcomes.last().expect("criterion 10 is always present");
    println!(
        "[{}] 10 {:<24} {} (want {})",
        if det.passed { "PASS" } else { "FAIL" },
        det.name,
        det.measured,
        det.threshold
    );
    let passed = report.all_passed();
    let mut outputs = out.finish("verify", g.workers, &cfg)?;
    outputs.extend(["run_a/".to_string(), "run_b/".into(), "summary.csv".into(), "summary.json".into()]);
    Ok(RunSummary { outputs, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn globals(dir: &Path) -> GlobalArgs {
        GlobalArgs {
            config: None,
            seed: Some(7),
            out: dir.to_path_buf(),
            workers: None,
        }
    }

    #[test]
    fn zero_validation_size_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let flags = GenFlags {
            n_v: Some(0),
            ..GenFlags::default()
        };
        let err = run(&Command::Gen(flags), &globals(dir.path())).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("n_v"), "{err}");
    }

    #[test]
    fn unknown_config_field_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, r#"{"T": 3, "bogus": 1}"#).unwrap();
        let mut g = globals(dir.path());
        g.config = Some(cfg);
        let err = run(&Command::Gen(GenFlags::default()), &g).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_instance_is_a_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TuneConfig {
            instance: dir.path().join("absent.bin"),
            family: Family::Ridge,
            search: None,
            loss: LossSpec::Squared,
            rank_tolerance: 1e-10,
        };
        assert_eq!(cmd_tune(cfg, &globals(dir.path())).unwrap_err().exit_code(), 1);
    }
}
