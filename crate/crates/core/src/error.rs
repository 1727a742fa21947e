use thiserror::Error;

/// Errors produced by the solvers, tuners and estimators in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("system is singular at the requested shift")]
    Singular,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("active set of size {size} is rank deficient; full-rank assumption violated")]
    RankDeficientActiveSet { size: usize },

    #[error("active-set iteration did not settle (kkt residual {kkt_residual:e})")]
    Degenerate { best: Vec<f64>, kkt_residual: f64 },

    #[error("proximal iteration stopped after {iters} iterations with residual {residual:e}")]
    NotConverged {
        iterate: Vec<f64>,
        residual: f64,
        iters: usize,
    },

    #[error("empty search domain: {0}")]
    EmptyDomain(String),

    #[error("missing bound input `{0}`")]
    MissingInput(&'static str),

    #[error("exact subset enumeration supports d <= 15, got d = {0}")]
    DimensionTooLarge(usize),

    #[error("log-log fit needs positive coordinates: {0}")]
    NonPositive(String),

    #[error("task {task}: {source}")]
    Task {
        task: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("grid point {index} (value {value}): {source}")]
    GridPoint {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed instance container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_task(self, task: usize) -> Self {
        Error::Task {
            task,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_grid_point(self, index: usize, value: f64) -> Self {
        Error::GridPoint {
            index,
            value,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
