use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside the interior of the kernel domain: {0}")]
    DomainViolation(String),

    #[error("kernel `{0}` needs moduli (a coordinate box) to build ell")]
    MissingModuli(String),

    #[error("sampled pair coincides; Bregman ratio undefined")]
    DegeneratePair,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("radius {radius} must exceed ||b||^2/(2 lambda) = {min}")]
    InvalidRadius { radius: f64, min: f64 },

    #[error("invalid problem data: {0}")]
    InvalidData(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("gradient table entry {0} was never stored")]
    Uninitialized(usize),

    #[error("no subproblem solver registered for {0}")]
    UnsupportedCombination(String),

    #[error("unsupported kept component: {0}")]
    UnsupportedKeptComponent(String),

    #[error("inner iteration did not converge (residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("quadratic weight {0} too small for the elastic-net closed form")]
    DegenerateBeta(f64),

    #[error("could not bracket the 1-D minimizer in coordinate {0}")]
    BracketFailure(usize),

    #[error("method `{tag}` incompatible with problem: {reason}")]
    IncompatibleTag { tag: String, reason: String },

    #[error("step {alpha} exceeds the well-posedness bound {bound}")]
    StepTooLarge { alpha: f64, bound: f64 },

    #[error("objective diverged at iteration {iteration}: {value}")]
    DivergenceGuard { iteration: usize, value: f64 },

    #[error("index {index} outside trace of length {len}")]
    IndexOutOfTrace { index: usize, len: usize },

    #[error("problem has no known solution set")]
    UnknownSolutionSet,

    #[error("problem has no growth record")]
    MissingGrowth,

    #[error("initial distance {0} to the solution set exceeds 1")]
    InitialDistanceTooLarge(f64),

    #[error("recursion condition violated: {value} > b = {b}")]
    ConditionViolated { value: f64, b: f64 },

    #[error("invalid recursion instance: {0}")]
    InvalidInstance(String),

    #[error("every sample was degenerate")]
    DegenerateSample,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
