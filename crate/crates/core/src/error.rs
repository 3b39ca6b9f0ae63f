use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("shift operator E appears in a denominator (byte {pos})")]
    ShiftInDenominator { pos: usize },

    #[error("degenerate operator: {0}")]
    Degenerate(String),

    #[error("denominator of b[{j}] vanishes identically at q = 1")]
    ClassicalPole { j: usize },

    #[error("singular evaluation at {at}")]
    Singular { at: String },

    #[error("leading coefficient vanishes at t = {t}")]
    DegreeDrop { t: f64 },

    #[error("equation is not regular: {0}")]
    Irregular(String),

    #[error("ill-conditioned near collision/resonance: {0}")]
    IllConditioned(String),

    #[error("residual {residual:e} above tolerance {tol:e}: {context}")]
    Residual { residual: f64, tol: f64, context: String },

    #[error("{count} subsets requested for degree {degree}; pass an explicit subset list")]
    TooManySubsets { degree: usize, count: usize },

    #[error("singular step at k = {k}: {detail}")]
    SingularStep { k: i64, detail: String },

    #[error("trace stopped at k = {reached}, before target {target}")]
    Aborted { reached: i64, target: i64 },

    #[error("non-isolated singularity on [{lo}, {hi}]")]
    NonIsolatedSingularity { lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
