use thiserror::Error;

/// Errors raised anywhere in the kernel, problem, and solver pipeline.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space specification: {0}")]
    InvalidSpec(String),

    #[error("kernel condition system is singular (pivot {pivot:.3e}); the constraint set does not define a norm")]
    SingularConditionSystem { pivot: f64 },

    #[error("point {value} lies outside [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("data is not differentiable enough: {0}")]
    NonDifferentiableData(String),

    #[error("unknown built-in example {0} (expected 1, 2 or 3)")]
    UnknownExample(u32),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("kernel domain mismatch: {0}")]
    KernelDomainMismatch(String),

    #[error("collocation system is numerically singular: {0}")]
    NumericallySingular(String),

    #[error("finite-difference system is singular: {0}")]
    SingularDiscretization(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// Short category name used in one-line failure reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularConditionSystem { .. }
            | Error::NumericallySingular(_)
            | Error::SingularDiscretization(_) => "numerical",
            Error::Io(_) => "io",
            _ => "usage",
        }
    }

    /// Process exit status: 3 for numerical failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "numerical" => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
