use thiserror::Error;

/// Errors raised by the lab's numerical routines.
///
/// Variants carry enough context to be reported per sweep row without
/// aborting the surrounding computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("argument outside the function's domain: {0}")]
    Domain(String),
    #[error("operation not available for domain kind {0}")]
    Kind(String),
    #[error("point is not in the symmetric normal form: {0}")]
    Symmetry(String),
    #[error("1-D minimisation did not converge: {0}")]
    Convergence(String),
    #[error("root is not bracketed: {0}")]
    RootBracket(String),
    #[error("vector is not unit length (|n| = {0})")]
    Normalization(f64),
    #[error("evaluation at the pole of the Cayley map")]
    Pole,
    #[error("fractional power requires Re z1 < 0 (got {0})")]
    Branch(f64),
    #[error("outside the asymptotic regime: {0}")]
    Regime(String),
    #[error("jet constraints are linearly dependent (rank {rank} < {expected})")]
    Rank { rank: usize, expected: usize },
    #[error("metric matrix is not positive definite")]
    SingularMetric,
    #[error("Gram factorisation lost rank: kept {kept} of {total} basis functions")]
    IllConditioned { kept: usize, total: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    /// Exit code used by the command-line driver: 2 for invalid input, 3 for
    /// numerical-regime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io(_) | LabError::Dimension { .. } => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
