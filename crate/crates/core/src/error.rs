use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off:.3e})"
    )]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("function undefined at eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },

    #[error("matrix is singular (pivot {pivot:.3e} below {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("columns are linearly dependent (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },

    #[error("subspace is not invariant under the conjugation (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("extracted only {found} of {expected} fixed vectors")]
    RankLoss { found: usize, expected: usize },

    #[error("dimension {dim} exceeds oracle cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("operator is not J-unitary (residual {residual:.3e}, threshold {threshold:.3e})")]
    NotJUnitary { residual: f64, threshold: f64 },

    #[error("bad factor: {factor} fails ({residual:.3e} vs threshold {threshold:.3e})")]
    BadFactor {
        factor: String,
        residual: f64,
        threshold: f64,
    },

    #[error("operator domain is not J-invariant (residual {residual:.3e})")]
    DomainNotJInvariant { residual: f64 },

    #[error("precondition `{check}` failed (residual {residual:.3e}, threshold {threshold:.3e})")]
    GateFailed {
        check: String,
        residual: f64,
        threshold: f64,
    },

    #[error(
        "V - I stays singular after {attempts} attempts (dim ker = {kernel_dim}); \
         the inverse Cayley transform is a multivalued linear relation, not an operator"
    )]
    MultivaluedRelation { kernel_dim: usize, attempts: usize },

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("bad shape: {0}")]
    BadShape(String),

    #[error("parse error: {0}")]
    Parse(String),
}
