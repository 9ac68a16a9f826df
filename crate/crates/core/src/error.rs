use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GkpError {
    #[error("generator is not symplectically integral: entry ({row},{col}) deviates by {deviation:e}")]
    NotSymplecticallyIntegral { row: usize, col: usize, deviation: f64 },
    #[error("lattice determinant {0} is not an integer")]
    NonIntegerDeterminant(f64),
    #[error("generator matrix is singular")]
    SingularGenerator,
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("enumeration budget exceeded (dimension {dim}, radius^2 {radius_sq:.3e})")]
    EnumerationBudgetExceeded { dim: usize, radius_sq: f64 },
    #[error("lattice sum budget exceeded ({0} points)")]
    LatticeSumBudgetExceeded(usize),
    #[error("theta sum does not converge for c = {0}")]
    NonConvergent(f64),
    #[error("unknown lattice '{0}'")]
    UnknownLattice(String),
    #[error("lattice '{0}' has stored constants only and cannot be enumerated")]
    NotEnumerable(String),
    #[error("generator is not in canonical form diag(d) (x) omega")]
    NotCanonicalBasis,
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("wrong channel kind: {0}")]
    WrongChannelKind(String),
    #[error("Fock cutoff too small: {0}")]
    CutoffTooSmall(String),
    #[error("peak window too small: outermost peak weight {0:e}")]
    WindowTooSmall(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("all correctable weights vanish")]
    DegenerateWeights,
    #[error("series did not converge: {0}")]
    SeriesNonConvergent(String),
    #[error("code space is rank deficient")]
    RankDeficientCodespace,
    #[error("no feasible scaling factor under the infidelity ceiling")]
    NoFeasibleLambda,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, GkpError>;
