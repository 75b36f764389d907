use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not self-adjoint (defect {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not a projection (defect {0:.3e})")]
    NotProjection(f64),
    #[error("delta {0} is outside (0, 1/4)")]
    DeltaOutOfRange(f64),
    #[error("eigenvalue {0:.6} lies in the spectral gap")]
    SpectralGap(f64),
    #[error("pairwise overlap {found:.3e} exceeds the admissible bound {bound:.3e}")]
    OverlapTooLarge { found: f64, bound: f64 },
    #[error("commutator bound violated: measured {measured:.3e} > {bound:.3e}")]
    CommutatorBound { measured: f64, bound: f64 },
    #[error("eigenvalue clusters at phases {0:.6} and {1:.6} are too close to separate")]
    AmbiguousClusters(f64, f64),
    #[error("eigenvalue phase {phase:.6} is not within tolerance of a {k}-th root of unity")]
    NotRootOfUnity { phase: f64, k: u64 },
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("unknown group element: {0}")]
    UnknownElement(String),
    #[error("groups are incompatible: {0}")]
    IncompatibleGroups(String),
    #[error("stage {requested} requested but only {available} factors are available")]
    StageExhausted { requested: usize, available: usize },
    #[error("cannot compare prefix-only supernatural numbers")]
    PrefixOnly,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid factor sequence: {0}")]
    InvalidSequence(String),
    #[error("theta must be irrational for infinite-order generators")]
    RationalTheta,
    #[error("epsilon schedule must be strictly positive and decreasing")]
    ScheduleNotDecreasing,
    #[error("dimension {dim} exceeds the size limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("no feasible plan: {0}")]
    Infeasible(String),
    #[error("eigenvalue class {class} is empty at level {level}")]
    MissingEigenClass { level: usize, class: u64 },
    #[error("factor image is not diagonal: {0}")]
    NotDiagonal(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
