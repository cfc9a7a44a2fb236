use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("weight vector is empty")]
    EmptyWeight,
    #[error("weights sum to {sum}, expected exactly 1")]
    SumNotOne { sum: String },
    #[error(
        "weight entry {index} is {value}; entries must be positive. A zero weight reduces to \
         fewer dimensions: Bad_θ̂(r̂)×ℝ = Bad_θ(r), so drop that coordinate instead"
    )]
    NonPositiveEntry { index: usize, value: String },
    #[error("weight entry {index} has denominator too large for exact power comparisons")]
    WeightTooFine { index: usize },
    #[error("first curve component must be the identity polynomial x")]
    FirstComponentNotIdentity,
    #[error("curve is degenerate: coefficient matrix of {{1, φ₁, …, φₙ}} has rank {rank}, expected {expected}")]
    Degenerate { rank: usize, expected: usize },
    #[error("{what}: expected {expected} components, found {found}")]
    DimensionMismatch { what: String, expected: usize, found: usize },
    #[error("no admissible base interval: {reason}")]
    NoAdmissibleInterval { reason: String },
    #[error("invalid interval [{left}, {right}]")]
    InvalidInterval { left: String, right: String },
    #[error("shift component {component} violates its Lipschitz bound at x={x}, y={y}")]
    LipschitzViolated { component: usize, x: String, y: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("undecidable at maximum precision: {0}")]
    Undecidable(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstantsError {
    #[error("R inadmissible: failed {}", failed.join("; "))]
    RInadmissible { failed: Vec<String> },
    #[error("lattice minimum estimate is not positive")]
    DegenerateXi,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DangerousError {
    #[error("m = {m} does not exceed 17|I₀|⁻¹d₁ = {threshold}")]
    MTooSmall { m: u64, threshold: String },
    #[error("level {q} band exceeds the scan limit ({count} denominators)")]
    BandTooLarge { q: usize, count: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CantorError {
    #[error("construction extinct: no alive intervals at generation {generation}")]
    Extinct { generation: usize },
    #[error(
        "frontier too large: {count} alive intervals at generation {generation} (limit {limit}); use a beam frontier"
    )]
    FrontierTooLarge { generation: usize, count: usize, limit: usize },
    #[error("unknown strategy {name:?} for {family}; available: {available}")]
    UnknownStrategy { family: String, name: String, available: String },
    #[error("construction not finished: generation {generation} of {q_max}")]
    NotFinished { generation: usize, q_max: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Dangerous(#[from] DangerousError),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("certificate broken at m = {m}: quality {value} below floor {floor}")]
    CertificateBroken { m: u64, value: String, floor: String },
    #[error("no primal solution in the search box")]
    NoPrimalSolution,
    #[error("dual vector not found in the search box")]
    SearchExhausted,
    #[error("linear forms are singular")]
    Singular,
    #[error("malformed input: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key {key:?}: {message}")]
    Field { key: String, message: String },
    #[error("missing required key {0:?}")]
    Missing(String),
    #[error("certificate parse error: {0}")]
    Certificate(String),
}

/// Top-level failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Dangerous(#[from] DangerousError),
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    fn lattice_code(e: &LatticeError) -> i32 {
        match e {
            LatticeError::DimensionMismatch(_) => 2,
            LatticeError::Undecidable(_) | LatticeError::PrecisionExhausted(_) => 3,
        }
    }

    /// 0 pass, 1 verified failure, 2 configuration error, 3 undecidable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Core(_) | Error::Io(_) => 2,
            Error::Constants(ConstantsError::Lattice(l)) | Error::Lattice(l) => Self::lattice_code(l),
            Error::Cantor(CantorError::Lattice(l)) => Self::lattice_code(l),
            Error::Constants(_) => 2,
            Error::Dangerous(_) => 2,
            Error::Cantor(CantorError::Extinct { .. }) => 1,
            Error::Cantor(CantorError::NotFinished { .. }) => 1,
            Error::Cantor(_) => 2,
            Error::Oracle(OracleError::Malformed(_)) => 2,
            Error::Oracle(_) => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
