use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Malformed mesh, config or file.
    InvalidInput,
    /// A computation produced a non-finite or non-convergent result.
    Numeric,
    /// The input lies outside the hypotheses of the rigidity statements.
    /// These are expected outcomes for extremal surfaces.
    OutOfHypothesis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("face {face} has area {area:e} below the degeneracy tolerance {tolerance:e}")]
    DegenerateFace { face: usize, area: f64, tolerance: f64 },
    #[error("face {face} references invalid vertex index {index}")]
    InvalidIndex { face: usize, index: usize },
    #[error("face {face} has non-positive multiplicity {value}")]
    NonPositiveMultiplicity { face: usize, value: i64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("non-finite value at vertex {vertex}")]
    NumericFailure { vertex: usize },
    #[error("mesh has boundary vertices; a closed mesh is required")]
    NotClosed,
    #[error("Li-Yau slack {slack} is below -5% of the Willmore energy {willmore}")]
    LiYauViolation { slack: f64, willmore: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("excised mass {excised} exceeds 10% of total mass {total}")]
    ExcisionTooLarge { excised: f64, total: f64 },
    #[error("inversion pole at distance {distance:e} from the surviving mesh (excision radius {eta:e})")]
    PoleOnMesh { distance: f64, eta: f64 },
    #[error("reflection direction has zero length")]
    ZeroDirection,
    #[error("plane fit is degenerate: smallest singular value {sigma_min:e}")]
    DegenerateFit { sigma_min: f64 },
    #[error("fitted plane passes within {foot_norm:e} of the inversion pole")]
    PlaneThroughPole { foot_norm: f64 },
    #[error("comparison sphere coverage {coverage:.4} is below 0.95")]
    CoverageGap { coverage: f64 },
    #[error("grid has {nodes} nodes per side; at least 5 are required")]
    GridTooSmall { nodes: usize },
    #[error("Poisson solver stalled after {iterations} iterations at relative residual {residual:e}")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("invalid zoo spec: {0}")]
    InvalidSpec(String),
    #[error("no analytic reference for kind `{0}`")]
    NoReference(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NumericFailure { .. }
            | Error::LiYauViolation { .. }
            | Error::DegenerateFit { .. }
            | Error::SolverDiverged { .. } => ErrorClass::Numeric,
            Error::HypothesisViolated(_)
            | Error::PlaneThroughPole { .. }
            | Error::CoverageGap { .. } => ErrorClass::OutOfHypothesis,
            _ => ErrorClass::InvalidInput,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegenerateFace { .. } => "DegenerateFace",
            Error::InvalidIndex { .. } => "InvalidIndex",
            Error::NonPositiveMultiplicity { .. } => "NonPositiveMultiplicity",
            Error::InvalidMesh(_) => "InvalidMesh",
            Error::NumericFailure { .. } => "NumericFailure",
            Error::NotClosed => "NotClosed",
            Error::LiYauViolation { .. } => "LiYauViolation",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::ExcisionTooLarge { .. } => "ExcisionTooLarge",
            Error::PoleOnMesh { .. } => "PoleOnMesh",
            Error::ZeroDirection => "ZeroDirection",
            Error::DegenerateFit { .. } => "DegenerateFit",
            Error::PlaneThroughPole { .. } => "PlaneThroughPole",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::SolverDiverged { .. } => "SolverDiverged",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NoReference(_) => "NoReference",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
