use thiserror::Error;

/// Errors raised by geometry construction, discrete operators, norms and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gradient of the level-set function vanishes ({norm:e}) at the evaluation point")]
    DegenerateGradient { norm: f64 },
    #[error("normal vector has length {length} (expected 1)")]
    NonUnitNormal { length: f64 },
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("interval [{a}, {b}] is degenerate")]
    DegenerateInterval { a: f64, b: f64 },
    #[error("vertex {vertex} lies off its level set (psi = {value:e})")]
    VertexOffSurface { vertex: usize, value: f64 },
    #[error("mesh is not connected ({components} components)")]
    NotConnected { components: usize },
    #[error("marked region selects no nodes")]
    EmptyRegion,
    #[error("carrier has zero measure")]
    ZeroMeasure,
    #[error("grid needs at least 3 nodes per axis (axis {axis} has {nodes})")]
    GridTooCoarse { axis: usize, nodes: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} has a degenerate neighbourhood for tangential reconstruction")]
    RankDeficientNeighborhood { vertex: usize },
    #[error("derivative order {order} is outside the supported range (max {max})")]
    OrderOutOfScope { order: usize, max: usize },
    #[error("vector field is not tangential (|<U, nu>| = {defect:e} at node {node})")]
    NotTangential { node: usize, defect: f64 },
    #[error("invalid exponent p = {0}; p must lie in [1, inf]")]
    InvalidP(f64),
    #[error("operator kind `{0}` requires a marked region")]
    MissingRegion(String),
    #[error("operator kind `{kind}` is not supported on {carrier}")]
    UnsupportedKind { kind: String, carrier: String },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("smallest eigenvalue is zero ({lambda_min:e}): the mesh is disconnected or the admissible space contains a null direction")]
    DisconnectedMesh { lambda_min: f64 },
    #[error("no admissible samples among {tried}")]
    NoAdmissibleSamples { tried: usize },
    #[error("dimension {0} is not supported (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("kernel is ambiguous: gap ratio {gap:e} below the required {required:e}")]
    AmbiguousKernel { gap: f64, required: f64 },
    #[error("admissibility projection collapsed the field to zero after {attempts} attempts")]
    ProjectionCollapse { attempts: usize },
    #[error("sample {index} is not admissible: {reason}")]
    InadmissibleSample { index: usize, reason: String },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
