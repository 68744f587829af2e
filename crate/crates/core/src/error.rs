use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is not connected: vertex `{0}` is unreachable from `{1}`")]
    DisconnectedGraph(String, String),
    #[error("edge {{{0}, {1}}} has non-positive or non-finite conductance {2}")]
    NonpositiveConductance(String, String, f64),
    #[error("vertex `{0}` has negative or non-finite killing rate {1}")]
    NegativeKilling(String, f64),
    #[error("every killing rate is zero; the loop measure would have infinite mass")]
    AllKillingZero,
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(String, String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("no value supplied for vertex `{0}`")]
    MissingVertexValue(String),
    #[error("matrix I - P is singular or not positive-definite (spectral radius >= 1)")]
    SingularMatrix,
    #[error("not a spanning tree rooted at the cemetery: {0}")]
    NotASpanningTree(String),
    #[error("loop must have at least two steps, got {0}")]
    LoopTooShort(usize),
    #[error("step {0} -> {1} is not an edge of the graph")]
    EdgeNotInGraph(String, String),
    #[error("based loop does not start at its base vertex")]
    NotALoopAtBase,
    #[error("vertex order is not a permutation of the vertex set")]
    InvalidOrder,
    #[error("random walk exceeded {0} steps without being absorbed")]
    NonTermination(u64),
    #[error("fixed-point iteration did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("generating-function parameter s = {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("the trivial class has no geodesic mass; use the contractible mass instead")]
    TrivialClass,
    #[error("adaptive quadrature did not reach tolerance {0:e} (estimated error {1:e})")]
    QuadratureFailure(f64, f64),
    #[error("negative discriminant {0} in the regular-graph closed form")]
    NegativeDiscriminant(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported group `{0}`")]
    UnsupportedGroup(String),
    #[error("invalid group data: {0}")]
    InvalidGroup(String),
    #[error("no group element assigned to oriented edge {0} -> {1}")]
    UnassignedEdge(String, String),
    #[error("edge assignment is inconsistent: {0}")]
    InconsistentAssignment(String),
    #[error("log-determinant has imaginary part {0:e}")]
    NonRealDeterminant(f64),
    #[error("class mass {0} is negative")]
    NegativeMass(f64),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("configuration error: {0}")]
    ConfigParse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::ConfigParse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
