use thiserror::Error;

pub type Result<T> = std::result::Result<T, WalkError>;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("graph size must be at least 2, got {0}")]
    InvalidSize(usize),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex {vertex} has an empty neighborhood")]
    EmptyNeighborhood { vertex: usize },

    #[error("vertex index {index} out of range 1..={n_vertices}")]
    VertexOutOfRange { index: usize, n_vertices: usize },

    #[error("vertex {vertex} lists neighbor {neighbor} more than once")]
    DuplicateNeighbor { vertex: usize, neighbor: usize },

    #[error("graph is unbalanced at vertex {vertex}: in-coin count {in_count} != out-degree {out_degree}")]
    UnbalancedGraph {
        vertex: usize,
        in_count: usize,
        out_degree: usize,
    },

    #[error("n_vertices = {declared} but {found} neighborhoods were given")]
    VertexCountMismatch { declared: usize, found: usize },

    #[error("coin bias delta must lie in [0, 1], got {0}")]
    DeltaOutOfRange(f64),

    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("coin at vertex {vertex} is not unitary (max deviation {deviation:e})")]
    NonUnitaryCoin { vertex: usize, deviation: f64 },

    #[error("coin at vertex {vertex} has dimension {found}, vertex degree is {expected}")]
    CoinDimension {
        vertex: usize,
        expected: usize,
        found: usize,
    },

    #[error("no coin given for vertex {vertex}")]
    MissingCoin { vertex: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("state dimension {0} is not a perfect square")]
    NotSquareDimension(usize),

    #[error("mode {mode} out of range 1..={n_modes}")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("period exceeds the 128-bit integer range")]
    PeriodOverflow,

    #[error("eigenvalue {value} has modulus {modulus}, expected 1")]
    NotUnitModulus { value: String, modulus: f64 },

    #[error("eigendecomposition failed")]
    EigenFailure,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
