use std::path::PathBuf;

use thiserror::Error;

use crate::level::{Edge, Level};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: non-triangular face with {corners} corners")]
    NonTriangularFace { line: usize, corners: usize },
    #[error("face {face} references vertex {index}, mesh has {vertex_count} vertices")]
    DanglingIndex {
        face: usize,
        index: i64,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex")]
    DegenerateFace { face: usize },
    #[error("invalid vertex id {0}")]
    InvalidVertex(u32),
    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),
}

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("mesh is not an open disk: {0}")]
    NotADisk(String),
    #[error("boundary loop has {0} vertices, need at least 3")]
    BoundaryTooShort(usize),
    #[error("linear solve did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("top edge holds {0} vertices, need at least 2")]
    TopEdgeTooShort(usize),
    #[error("abscissas on the top edge are not strictly increasing")]
    EqualAbscissas,
    #[error("corners must be four distinct boundary vertices in counterclockwise loop order")]
    BadCorners,
}

#[derive(Debug, Error)]
pub enum IsomatrixError {
    #[error("level lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("stratify stalled at level {level}: no unvisited vertex added (last level: {last})")]
    Stall { level: usize, last: Level },
    #[error("align2 precondition violated: vertex {0} has surplus multiplicity but is absent from the second level")]
    Align2Missing(u32),
    #[error("rows {row} and {next} disagree on their run structure")]
    RowMismatch { row: usize, next: usize },
    #[error("V-matrix is not connectivity-preserving: {missing_vertices} missing vertices, missing edges {missing:?}, extra edges {extra:?}")]
    NotPreserving {
        missing_vertices: usize,
        missing: Vec<Edge>,
        extra: Vec<Edge>,
    },
    #[error("level {level}: component spans of the new level are not ordered along the previous level")]
    NonMonotone { level: usize },
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("some vertex cannot be recovered from run boundaries")]
    NotRunDecodable,
    #[error("threshold alpha must be at least 2, got {0}")]
    BadAlpha(usize),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("bit depth must be 8 or 16, got {0}")]
    BitDepth(u8),
    #[error("degenerate coordinate range: all coordinates equal {0}")]
    DegenerateRange(f64),
    #[error("unknown codec {0:?}")]
    UnknownCodec(String),
    #[error("invalid codec parameter: {0}")]
    BadCodecParam(String),
    #[error("run counts inconsistent with a {r1}x{r2} array: {msg}")]
    RunCounts { r1: usize, r2: usize, msg: String },
    #[error("malformed container: {0}")]
    Malformed(String),
    #[error("checksum mismatch: header says {expected}, payload hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("input is not an open genus-zero triangle mesh:\n{0}")]
    Topology(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Isomatrix(#[from] IsomatrixError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
