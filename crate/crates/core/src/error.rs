use thiserror::Error;

use crate::drawing::{FaceId, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DrawingError {
    #[error("vertex {vertex} is not a real vertex of a drawing with {n_real} real vertices")]
    VertexOutOfRange { vertex: VertexId, n_real: usize },
    #[error("drawings of K_{n_real} are below the seed size")]
    TooSmall { n_real: usize },
    #[error("not a permutation of the real vertices")]
    BadPermutation,
    #[error("malformed rotation system: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unexpected end of input inside a record")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error("n = {0} is outside the supported range")]
    BadN(usize),
    #[error("parity is only defined for odd n, got {0}")]
    EvenN(usize),
    #[error("the normal deficiency property is only defined for even n, got {0}")]
    OddN(usize),
    #[error("inconsistent system: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtendError {
    #[error("budget {budget} is below the base drawing's {base} crossings")]
    BudgetBelowBase { budget: usize, base: usize },
    #[error(
        "face {face}: slack {slack} exceeds {bound}, the largest slack for which \
         distinct-face routings are complete; rerun with distinct faces off"
    )]
    SlackExceedsDistinctFaceBound { face: FaceId, slack: usize, bound: usize },
    #[error("routing tuple does not match the base drawing: {0}")]
    BadCandidate(String),
    #[error(transparent)]
    Drawing(#[from] DrawingError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad shard spec {0:?}, expected i/k with i < k")]
    BadShard(String),
    #[error("bad mode {0:?}, expected alg1 or alg2")]
    BadMode(String),
    #[error("malformed stats file {path}: {msg}")]
    BadStats { path: String, msg: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Extend(#[from] ExtendError),
}
