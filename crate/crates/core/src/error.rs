use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected ({components} components)")]
    DisconnectedGraph { components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("cardinality mismatch: {left} vs {right}")]
    CardinalityMismatch { left: usize, right: usize },

    #[error("weight at index {index} must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("input of size {len} exceeds the exhaustive limit of {max}")]
    TooLarge { len: usize, max: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("invalid subgraph spec: {0}")]
    InvalidSpec(String),

    #[error("edge id {edge_id} is not valid for subgraph {subgraph}")]
    InvalidEdgeId { subgraph: usize, edge_id: usize },

    #[error("I/O error ({context}): {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("bad magic number: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("insufficient data: need {needed} examples, {available} available")]
    InsufficientData { needed: usize, available: usize },

    #[error("incomplete accuracy matrix: {0}")]
    IncompleteMatrix(String),

    #[error("backward transfer is undefined for a single task")]
    UndefinedForSingleTask,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
