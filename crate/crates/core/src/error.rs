use thiserror::Error;

/// Errors produced while recording, evaluating, or differentiating a graph.
///
/// Node indices in messages are 1-based, matching the text graph format.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("recording error: {0}")]
    Record(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node {node} ({op}): non-finite result, argument outside the domain")]
    Domain { node: usize, op: &'static str },

    #[error("node {node} ({op}): not differentiable at this point")]
    NonDifferentiable { node: usize, op: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("subgraph error: {0}")]
    Subgraph(String),

    #[error("coloring error: entry ({row}, {col}) cannot be recovered directly")]
    Unrecoverable { row: usize, col: usize },

    #[error("pattern is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
