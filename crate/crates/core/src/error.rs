use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in a graph document a syntax error was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    /// One-based line and column.
    Line { line: usize, column: usize },
    /// Zero-based index into the JSON `edges` array.
    Edge(usize),
    Document,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line { line, column } => write!(f, "line {line}, column {column}"),
            Location::Edge(k) => write!(f, "edge #{k}"),
            Location::Document => f.write_str("document"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adjacency matrix is empty")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("adjacency matrix is not symmetric: a[{i}][{j}] = {a_ij} but a[{j}][{i}] = {a_ji}")]
    NotSymmetric { i: usize, j: usize, a_ij: f64, a_ji: f64 },
    #[error("adjacency matrix has nonzero diagonal entry a[{i}][{i}] = {value}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("weight a[{i}][{j}] = {value} is outside [-1, 1]")]
    WeightOutOfRange { i: usize, j: usize, value: f64 },
    #[error("syntax error at {location}: {message}")]
    Syntax { location: Location, message: String },
    #[error("node {index} does not exist in a graph with {n} nodes")]
    InvalidNode { index: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric within tolerance: |m[{i}][{j}] - m[{j}][{i}]| = {deviation:e}")]
    AsymmetricInput { i: usize, j: usize, deviation: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("eigenvalue {eigenvalue} lies outside the domain of the matrix function")]
    DomainError { eigenvalue: f64 },
    #[error("{what} violated: deviation {deviation:e} exceeds {tolerance:e}")]
    InvariantViolation { what: &'static str, deviation: f64, tolerance: f64 },
    #[error("graph is not unweighted: a[{i}][{j}] = {value}")]
    NotUnweighted { i: usize, j: usize, value: f64 },
    #[error("graph has no edges; the inseparability criterion is undefined")]
    NoEdges,
    #[error("invalid partition: {0}")]
    BadPartition(String),
    #[error("invalid squeezing variance {0}: must be finite and positive")]
    InvalidSqueezing(f64),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. } | Error::InvariantViolation { .. })
    }
}
