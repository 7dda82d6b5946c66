//! Minimum-squeezing analysis of continuous-variable cluster states.
//!
//! Given the weighted adjacency matrix `A` of a cluster graph, this crate
//!
//! * computes nullifier variances `(1 + Σ_i a_ij²)·v` for input ŷ-variance `v`
//!   ([`criteria`]),
//! * derives the largest `v` for which every edge passes the pairwise
//!   van Loock–Furusawa inseparability test, and the neighbor budget of an
//!   unweighted cluster at fixed squeezing ([`criteria`]),
//! * synthesizes the Bogoliubov transformation `U = (I + iA)(I + A²)^(-1/2) Q`
//!   ([`bogoliubov`]),
//! * cross-checks the closed forms against a Gaussian covariance-matrix
//!   simulation that never uses them ([`oracle`]).
//!
//! Nodes are indexed from zero.

pub mod batch;
pub mod bogoliubov;
pub mod cli;
pub mod criteria;
pub mod error;
pub mod graph;
pub mod matfun;
pub mod oracle;

pub use bogoliubov::{synthesize_u, BogoliubovTransform, NullifierCoefficients};
pub use criteria::{analyze, NullifierReport, SqueezingLevel};
pub use error::{Error, Result};
pub use graph::{parse_graph, validate_adjacency, ClusterGraph, GraphFormat, NodeId};
pub use matfun::{random_orthogonal, OrthogonalMatrix};
pub use oracle::{verify_theorem, CovarianceState, TheoremCheck};
