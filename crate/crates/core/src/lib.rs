//! Exact metric dimension of chordal graphs.
//!
//! The solver runs a dynamic program over nice clique trees, one rooted
//! run per vertex, and takes the minimum. A brute-force oracle, seeded
//! chordal graph generators, and a property-test harness validate the
//! dynamic program end to end.
//!
//! Runnable walkthroughs live in `examples/`; the `chordal-metric-dim`
//! binary exposes the same functionality as subcommands.

pub mod chordal;
pub mod cliquetree;
pub mod emd;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod selftest;

pub use cliquetree::{build_nice_clique_tree, validate_nice_tree, NiceCliqueTree, NodeKind};
pub use emd::solver::{metric_dimension, DimensionResult, SolverConfig};
pub use emd::SolveError;
pub use gen::random_chordal;
pub use graph::{DistanceMatrix, Graph, VertexId};
pub use oracle::{is_resolving_set, min_resolving_set, resolves, ResolvingSetReport};
