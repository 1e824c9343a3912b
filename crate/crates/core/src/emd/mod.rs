//! The extended-metric-dimension dynamic program over nice clique trees.

pub mod context;
pub mod instance;
pub mod rules;
pub mod semantics;
pub mod solver;
pub mod vecs;

use thiserror::Error;

use crate::cliquetree::TreeError;
use crate::graph::VertexId;

/// Saturating sentinel for "no solution".
pub const INFINITY: u32 = u32::MAX;

pub fn add_sat(a: u32, b: u32) -> u32 {
    if a == INFINITY || b == INFINITY {
        INFINITY
    } else {
        a + b
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("graph is not chordal (violating vertex {0})")]
    NotChordal(VertexId),
    #[error("memo budget exceeded: {cap} entries")]
    MemoBudget { cap: usize },
    #[error("join candidate space too wide at node {node}: {pool1}+{pool2} pool traces, {uncovered} uncovered pairs")]
    JoinBlowup {
        node: usize,
        pool1: usize,
        pool2: usize,
        uncovered: usize,
    },
    #[error(transparent)]
    Tree(#[from] TreeError),
}
