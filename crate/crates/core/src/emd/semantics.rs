//! First-principles meaning of an instance: which vertex sets solve it.
//!
//! `is_solution` evaluates the four solution conditions directly from
//! graph distances, with no shortcuts shared with the recurrences, and
//! `exhaustive_min_solution` scans all subsets of the subtree. Together
//! they are the per-node ground truth the DP rules are checked against.

use crate::cliquetree::NiceCliqueTree;
use crate::graph::{DistanceMatrix, Graph, VertexId};

use super::instance::EmdInstance;
use super::vecs::{distance_vector, trace_of, vector_resolves};

/// Bundles the immutable per-run state the DP consults.
pub struct DpEnv<'a> {
    pub g: &'a Graph,
    pub dist: &'a DistanceMatrix,
    pub tree: &'a NiceCliqueTree,
}

impl<'a> DpEnv<'a> {
    pub fn bag(&self, node: usize) -> &[VertexId] {
        &self.tree.node(node).bag
    }

    pub fn subtree(&self, node: usize) -> &[VertexId] {
        self.tree.subtree_vertices(node).expect("valid node")
    }
}

/// Def.-level check that `s` solves `inst` at `node`.
///
/// S1: every pair inside the subtree is resolved by a vertex of `s` or
///     by an external-trace vector;
/// S2: every required trace is realized by some vertex of `s`;
/// S3: every listed pair obligation is resolved by a vertex of `s`;
/// S4: `s` meets the bag exactly in `S_I`.
pub fn is_solution(s: &[VertexId], inst: &EmdInstance, node: usize, env: &DpEnv) -> bool {
    let bag = env.bag(node);
    let sub = env.subtree(node);
    let dist = env.dist;

    // S4
    let s_in_bag: Vec<VertexId> = s
        .iter()
        .copied()
        .filter(|v| bag.binary_search(v).is_ok())
        .collect();
    if s_in_bag != inst.s_i {
        return false;
    }
    if s.iter().any(|v| sub.binary_search(v).is_err()) {
        return false;
    }

    // S1
    for (i, &x) in sub.iter().enumerate() {
        for &y in &sub[i + 1..] {
            let by_vertex = s.iter().any(|&v| dist.d(v, x) != dist.d(v, y));
            if by_vertex {
                continue;
            }
            let rx = distance_vector(x, bag, dist);
            let ry = distance_vector(y, bag, dist);
            if !inst.d_ext.iter().any(|t| vector_resolves(&rx, &ry, t)) {
                return false;
            }
        }
    }

    // S2
    for r in &inst.d_int {
        if !s.iter().any(|&v| trace_of(v, bag, dist) == *r) {
            return false;
        }
    }

    // S3: obligations quantify over concrete realizers on both sides.
    for (r, t) in &inst.d_pairs {
        for &x in sub {
            if distance_vector(x, bag, dist) != *r {
                continue;
            }
            for y in env.g.vertices() {
                if sub.binary_search(&y).is_ok() {
                    continue;
                }
                if distance_vector(y, bag, dist) != *t {
                    continue;
                }
                if !s.iter().any(|&v| dist.d(v, x) != dist.d(v, y)) {
                    return false;
                }
            }
        }
    }
    true
}

use super::INFINITY;

/// Minimum solution size by scanning all subsets of the subtree,
/// smallest first; `INFINITY` when none solves the instance. Intended
/// for tiny subtrees only.
pub fn exhaustive_min_solution(
    inst: &EmdInstance,
    node: usize,
    env: &DpEnv,
) -> (u32, Option<Vec<VertexId>>) {
    let sub = env.subtree(node);
    let m = sub.len();
    assert!(m <= 25, "exhaustive search capped at 25 subtree vertices");
    let mut masks: Vec<u32> = (0..(1u32 << m)).collect();
    masks.sort_by_key(|x| x.count_ones());
    for mask in masks {
        let s: Vec<VertexId> = (0..m).filter(|j| mask >> j & 1 == 1).map(|j| sub[j]).collect();
        if is_solution(&s, inst, node, env) {
            return (mask.count_ones(), Some(s));
        }
    }
    (INFINITY, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliquetree::build_nice_clique_tree;
    use crate::emd::instance::EmdInstance;
    use std::collections::BTreeSet;

    #[test]
    fn root_instance_solutions_are_resolving_sets_containing_root() {
        let g = crate::graph::Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let dist = DistanceMatrix::new(&g);
        let tree = build_nice_clique_tree(&g, 0).unwrap();
        let env = DpEnv { g: &g, dist: &dist, tree: &tree };
        let inst = EmdInstance::root(0);
        // {0} is an endpoint of P4, so it resolves everything
        assert!(is_solution(&[0], &inst, tree.root(), &env));
        // {1} fails S4 (does not contain the root)
        assert!(!is_solution(&[1], &inst, tree.root(), &env));
        let (dim, witness) = exhaustive_min_solution(&inst, tree.root(), &env);
        assert_eq!(dim, 1);
        assert_eq!(witness.unwrap(), vec![0]);
    }

    #[test]
    fn s2_forces_trace_realization() {
        let g = crate::graph::Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let dist = DistanceMatrix::new(&g);
        let tree = build_nice_clique_tree(&g, 0).unwrap();
        let env = DpEnv { g: &g, dist: &dist, tree: &tree };
        let root = tree.root();
        // require the trace (0) over bag {0}: any nonempty S realizes it
        let mut d_int = BTreeSet::new();
        d_int.insert(crate::emd::vecs::TraceVec::zeros(1));
        let inst = EmdInstance::new(vec![0], d_int, BTreeSet::new(), BTreeSet::new());
        assert!(is_solution(&[0], &inst, root, &env));
        let inst2 = EmdInstance::new(
            vec![],
            inst.d_int.clone(),
            [crate::emd::vecs::TraceVec::zeros(1)].into_iter().collect(),
            BTreeSet::new(),
        );
        // S = {} cannot realize the required trace
        assert!(!is_solution(&[], &inst2, root, &env));
    }
}
