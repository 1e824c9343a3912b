//! Per-node precomputation: the distance-vector and trace sets the
//! dynamic-programming rules quantify over.

use std::collections::BTreeSet;

use crate::cliquetree::NiceCliqueTree;
use crate::graph::{DistanceMatrix, Graph, VertexId};

use super::vecs::{distance_vector, trace_of, DistVec, TraceVec};

/// Realizable vector sets at one tree node.
#[derive(Debug, Clone)]
pub struct NodeContext {
    pub node: usize,
    /// Bag in canonical (ascending id) order.
    pub bag: Vec<VertexId>,
    /// Distance vectors of subtree vertices within distance 2 of the bag.
    pub inside2: BTreeSet<DistVec>,
    /// Same, restricted to subtree vertices outside the bag.
    pub inside2_strict: BTreeSet<DistVec>,
    /// Distance vectors of non-subtree vertices within distance 2.
    pub outside2: BTreeSet<DistVec>,
    /// Traces of all subtree vertices.
    pub inside_traces: BTreeSet<TraceVec>,
    /// Traces of all non-subtree vertices.
    pub outside_traces: BTreeSet<TraceVec>,
    /// Distance vectors of all subtree vertices, unbounded distance.
    pub inside_vecs_all: BTreeSet<DistVec>,
}

/// Scans every vertex once; exact sets.
pub fn node_context(
    g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
    node: usize,
) -> NodeContext {
    let bag = tree.node(node).bag.clone();
    let sub = tree
        .subtree_vertices(node)
        .expect("node id from the tree itself");
    let mut in_subtree = vec![false; g.n()];
    for &v in sub {
        in_subtree[v] = true;
    }
    let mut ctx = NodeContext {
        node,
        bag: bag.clone(),
        inside2: BTreeSet::new(),
        inside2_strict: BTreeSet::new(),
        outside2: BTreeSet::new(),
        inside_traces: BTreeSet::new(),
        outside_traces: BTreeSet::new(),
        inside_vecs_all: BTreeSet::new(),
    };
    for x in g.vertices() {
        let dv = distance_vector(x, &bag, dist);
        let near = dv.min_entry() <= 2;
        if in_subtree[x] {
            ctx.inside_traces.insert(trace_of(x, &bag, dist));
            ctx.inside_vecs_all.insert(dv.clone());
            if near {
                if bag.binary_search(&x).is_err() {
                    ctx.inside2_strict.insert(dv.clone());
                }
                ctx.inside2.insert(dv);
            }
        } else {
            ctx.outside_traces.insert(trace_of(x, &bag, dist));
            if near {
                ctx.outside2.insert(dv);
            }
        }
    }
    ctx
}

/// Contexts for every node of the tree.
pub fn all_contexts(g: &Graph, dist: &DistanceMatrix, tree: &NiceCliqueTree) -> Vec<NodeContext> {
    (0..tree.len()).map(|i| node_context(g, dist, tree, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliquetree::build_nice_clique_tree;

    #[test]
    fn p4_context_by_inspection() {
        // 0-1-2-3; find a node with bag {1,2} and subtree {0,1,2}
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = DistanceMatrix::new(&g);
        let t = build_nice_clique_tree(&g, 3).unwrap();
        let node = (0..t.len()).find(|&i| {
            t.node(i).bag == vec![1, 2] && t.subtree_vertices(i).unwrap() == [0, 1, 2]
        });
        if let Some(i) = node {
            let ctx = node_context(&g, &d, &t, i);
            let expect: BTreeSet<_> = [
                DistVec(vec![1, 2]),
                DistVec(vec![0, 1]),
                DistVec(vec![1, 0]),
            ]
            .into_iter()
            .collect();
            assert_eq!(ctx.inside2, expect);
            let out: BTreeSet<_> = [DistVec(vec![2, 1])].into_iter().collect();
            assert_eq!(ctx.outside2, out);
        }
    }

    #[test]
    fn root_has_empty_outside() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = DistanceMatrix::new(&g);
        let t = build_nice_clique_tree(&g, 0).unwrap();
        let ctx = node_context(&g, &d, &t, t.root());
        assert!(ctx.outside2.is_empty());
        assert!(ctx.outside_traces.is_empty());
    }

    #[test]
    fn bag_vertices_always_in_inside2() {
        let g = crate::gen::random_chordal(12, 3, 5).unwrap();
        let d = DistanceMatrix::new(&g);
        let t = build_nice_clique_tree(&g, 0).unwrap();
        for i in 0..t.len() {
            let ctx = node_context(&g, &d, &t, i);
            for &v in &ctx.bag {
                let dv = distance_vector(v, &ctx.bag, &d);
                assert!(ctx.inside2.contains(&dv));
            }
        }
    }
}
