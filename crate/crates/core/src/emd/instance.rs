//! Instances of the extended problem the dynamic program solves.

use std::collections::BTreeSet;

use crate::graph::VertexId;

use super::context::NodeContext;
use super::vecs::{DistVec, TraceVec};

/// DP state at a tree node: the forced bag intersection, required
/// internal traces, available external traces, and extra pair
/// obligations. Stored canonically (sorted sets) so instances work as
/// memo keys with structural equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EmdInstance {
    pub s_i: Vec<VertexId>,
    pub d_int: BTreeSet<TraceVec>,
    pub d_ext: BTreeSet<TraceVec>,
    pub d_pairs: BTreeSet<(DistVec, DistVec)>,
}

impl EmdInstance {
    pub fn new(
        mut s_i: Vec<VertexId>,
        d_int: BTreeSet<TraceVec>,
        d_ext: BTreeSet<TraceVec>,
        d_pairs: BTreeSet<(DistVec, DistVec)>,
    ) -> Self {
        s_i.sort_unstable();
        s_i.dedup();
        EmdInstance { s_i, d_int, d_ext, d_pairs }
    }

    /// The root instance `({r}, {r}, ∅, ∅, ∅)`.
    pub fn root(root_vertex: VertexId) -> Self {
        EmdInstance {
            s_i: vec![root_vertex],
            d_int: BTreeSet::new(),
            d_ext: BTreeSet::new(),
            d_pairs: BTreeSet::new(),
        }
    }
}

/// Checks every instance invariant against the node's realizable sets;
/// returns the first violation.
pub fn validate_instance(inst: &EmdInstance, ctx: &NodeContext) -> Result<(), String> {
    let k = ctx.bag.len();
    for &v in &inst.s_i {
        if ctx.bag.binary_search(&v).is_err() {
            return Err(format!("S_I vertex {v} not in bag"));
        }
    }
    if inst.s_i.windows(2).any(|w| w[0] >= w[1]) {
        return Err("S_I not sorted/deduped".into());
    }
    for t in inst.d_int.iter().chain(inst.d_ext.iter()) {
        if t.len() != k {
            return Err(format!("trace arity {} != bag size {k}", t.len()));
        }
        if t.is_all_ones() {
            return Err("all-ones trace".into());
        }
    }
    if inst.d_ext.is_empty() && inst.s_i.is_empty() {
        return Err("D_ext and S_I both empty".into());
    }
    for (r, t) in &inst.d_pairs {
        if r.len() != k || t.len() != k {
            return Err("pair arity mismatch".into());
        }
        for dv in [r, t] {
            if dv.max_entry() > 3 {
                return Err(format!("pair entry {} > 3", dv.max_entry()));
            }
            if dv.min_entry() > 2 {
                return Err(format!("pair min {} > 2", dv.min_entry()));
            }
        }
        if !ctx.inside2.contains(r) {
            return Err(format!("pair with no inside witness: {r:?}"));
        }
        if !ctx.outside2.contains(t) {
            return Err(format!("pair with no outside witness: {t:?}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cliquetree::build_nice_clique_tree;
    use crate::emd::context::node_context;
    use crate::graph::{DistanceMatrix, Graph};

    fn setup() -> (Graph, DistanceMatrix) {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = DistanceMatrix::new(&g);
        (g, d)
    }

    #[test]
    fn root_instance_passes() {
        let (g, d) = setup();
        let t = build_nice_clique_tree(&g, 0).unwrap();
        let ctx = node_context(&g, &d, &t, t.root());
        validate_instance(&EmdInstance::root(0), &ctx).unwrap();
    }

    #[test]
    fn both_empty_rejected() {
        let (g, d) = setup();
        let t = build_nice_clique_tree(&g, 0).unwrap();
        let ctx = node_context(&g, &d, &t, t.root());
        let inst = EmdInstance::new(vec![], BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        let err = validate_instance(&inst, &ctx).unwrap_err();
        assert!(err.contains("both empty"));
    }

    #[test]
    fn pair_without_witness_rejected() {
        let (g, d) = setup();
        let t = build_nice_clique_tree(&g, 0).unwrap();
        // root: no outside vertices, so every pair lacks an outside witness
        let ctx = node_context(&g, &d, &t, t.root());
        let mut pairs = BTreeSet::new();
        pairs.insert((DistVec(vec![0]), DistVec(vec![1])));
        let inst = EmdInstance::new(vec![0], BTreeSet::new(), BTreeSet::new(), pairs);
        let err = validate_instance(&inst, &ctx).unwrap_err();
        assert!(err.contains("witness"), "{err}");
    }
}
