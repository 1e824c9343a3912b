//! Randomized DP-vs-oracle equivalence harness and the structural
//! invariant suites it draws on. The acceptance tests and the
//! `selftest` subcommand both run through here.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::chordal::{is_chordal, maximal_cliques, Chordality};
use crate::cliquetree::{build_nice_clique_tree, validate_nice_tree, NiceCliqueTree, NodeKind};
use crate::emd::solver::{metric_dimension, SolverConfig};
use crate::emd::vecs::{distance_vector, trace_of, vector_resolves, TraceVec};
use crate::gen::random_chordal;
use crate::graph::{DistanceMatrix, Graph, VertexId};
use crate::oracle;

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub trials: usize,
    pub n_max: usize,
    pub omega_max: usize,
    pub seed: u64,
    pub oracle_cap: usize,
    pub solver: SolverConfig,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            trials: 50,
            n_max: 10,
            omega_max: 3,
            seed: 0xC0FFEE,
            oracle_cap: 16,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub trials: usize,
    pub equivalence_failures: usize,
    pub invariant_failures: usize,
    pub solver_errors: usize,
    pub lemma3_checks: usize,
    pub projection_checks: usize,
    pub lines: Vec<String>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.equivalence_failures == 0 && self.invariant_failures == 0 && self.solver_errors == 0
    }
}

/// Fully reproducible for a fixed config, including the verdict.
pub fn run_selftest(cfg: &SelftestConfig) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rep = SelftestReport::default();
    for trial in 0..cfg.trials {
        let n = rng.gen_range(2..=cfg.n_max.min(cfg.oracle_cap));
        let omega = rng.gen_range(2..=cfg.omega_max);
        let seed = rng.gen::<u64>();
        rep.trials += 1;
        let g = random_chordal(n, omega, seed).expect("valid generator parameters");
        let dist = DistanceMatrix::new(&g);

        let oracle_rep = oracle::min_resolving_set(&g, None, cfg.oracle_cap)
            .expect("n capped by oracle limit");
        let dp = match metric_dimension(&g, &cfg.solver) {
            Ok(r) => r,
            Err(e) => {
                rep.solver_errors += 1;
                rep.lines
                    .push(format!("trial {trial} n {n} omega {omega} seed {seed} solver_error {e}"));
                continue;
            }
        };
        let equal = dp.dim as usize == oracle_rep.size;
        let witness_ok = oracle::is_resolving_set(&dp.witness, &g, &dist)
            && dp.witness.len() as u32 == dp.dim;
        if !equal || !witness_ok {
            rep.equivalence_failures += 1;
        }
        rep.lines.push(format!(
            "trial {trial} n {n} omega {omega} seed {seed} dp {} oracle {} witness_ok {} ok {}",
            dp.dim, oracle_rep.size, witness_ok, equal && witness_ok
        ));

        // structural suites on the same graph, one rooted tree
        let root = (trial % n) as VertexId;
        match build_nice_clique_tree(&g, root) {
            Ok(tree) => {
                if let Err(v) = validate_nice_tree(&g, &tree, root) {
                    rep.invariant_failures += 1;
                    rep.lines.push(format!("trial {trial} tree_invariant {v}"));
                }
                match far_resolution_suite(&g, &dist, &tree) {
                    Ok(c) => rep.lemma3_checks += c,
                    Err(v) => {
                        rep.invariant_failures += 1;
                        rep.lines.push(format!("trial {trial} far_resolution {v}"));
                    }
                }
                match projection_suites(&g, &dist, &tree) {
                    Ok(c) => rep.projection_checks += c,
                    Err(v) => {
                        rep.invariant_failures += 1;
                        rep.lines.push(format!("trial {trial} projection {v}"));
                    }
                }
            }
            Err(e) => {
                rep.invariant_failures += 1;
                rep.lines.push(format!("trial {trial} tree_build {e}"));
            }
        }
    }
    rep
}

/// Clique window property: distances from any vertex to a maximal
/// clique span at most two consecutive values.
pub fn clique_window_suite(g: &Graph, dist: &DistanceMatrix) -> Result<usize, String> {
    let Chordality::Chordal { mcs_order } = is_chordal(g) else {
        return Err("graph not chordal".into());
    };
    let mut checked = 0;
    for clique in maximal_cliques(g, &mcs_order) {
        for x in g.vertices() {
            let dv = distance_vector(x, &clique, dist);
            if !dv.satisfies_window() {
                return Err(format!("window violated at vertex {x}, clique {clique:?}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// For every bag K and component split of G minus K: a vertex on the
/// far side of the split resolves every inside pair whose distances to
/// K differ by at least 2. Returns the number of (s, pair) checks.
pub fn far_resolution_suite(
    g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
) -> Result<usize, String> {
    let n = g.n();
    let mut seen_bags: std::collections::BTreeSet<Vec<VertexId>> = Default::default();
    let mut checked = 0;
    for i in 0..tree.len() {
        if i == tree.root() {
            continue;
        }
        let bag = tree.node(i).bag.clone();
        if !seen_bags.insert(bag.clone()) {
            continue;
        }
        let comps = components_without(g, &bag);
        for comp in &comps {
            // G_ext = this component plus the bag; G_int = the rest
            let mut in_ext = vec![false; n];
            for &v in comp.iter().chain(bag.iter()) {
                in_ext[v] = true;
            }
            let g_int: Vec<VertexId> = (0..n).filter(|&v| !in_ext[v]).collect();
            let g_ext: Vec<VertexId> = (0..n).filter(|&v| in_ext[v]).collect();
            for (ai, &x1) in g_int.iter().enumerate() {
                let d1 = dist.dist_to_set(x1, &bag);
                for &x2 in &g_int[ai + 1..] {
                    let d2 = dist.dist_to_set(x2, &bag);
                    if d1.abs_diff(d2) < 2 {
                        continue;
                    }
                    for &s in &g_ext {
                        checked += 1;
                        if dist.d(s, x1) == dist.d(s, x2) {
                            return Err(format!(
                                "far pair ({x1},{x2}) not resolved by {s} across bag {bag:?}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(checked)
}

/// Instantiates the close-pair induction: for a bag and two tree
/// components, if every cross pair within distance 2 of the bag is
/// resolved by S (taken as everything outside the two components, plus
/// the bag), then every cross pair with distance gap at most 1 is
/// resolved by S. Returns (activations, checks).
pub fn close_pair_induction_suite(
    g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
) -> Result<(usize, usize), String> {
    let n = g.n();
    let mut activations = 0;
    let mut checks = 0;
    for i in 0..tree.len() {
        let bag = &tree.node(i).bag;
        let comps = tree_components_vertices(tree, i, n);
        for a in 0..comps.len() {
            for b in a + 1..comps.len() {
                let xa = &comps[a];
                let xb = &comps[b];
                if xa.is_empty() || xb.is_empty() {
                    continue;
                }
                let mut s: Vec<VertexId> = bag.clone();
                for (k, comp) in comps.iter().enumerate() {
                    if k != a && k != b {
                        s.extend(comp.iter().copied());
                    }
                }
                s.sort_unstable();
                s.dedup();
                // hypothesis: cross pairs with both sides within 2 resolved by S
                let hyp = cross_pairs(xa, bag, xb)
                    .filter(|&(u, v)| {
                        dist.dist_to_set(u, bag) <= 2 && dist.dist_to_set(v, bag) <= 2
                    })
                    .all(|(u, v)| s.iter().any(|&w| dist.d(w, u) != dist.d(w, v)));
                if !hyp {
                    continue;
                }
                activations += 1;
                for u in xa.iter().copied() {
                    for v in xb.iter().copied() {
                        let du = dist.dist_to_set(u, bag);
                        let dv = dist.dist_to_set(v, bag);
                        if du.abs_diff(dv) > 1 {
                            continue;
                        }
                        checks += 1;
                        if !s.iter().any(|&w| dist.d(w, u) != dist.d(w, v)) {
                            return Err(format!(
                                "close pair ({u},{v}) unresolved at node {i} bag {bag:?}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok((activations, checks))
}

fn cross_pairs<'a>(
    xa: &'a [VertexId],
    bag: &'a [VertexId],
    xb: &'a [VertexId],
) -> impl Iterator<Item = (VertexId, VertexId)> + 'a {
    let left: Vec<VertexId> = xa.iter().chain(bag.iter()).copied().collect();
    let right: Vec<VertexId> = xb.iter().chain(bag.iter()).copied().collect();
    left.into_iter().flat_map(move |u| {
        right
            .clone()
            .into_iter()
            .filter_map(move |v| if u != v { Some((u, v)) } else { None })
    })
}

/// Both coordinate-drop equivalences: at every introduce node, a
/// binary vector resolves a subtree pair over the big bag iff its
/// projection does over the child bag; at every forget node, the same
/// with the forgotten coordinate fixed to 1. Exhaustive over binary
/// vectors; returns the number of (pair, vector) checks.
pub fn projection_suites(
    _g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
) -> Result<usize, String> {
    let mut checked = 0;
    for i in 0..tree.len() {
        match tree.node(i).kind {
            NodeKind::Introduce(v) => {
                let child = tree.node(i).children[0];
                let idx = tree.node(i).bag.binary_search(&v).unwrap();
                let big = &tree.node(i).bag;
                let small = &tree.node(child).bag;
                let sub = tree.subtree_vertices(child).unwrap();
                let k = big.len();
                for (ai, &x) in sub.iter().enumerate() {
                    for &y in &sub[ai + 1..] {
                        let bx = distance_vector(x, big, dist);
                        let by = distance_vector(y, big, dist);
                        let sx = distance_vector(x, small, dist);
                        let sy = distance_vector(y, small, dist);
                        for bits in 0..(1u16 << k) {
                            let r = TraceVec::from_bits_unchecked(k, bits);
                            let r_small = r.drop_coord(idx);
                            checked += 1;
                            if vector_resolves(&bx, &by, &r)
                                != vector_resolves(&sx, &sy, &r_small)
                            {
                                return Err(format!(
                                    "introduce projection failed at node {i}, pair ({x},{y}), bits {bits:#b}"
                                ));
                            }
                        }
                    }
                }
            }
            NodeKind::Forget(v) => {
                let child = tree.node(i).children[0];
                let idx = tree.node(child).bag.binary_search(&v).unwrap();
                let big = &tree.node(child).bag;
                let small = &tree.node(i).bag;
                let sub = tree.subtree_vertices(child).unwrap();
                let k = big.len();
                for (ai, &x) in sub.iter().enumerate() {
                    for &y in &sub[ai + 1..] {
                        let bx = distance_vector(x, big, dist);
                        let by = distance_vector(y, big, dist);
                        let sx = distance_vector(x, small, dist);
                        let sy = distance_vector(y, small, dist);
                        for bits in 0..(1u16 << k) {
                            let r = TraceVec::from_bits_unchecked(k, bits);
                            // the forgotten coordinate must be 1, and
                            // all-ones is not a trace: a resolver
                            // strictly closer to the forgotten vertex
                            // shifts every minimum
                            if r.get(idx) != 1 || r.is_all_ones() {
                                continue;
                            }
                            let r_small = r.drop_coord(idx);
                            checked += 1;
                            if vector_resolves(&bx, &by, &r)
                                != vector_resolves(&sx, &sy, &r_small)
                            {
                                return Err(format!(
                                    "forget projection failed at node {i}, pair ({x},{y}), bits {bits:#b}"
                                ));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(checked)
}

/// Trace soundness: whenever a separator bag separates s from x and y,
/// s resolves (x,y) exactly when its trace resolves their distance
/// vectors. Returns checks performed.
pub fn trace_soundness_suite(
    g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
) -> Result<usize, String> {
    let n = g.n();
    let mut checked = 0;
    for i in 0..tree.len() {
        if i == tree.root() {
            continue;
        }
        let bag = &tree.node(i).bag;
        let sub = tree.subtree_vertices(i).unwrap();
        let outside: Vec<VertexId> = (0..n).filter(|v| sub.binary_search(v).is_err()).collect();
        for &s in &outside {
            let tr = trace_of(s, bag, dist);
            let shift = dist.dist_to_set(s, bag);
            for (ai, &x) in sub.iter().enumerate() {
                if bag.binary_search(&x).is_ok() {
                    continue;
                }
                for &y in &sub[ai + 1..] {
                    if bag.binary_search(&y).is_ok() {
                        continue;
                    }
                    checked += 1;
                    let vx = distance_vector(x, bag, dist);
                    let vy = distance_vector(y, bag, dist);
                    let by_vector = vector_resolves(&vx, &vy, &tr);
                    let by_vertex = dist.d(s, x) != dist.d(s, y);
                    if by_vector != by_vertex {
                        return Err(format!(
                            "trace soundness failed: s {s} (shift {shift}) pair ({x},{y}) bag {bag:?}"
                        ));
                    }
                }
            }
        }
    }
    Ok(checked)
}

fn components_without(g: &Graph, removed: &[VertexId]) -> Vec<Vec<VertexId>> {
    let n = g.n();
    let mut blocked = vec![false; n];
    for &v in removed {
        blocked[v] = true;
    }
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if blocked[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !blocked[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Vertex sets of the tree components obtained by deleting node `i`,
/// each minus the bag of `i`.
fn tree_components_vertices(tree: &NiceCliqueTree, i: usize, n: usize) -> Vec<Vec<VertexId>> {
    let bag = &tree.node(i).bag;
    let mut comps = Vec::new();
    for &c in &tree.node(i).children {
        let verts: Vec<VertexId> = tree
            .subtree_vertices(c)
            .unwrap()
            .iter()
            .copied()
            .filter(|v| bag.binary_search(v).is_err())
            .collect();
        comps.push(verts);
    }
    // the component above i
    let sub = tree.subtree_vertices(i).unwrap();
    let above: Vec<VertexId> = (0..n)
        .filter(|v| sub.binary_search(v).is_err() && bag.binary_search(v).is_err())
        .collect();
    comps.push(above);
    comps
}
