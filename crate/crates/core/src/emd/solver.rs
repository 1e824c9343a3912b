//! Memoized top-down evaluation of the recurrences, the rooted run
//! (minimum resolving set containing the root), and the min-over-roots
//! driver with witness reconstruction.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use crate::cliquetree::{build_nice_clique_tree, NiceCliqueTree, NodeKind};
use crate::graph::{DistanceMatrix, Graph, VertexId};
use crate::oracle;

use super::context::{all_contexts, NodeContext};
use super::instance::EmdInstance;
use super::rules::{
    candidates_forget, candidates_introduce, dim_leaf, for_each_join_candidate, IntroduceType,
    JoinCaps,
};
use super::semantics::DpEnv;
use super::{add_sat, SolveError, INFINITY};

pub use super::rules::JoinCaps as SolverJoinCaps;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Cap on memo entries per rooted run; exceeding it is an error.
    pub memo_cap: usize,
    pub join_caps: JoinCaps,
    /// Worker threads for the per-root runs of `metric_dimension`.
    pub jobs: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            memo_cap: 10_000_000,
            join_caps: JoinCaps::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MemoStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Debug, Clone)]
enum Choice {
    Unsolvable,
    Leaf,
    Forget(EmdInstance),
    Introduce(IntroduceType, EmdInstance),
    Join(EmdInstance, EmdInstance),
}

struct Entry {
    dim: u32,
    choice: Choice,
}

/// One rooted DP run over a fixed tree.
pub struct DpRun<'a> {
    pub env: DpEnv<'a>,
    pub ctxs: &'a [NodeContext],
    pub cfg: &'a SolverConfig,
    memo: Vec<HashMap<EmdInstance, Entry>>,
    stats: MemoStats,
}

impl<'a> DpRun<'a> {
    pub fn new(
        g: &'a Graph,
        dist: &'a DistanceMatrix,
        tree: &'a NiceCliqueTree,
        ctxs: &'a [NodeContext],
        cfg: &'a SolverConfig,
    ) -> Self {
        DpRun {
            env: DpEnv { g, dist, tree },
            ctxs,
            cfg,
            memo: (0..tree.len()).map(|_| HashMap::new()).collect(),
            stats: MemoStats::default(),
        }
    }

    pub fn stats(&self) -> &MemoStats {
        &self.stats
    }

    /// Extended dimension of `inst` at `node`, memoized.
    pub fn dim_of(&mut self, node: usize, inst: &EmdInstance) -> Result<u32, SolveError> {
        if let Some(e) = self.memo[node].get(inst) {
            self.stats.hits += 1;
            return Ok(e.dim);
        }
        self.stats.misses += 1;
        let tree = self.env.tree;
        let (dim, choice) = match tree.node(node).kind {
            NodeKind::Leaf => (dim_leaf(inst, &tree.node(node).bag), Choice::Leaf),
            NodeKind::Forget(v) => {
                let child = tree.node(node).children[0];
                let idx = bag_index(&tree.node(child).bag, v);
                let mut best = (INFINITY, Choice::Unsolvable);
                for cand in candidates_forget(inst, idx, &self.ctxs[child]) {
                    let d = self.dim_of(child, &cand)?;
                    if d < best.0 {
                        best = (d, Choice::Forget(cand));
                    }
                }
                best
            }
            NodeKind::Introduce(v) => {
                let child = tree.node(node).children[0];
                let idx = bag_index(&tree.node(node).bag, v);
                let mut best = (INFINITY, Choice::Unsolvable);
                for (cand, ty) in candidates_introduce(inst, v, idx, &self.ctxs[child]) {
                    let d = self.dim_of(child, &cand)?;
                    let total = match ty {
                        IntroduceType::One => d,
                        IntroduceType::Two => add_sat(d, 1),
                    };
                    if total < best.0 {
                        best = (total, Choice::Introduce(ty, cand));
                    }
                }
                best
            }
            NodeKind::Join => {
                let c1 = tree.node(node).children[0];
                let c2 = tree.node(node).children[1];
                self.join_min(node, c1, c2, inst)?
            }
        };
        if self.stats.entries >= self.cfg.memo_cap {
            return Err(SolveError::MemoBudget {
                cap: self.cfg.memo_cap,
            });
        }
        self.stats.entries += 1;
        self.memo[node].insert(inst.clone(), Entry { dim, choice });
        Ok(dim)
    }

    fn join_min(
        &mut self,
        node: usize,
        c1: usize,
        c2: usize,
        inst: &EmdInstance,
    ) -> Result<(u32, Choice), SolveError> {
        let s = inst.s_i.len() as u32;
        let mut best: (u32, Choice) = (INFINITY, Choice::Unsolvable);
        // the borrow checker cannot split self inside the closure, so
        // move the mutable state through a local
        let ctx1 = &self.ctxs[c1];
        let ctx2 = &self.ctxs[c2];
        let caps = self.cfg.join_caps;
        let mut run_state: (
        	&mut Vec<HashMap<EmdInstance, Entry>>,
        	&mut MemoStats,
        ) = (&mut self.memo, &mut self.stats);
        let env = &self.env;
        let ctxs = self.ctxs;
        let cfg = self.cfg;
        for_each_join_candidate(node, inst, ctx1, ctx2, caps, &mut |parts| {
            let lb1 = child_lower_bound(parts.d_int1.len(), !parts.pairs1.is_empty(), s);
            let lb2 = child_lower_bound(parts.d_int2.len(), !parts.pairs2.is_empty(), s);
            if best.0 != INFINITY && lb1 + lb2 - s >= best.0 {
                return Ok(());
            }
            let (i1, i2) = parts.build(&inst.s_i);
            let d1 = dim_of_split(&mut run_state, env, ctxs, cfg, c1, &i1)?;
            if d1 == INFINITY {
                return Ok(());
            }
            if best.0 != INFINITY && d1 + lb2 - s >= best.0 {
                return Ok(());
            }
            let d2 = dim_of_split(&mut run_state, env, ctxs, cfg, c2, &i2)?;
            if d2 == INFINITY {
                return Ok(());
            }
            let total = d1 + d2 - s;
            if total < best.0 {
                best = (total, Choice::Join(i1, i2));
            }
            Ok(())
        })?;
        Ok(best)
    }

    /// Reconstructs a witness set for a previously evaluated instance.
    pub fn witness(&self, node: usize, inst: &EmdInstance) -> Option<Vec<VertexId>> {
        let mut acc = BTreeSet::new();
        self.collect_witness(node, inst, &mut acc)?;
        Some(acc.into_iter().collect())
    }

    fn collect_witness(
        &self,
        node: usize,
        inst: &EmdInstance,
        acc: &mut BTreeSet<VertexId>,
    ) -> Option<()> {
        let e = self.memo[node].get(inst)?;
        let tree = self.env.tree;
        match &e.choice {
            Choice::Unsolvable => None,
            Choice::Leaf => {
                acc.extend(inst.s_i.iter().copied());
                Some(())
            }
            Choice::Forget(c) => self.collect_witness(tree.node(node).children[0], c, acc),
            Choice::Introduce(ty, c) => {
                if let NodeKind::Introduce(v) = tree.node(node).kind {
                    if *ty == IntroduceType::Two {
                        acc.insert(v);
                    }
                }
                self.collect_witness(tree.node(node).children[0], c, acc)
            }
            Choice::Join(a, b) => {
                self.collect_witness(tree.node(node).children[0], a, acc)?;
                self.collect_witness(tree.node(node).children[1], b, acc)
            }
        }
    }
}

// dim_of with the run state split from the shared environment, so the
// join visitor can recurse while borrowing the contexts.
type RunState<'m> = (
    &'m mut Vec<HashMap<EmdInstance, Entry>>,
    &'m mut MemoStats,
);

fn dim_of_split(
    state: &mut RunState<'_>,
    env: &DpEnv<'_>,
    ctxs: &[NodeContext],
    cfg: &SolverConfig,
    node: usize,
    inst: &EmdInstance,
) -> Result<u32, SolveError> {
    let mut run = DpRun {
        env: DpEnv {
            g: env.g,
            dist: env.dist,
            tree: env.tree,
        },
        ctxs,
        cfg,
        memo: std::mem::take(state.0),
        stats: std::mem::take(state.1),
    };
    let result = run.dim_of(node, inst);
    *state.0 = run.memo;
    *state.1 = run.stats;
    result
}

fn child_lower_bound(d_int_len: usize, has_pairs: bool, s: u32) -> u32 {
    (d_int_len as u32).max(s).max(u32::from(has_pairs))
}

fn bag_index(bag: &[VertexId], v: VertexId) -> usize {
    bag.binary_search(&v).expect("vertex must be in the bag")
}

/// Report of one rooted run.
#[derive(Debug, Clone)]
pub struct RootReport {
    pub root: VertexId,
    pub dim: u32,
    pub witness: Vec<VertexId>,
    pub stats: MemoStats,
    pub tree_nodes: usize,
}

/// Minimum size of a resolving set containing `tree.root_vertex()`,
/// with a reconstructed witness.
pub fn imd(
    g: &Graph,
    dist: &DistanceMatrix,
    tree: &NiceCliqueTree,
    cfg: &SolverConfig,
) -> Result<RootReport, SolveError> {
    let ctxs = all_contexts(g, dist, tree);
    let mut run = DpRun::new(g, dist, tree, &ctxs, cfg);
    let root_inst = EmdInstance::root(tree.root_vertex());
    let dim = run.dim_of(tree.root(), &root_inst)?;
    assert_ne!(dim, INFINITY, "the full vertex set always solves the root instance");
    let witness = run
        .witness(tree.root(), &root_inst)
        .expect("finite dim has a recorded choice tree");
    debug_assert_eq!(witness.len() as u32, dim);
    Ok(RootReport {
        root: tree.root_vertex(),
        dim,
        witness,
        stats: run.stats().clone(),
        tree_nodes: tree.len(),
    })
}

/// Convenience: build the tree for `root` and run the rooted DP.
pub fn imd_for_root(
    g: &Graph,
    dist: &DistanceMatrix,
    root: VertexId,
    cfg: &SolverConfig,
) -> Result<RootReport, SolveError> {
    let tree = build_nice_clique_tree(g, root)?;
    imd(g, dist, &tree, cfg)
}

#[derive(Debug, Clone)]
pub struct DimensionResult {
    pub dim: u32,
    pub witness: Vec<VertexId>,
    pub best_root: VertexId,
    pub per_root: Vec<(VertexId, u32)>,
    pub memo_entries_total: usize,
    pub distances_ms: u128,
    pub dp_ms: u128,
}

/// Metric dimension of a connected chordal graph: minimum over all
/// rooted runs, witness validated against first principles.
pub fn metric_dimension(g: &Graph, cfg: &SolverConfig) -> Result<DimensionResult, SolveError> {
    if let crate::chordal::Chordality::NotChordal { violator } = crate::chordal::is_chordal(g) {
        return Err(SolveError::NotChordal(violator));
    }
    let n = g.n();
    if n == 1 {
        // the rooted formulation forces the root into the set; the
        // one-vertex graph is resolved by the empty set
        return Ok(DimensionResult {
            dim: 0,
            witness: Vec::new(),
            best_root: 0,
            per_root: Vec::new(),
            memo_entries_total: 0,
            distances_ms: 0,
            dp_ms: 0,
        });
    }
    let t0 = Instant::now();
    let dist = DistanceMatrix::new(g);
    let distances_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let jobs = cfg.jobs.max(1).min(n);
    let mut reports: Vec<RootReport> = Vec::with_capacity(n);
    if jobs <= 1 {
        for root in 0..n {
            reports.push(imd_for_root(g, &dist, root, cfg)?);
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let results = std::sync::Mutex::new(Vec::with_capacity(n));
        let err_slot = std::sync::Mutex::new(None::<SolveError>);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let root = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if root >= n || err_slot.lock().unwrap().is_some() {
                        break;
                    }
                    match imd_for_root(g, &dist, root, cfg) {
                        Ok(rep) => results.lock().unwrap().push(rep),
                        Err(e) => {
                            let mut slot = err_slot.lock().unwrap();
                            if slot.is_none() {
                                *slot = Some(e);
                            }
                            break;
                        }
                    }
                });
            }
        });
        if let Some(e) = err_slot.into_inner().unwrap() {
            return Err(e);
        }
        reports = results.into_inner().unwrap();
        reports.sort_by_key(|r| r.root);
    }
    let dp_ms = t1.elapsed().as_millis();

    let best = reports
        .iter()
        .min_by_key(|r| (r.dim, r.root))
        .expect("n >= 2 yields at least one report");
    let result = DimensionResult {
        dim: best.dim,
        witness: best.witness.clone(),
        best_root: best.root,
        per_root: reports.iter().map(|r| (r.root, r.dim)).collect(),
        memo_entries_total: reports.iter().map(|r| r.stats.entries).sum(),
        distances_ms,
        dp_ms,
    };
    debug_assert!(oracle::is_resolving_set(&result.witness, g, &dist));
    debug_assert_eq!(result.witness.len() as u32, result.dim);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn star(m: usize) -> Graph {
        let edges: Vec<_> = (1..=m).map(|i| (0, i)).collect();
        Graph::from_edges(m + 1, &edges).unwrap()
    }

    #[test]
    fn k2_rooted_run() {
        let g = path(2);
        let dist = DistanceMatrix::new(&g);
        let rep = imd_for_root(&g, &dist, 0, &SolverConfig::default()).unwrap();
        assert_eq!(rep.dim, 1);
        assert_eq!(rep.witness, vec![0]);
    }

    #[test]
    fn p3_rooted_matches_oracle() {
        let g = path(3);
        let dist = DistanceMatrix::new(&g);
        let cfg = SolverConfig::default();
        for root in 0..3 {
            let rep = imd_for_root(&g, &dist, root, &cfg).unwrap();
            let oracle = crate::oracle::min_resolving_set(&g, Some(root), 16).unwrap();
            assert_eq!(rep.dim as usize, oracle.size, "root {root}");
        }
    }

    #[test]
    fn known_small_dimensions() {
        let cfg = SolverConfig::default();
        assert_eq!(metric_dimension(&path(4), &cfg).unwrap().dim, 1);
        assert_eq!(metric_dimension(&complete(4), &cfg).unwrap().dim, 3);
        assert_eq!(metric_dimension(&star(3), &cfg).unwrap().dim, 2);
    }

    #[test]
    fn single_vertex_is_zero() {
        let g = Graph::parse("1 0").unwrap();
        let res = metric_dimension(&g, &SolverConfig::default()).unwrap();
        assert_eq!(res.dim, 0);
        assert!(res.witness.is_empty());
    }

    #[test]
    fn rejects_non_chordal() {
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(matches!(
            metric_dimension(&c4, &SolverConfig::default()),
            Err(SolveError::NotChordal(_))
        ));
    }

    #[test]
    fn tiny_memo_budget_reports_failure() {
        let g = path(6);
        let cfg = SolverConfig {
            memo_cap: 2,
            ..SolverConfig::default()
        };
        assert!(matches!(
            metric_dimension(&g, &cfg),
            Err(SolveError::MemoBudget { cap: 2 })
        ));
    }

    #[test]
    fn parallel_matches_serial() {
        let g = crate::gen::random_chordal(9, 3, 3).unwrap();
        let serial = metric_dimension(&g, &SolverConfig::default()).unwrap();
        let par_cfg = SolverConfig {
            jobs: 4,
            ..SolverConfig::default()
        };
        let par = metric_dimension(&g, &par_cfg).unwrap();
        assert_eq!(serial.dim, par.dim);
        assert_eq!(serial.witness, par.witness);
        assert_eq!(serial.per_root, par.per_root);
    }
}
