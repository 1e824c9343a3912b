//! Per-node recurrence rules: the leaf formula, compatibility checkers
//! for join/introduce/forget, and candidate generators that enumerate
//! exactly the child instances whose minimum realizes the recurrence.
//!
//! Generators construct child external-trace sets as the full
//! projected/lifted image of the parent's (the checkers only test the
//! stated inclusion), keep required traces and pair obligations
//! minimal, and intersect everything with the node's realizable sets.
//! Where the obligation on a child is a disjunction (some solution
//! vertex with a suitable trace must exist), the generator branches,
//! one candidate per disjunct; the minimum over candidates then agrees
//! with the true instance semantics.

use std::collections::BTreeSet;

use crate::graph::VertexId;

use super::context::NodeContext;
use super::instance::EmdInstance;
use super::vecs::{min_plus, vector_resolves, DistVec, TraceVec};
use super::{SolveError, INFINITY};

/// Leaf formula: 0 for the all-empty instance, 1 when exactly the bag
/// vertex is forced and only its trace is required, infinity otherwise.
pub fn dim_leaf(inst: &EmdInstance, bag: &[VertexId]) -> u32 {
    debug_assert_eq!(bag.len(), 1);
    if inst.s_i.is_empty() && inst.d_int.is_empty() && inst.d_pairs.is_empty() {
        0
    } else if inst.s_i == bag && inst.d_int.iter().all(|t| t.is_all_zeros()) {
        1
    } else {
        INFINITY
    }
}

/// Drops a coordinate from an external trace; an all-ones remainder is
/// renormalized to all-zeros (the represented external vertex is then
/// uniformly one step further from the smaller bag, which resolves the
/// same vector pairs).
pub fn project_ext_trace(t: &TraceVec, idx: usize) -> TraceVec {
    let d = t.drop_coord(idx);
    if d.is_all_ones() {
        TraceVec::zeros(d.len())
    } else {
        d
    }
}

// ---------------------------------------------------------------- join

/// J1-J5. J5 quantifies over vectors realized strictly inside each
/// child subtree: pairs with a bag-vertex realizer on either side are
/// internal to the other child and are covered by its S1 condition.
pub fn is_compatible_join(
    i: &EmdInstance,
    i1: &EmdInstance,
    i2: &EmdInstance,
    ctx1: &NodeContext,
    ctx2: &NodeContext,
) -> bool {
    // J1
    if i1.s_i != i.s_i || i2.s_i != i.s_i {
        return false;
    }
    // J2
    if !i1
        .d_ext
        .iter()
        .all(|t| i.d_ext.contains(t) || i2.d_int.contains(t))
    {
        return false;
    }
    if !i2
        .d_ext
        .iter()
        .all(|t| i.d_ext.contains(t) || i1.d_int.contains(t))
    {
        return false;
    }
    // J3
    if !i
        .d_int
        .iter()
        .all(|t| i1.d_int.contains(t) || i2.d_int.contains(t))
    {
        return false;
    }
    // J4
    for (r, t) in &i.d_pairs {
        let side1 = !ctx1.inside2.contains(r)
            || i1.d_pairs.contains(&(r.clone(), t.clone()))
            || i2.d_int.iter().any(|u| vector_resolves(r, t, u));
        if !side1 {
            return false;
        }
        let side2 = !ctx2.inside2.contains(r)
            || i2.d_pairs.contains(&(r.clone(), t.clone()))
            || i1.d_int.iter().any(|u| vector_resolves(r, t, u));
        if !side2 {
            return false;
        }
    }
    // J5
    for r1 in &ctx1.inside2_strict {
        for r2 in &ctx2.inside2_strict {
            let ok = i1.d_pairs.contains(&(r1.clone(), r2.clone()))
                || i2.d_pairs.contains(&(r2.clone(), r1.clone()))
                || i.d_ext.iter().any(|t| vector_resolves(r1, r2, t));
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Caps on the join enumeration; exceeding them is a reported failure.
#[derive(Debug, Clone, Copy)]
pub struct JoinCaps {
    pub pool: usize,
    pub uncovered: usize,
}

impl Default for JoinCaps {
    fn default() -> Self {
        JoinCaps { pool: 14, uncovered: 20 }
    }
}

/// One join candidate before materialization: trace assignments plus
/// forced and assigned pair obligations.
pub struct JoinParts<'a> {
    pub d_int1: &'a BTreeSet<TraceVec>,
    pub d_int2: &'a BTreeSet<TraceVec>,
    pub d_ext1: &'a BTreeSet<TraceVec>,
    pub d_ext2: &'a BTreeSet<TraceVec>,
    pub pairs1: &'a BTreeSet<(DistVec, DistVec)>,
    pub pairs2: &'a BTreeSet<(DistVec, DistVec)>,
}

impl JoinParts<'_> {
    pub fn build(&self, s_i: &[VertexId]) -> (EmdInstance, EmdInstance) {
        (
            EmdInstance::new(
                s_i.to_vec(),
                self.d_int1.clone(),
                self.d_ext1.clone(),
                self.pairs1.clone(),
            ),
            EmdInstance::new(
                s_i.to_vec(),
                self.d_int2.clone(),
                self.d_ext2.clone(),
                self.pairs2.clone(),
            ),
        )
    }
}

/// Enumerates the genuine join choice points: which realizable traces
/// each child is forced to provide (subsets of a usefulness-pruned
/// pool, jointly covering the parent's required traces) and which
/// side takes each pair obligation not already discharged. External
/// traces of each child are the parent's plus the other child's forced
/// traces. The visitor may prune by returning without recursing.
pub fn for_each_join_candidate(
    node: usize,
    inst: &EmdInstance,
    ctx1: &NodeContext,
    ctx2: &NodeContext,
    caps: JoinCaps,
    visit: &mut dyn FnMut(&JoinParts<'_>) -> Result<(), SolveError>,
) -> Result<(), SolveError> {
    let rt1 = &ctx1.inside_traces;
    let rt2 = &ctx2.inside_traces;
    // a required trace realizable in neither child makes everything infeasible
    if inst
        .d_int
        .iter()
        .any(|t| !rt1.contains(t) && !rt2.contains(t))
    {
        return Ok(());
    }
    let pool1 = trace_pool(inst, rt1, ctx2);
    let pool2 = trace_pool(inst, rt2, ctx1);
    if pool1.len() > caps.pool || pool2.len() > caps.pool {
        return Err(SolveError::JoinBlowup {
            node,
            pool1: pool1.len(),
            pool2: pool2.len(),
            uncovered: 0,
        });
    }
    let masks1 = masks_by_popcount(pool1.len());
    let masks2 = masks_by_popcount(pool2.len());
    for &m1 in &masks1 {
        let a1: BTreeSet<TraceVec> = subset(&pool1, m1);
        for &m2 in &masks2 {
            let a2: BTreeSet<TraceVec> = subset(&pool2, m2);
            // J3 cover
            if !inst
                .d_int
                .iter()
                .all(|t| a1.contains(t) || a2.contains(t))
            {
                continue;
            }
            let mut d_ext1 = inst.d_ext.clone();
            d_ext1.extend(a2.iter().copied());
            let mut d_ext2 = inst.d_ext.clone();
            d_ext2.extend(a1.iter().copied());
            // J4 forced pairs
            let mut p1: BTreeSet<(DistVec, DistVec)> = BTreeSet::new();
            let mut p2: BTreeSet<(DistVec, DistVec)> = BTreeSet::new();
            for (r, t) in &inst.d_pairs {
                if ctx1.inside2.contains(r) && !a2.iter().any(|u| vector_resolves(r, t, u)) {
                    p1.insert((r.clone(), t.clone()));
                }
                if ctx2.inside2.contains(r) && !a1.iter().any(|u| vector_resolves(r, t, u)) {
                    p2.insert((r.clone(), t.clone()));
                }
            }
            // J5 obligations not already covered
            let mut uncovered: Vec<(&DistVec, &DistVec)> = Vec::new();
            for r1 in &ctx1.inside2_strict {
                for r2 in &ctx2.inside2_strict {
                    if inst.d_ext.iter().any(|t| vector_resolves(r1, r2, t)) {
                        continue;
                    }
                    if p1.contains(&(r1.clone(), r2.clone()))
                        || p2.contains(&(r2.clone(), r1.clone()))
                    {
                        continue;
                    }
                    uncovered.push((r1, r2));
                }
            }
            if uncovered.len() > caps.uncovered {
                return Err(SolveError::JoinBlowup {
                    node,
                    pool1: pool1.len(),
                    pool2: pool2.len(),
                    uncovered: uncovered.len(),
                });
            }
            assign_uncovered(&uncovered, 0, &mut p1, &mut p2, &mut |p1, p2| {
                visit(&JoinParts {
                    d_int1: &a1,
                    d_int2: &a2,
                    d_ext1: &d_ext1,
                    d_ext2: &d_ext2,
                    pairs1: p1,
                    pairs2: p2,
                })
            })?;
        }
    }
    Ok(())
}

fn assign_uncovered(
    uncovered: &[(&DistVec, &DistVec)],
    at: usize,
    p1: &mut BTreeSet<(DistVec, DistVec)>,
    p2: &mut BTreeSet<(DistVec, DistVec)>,
    visit: &mut dyn FnMut(
        &BTreeSet<(DistVec, DistVec)>,
        &BTreeSet<(DistVec, DistVec)>,
    ) -> Result<(), SolveError>,
) -> Result<(), SolveError> {
    if at == uncovered.len() {
        return visit(p1, p2);
    }
    let (r1, r2) = uncovered[at];
    let key1 = (r1.clone(), r2.clone());
    let fresh1 = p1.insert(key1.clone());
    assign_uncovered(uncovered, at + 1, p1, p2, visit)?;
    if fresh1 {
        p1.remove(&key1);
    }
    let key2 = (r2.clone(), r1.clone());
    let fresh2 = p2.insert(key2.clone());
    assign_uncovered(uncovered, at + 1, p1, p2, visit)?;
    if fresh2 {
        p2.remove(&key2);
    }
    Ok(())
}

/// Traces worth forcing into one child: its realizable traces that are
/// either required by the parent or useful to the sibling (resolve
/// some distinct vector pair of the sibling's subtree, or some parent
/// pair obligation).
fn trace_pool(
    inst: &EmdInstance,
    own_realizable: &BTreeSet<TraceVec>,
    sibling: &NodeContext,
) -> Vec<TraceVec> {
    let sib_vecs: Vec<&DistVec> = sibling.inside_vecs_all.iter().collect();
    own_realizable
        .iter()
        .filter(|t| {
            if inst.d_int.contains(t) {
                return true;
            }
            if inst
                .d_pairs
                .iter()
                .any(|(r, u)| vector_resolves(r, u, t))
            {
                return true;
            }
            for (ai, a) in sib_vecs.iter().enumerate() {
                for b in &sib_vecs[ai + 1..] {
                    if vector_resolves(a, b, t) {
                        return true;
                    }
                }
            }
            false
        })
        .copied()
        .collect()
}

fn masks_by_popcount(len: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..(1u32 << len)).collect();
    masks.sort_by_key(|m| m.count_ones());
    masks
}

fn subset(pool: &[TraceVec], mask: u32) -> BTreeSet<TraceVec> {
    pool.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, t)| *t)
        .collect()
}

/// Materialized join candidates (test-sized inputs only).
pub fn candidates_join(
    node: usize,
    inst: &EmdInstance,
    ctx1: &NodeContext,
    ctx2: &NodeContext,
) -> Result<Vec<(EmdInstance, EmdInstance)>, SolveError> {
    let mut out = Vec::new();
    for_each_join_candidate(node, inst, ctx1, ctx2, JoinCaps::default(), &mut |parts| {
        out.push(parts.build(&inst.s_i));
        Ok(())
    })?;
    Ok(out)
}

// ----------------------------------------------------------- introduce

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntroduceType {
    One,
    Two,
}

/// The introduced vertex is adjacent to the whole child bag, so its
/// distance vector over the parent bag is all-ones with a zero at its
/// own coordinate.
fn introduced_vertex_vec(child_len: usize, idx: usize) -> DistVec {
    DistVec::constant(child_len, 1).insert_coord(idx, 0)
}

/// Lifts an inside vector of the child bag to the parent bag: the
/// introduced vertex sits one step beyond the child bag.
fn lift_inside_vec(r: &DistVec, idx: usize) -> DistVec {
    r.insert_coord(idx, r.min_entry() + 1)
}

/// Pair obligations against the introduced vertex that the parent's
/// external traces cannot discharge; the child must resolve them.
fn forced_i5_pairs(
    inst: &EmdInstance,
    idx: usize,
    child: &NodeContext,
) -> BTreeSet<(DistVec, DistVec)> {
    let k_child = child.bag.len();
    let vvec = introduced_vertex_vec(k_child, idx);
    let ones = DistVec::constant(k_child, 1);
    let mut out = BTreeSet::new();
    for rho in &child.inside2 {
        let lifted = lift_inside_vec(rho, idx);
        if !inst
            .d_ext
            .iter()
            .any(|t| vector_resolves(&lifted, &vvec, t))
        {
            out.insert((rho.clone(), ones.clone()));
        }
    }
    out
}

/// I1-I5, with the corrections the recurrences need: the pair whose
/// inside component is realized only by the introduced vertex becomes
/// a trace disjunction on the child; projected pairs are required only
/// when child witnesses exist; pairs whose outside realizer stays
/// close only through the introduced vertex force the child solution
/// to be nonempty.
pub fn is_compatible_introduce(
    i: &EmdInstance,
    i1: &EmdInstance,
    ty: IntroduceType,
    v: VertexId,
    idx: usize,
    child: &NodeContext,
) -> bool {
    let k = child.bag.len() + 1;
    let v_in_s = i.s_i.binary_search(&v).is_ok();
    // I1
    match ty {
        IntroduceType::One => {
            if v_in_s || i1.s_i != i.s_i {
                return false;
            }
        }
        IntroduceType::Two => {
            let without: Vec<VertexId> = i.s_i.iter().copied().filter(|&u| u != v).collect();
            if !v_in_s || i1.s_i != without {
                return false;
            }
        }
    }
    // I2
    for r in &i.d_ext {
        if !i1.d_ext.contains(&project_ext_trace(r, idx)) {
            return false;
        }
    }
    // I3
    for r in &i.d_int {
        if ty == IntroduceType::Two && *r == TraceVec::ones_except(k, idx) {
            continue;
        }
        if r.get(idx) != 1 || !i1.d_int.contains(&r.drop_coord(idx)) {
            return false;
        }
    }
    // I4 plus the introduced-vertex obligations
    let child_nonempty_solution = !i1.d_int.is_empty() || !i1.s_i.is_empty();
    for (r, t) in &i.d_pairs {
        let t1 = t.drop_coord(idx);
        if r.0[idx] == 0 {
            // inside realizer is the introduced vertex itself
            match ty {
                IntroduceType::Two => {} // v joins the solution and resolves these
                IntroduceType::One => {
                    if !i1.d_int.iter().any(|tau| min_plus(&t1, tau) != 1) {
                        return false;
                    }
                }
            }
            continue;
        }
        let r1 = r.drop_coord(idx);
        if t1.min_entry() <= 2 {
            if child.inside2.contains(&r1)
                && child.outside2.contains(&t1)
                && !i1.d_pairs.contains(&(r1.clone(), t1.clone()))
            {
                return false;
            }
        } else {
            // outside realizer is near only through v; every child
            // solution vertex resolves these except in the tight
            // one-step cases, which need the solution nonempty
            let needs_vertex = match ty {
                IntroduceType::One => true,
                IntroduceType::Two => r1.min_entry() == 1,
            };
            if needs_vertex && !child_nonempty_solution {
                return false;
            }
        }
    }
    // I5
    if ty == IntroduceType::One {
        for pair in forced_i5_pairs(i, idx, child) {
            if !i1.d_pairs.contains(&pair) {
                return false;
            }
        }
    }
    true
}

/// Candidate child instances for an introduce node, tagged with type.
pub fn candidates_introduce(
    inst: &EmdInstance,
    v: VertexId,
    idx: usize,
    child: &NodeContext,
) -> Vec<(EmdInstance, IntroduceType)> {
    let mut out = Vec::new();
    for inst1 in introduce_type1(inst, v, idx, child) {
        out.push((inst1, IntroduceType::One));
    }
    for inst2 in introduce_type2(inst, v, idx, child) {
        out.push((inst2, IntroduceType::Two));
    }
    out
}

fn introduce_type1(
    inst: &EmdInstance,
    v: VertexId,
    idx: usize,
    child: &NodeContext,
) -> Vec<EmdInstance> {
    if inst.s_i.binary_search(&v).is_ok() {
        return Vec::new();
    }
    let mut base = BTreeSet::new();
    for r in &inst.d_int {
        if r.get(idx) != 1 {
            return Vec::new(); // only v realizes such a trace, and v is not chosen
        }
        let d = r.drop_coord(idx);
        if !child.inside_traces.contains(&d) {
            return Vec::new();
        }
        base.insert(d);
    }
    let d_ext: BTreeSet<TraceVec> = inst
        .d_ext
        .iter()
        .map(|t| project_ext_trace(t, idx))
        .collect();
    let mut pairs = forced_i5_pairs(inst, idx, child);
    let mut obligations: Vec<BTreeSet<TraceVec>> = Vec::new();
    let mut need_nonempty = false;
    for (r, t) in &inst.d_pairs {
        let t1 = t.drop_coord(idx);
        if r.0[idx] == 0 {
            let good: BTreeSet<TraceVec> = child
                .inside_traces
                .iter()
                .filter(|tau| min_plus(&t1, tau) != 1)
                .copied()
                .collect();
            if base.iter().any(|b| good.contains(b)) {
                continue;
            }
            if good.is_empty() {
                return Vec::new();
            }
            obligations.push(good);
            continue;
        }
        let r1 = r.drop_coord(idx);
        if t1.min_entry() <= 2 {
            if child.inside2.contains(&r1) && child.outside2.contains(&t1) {
                pairs.insert((r1, t1));
            }
        } else {
            need_nonempty = true;
        }
    }
    if need_nonempty && base.is_empty() && obligations.is_empty() && inst.s_i.is_empty() {
        obligations.push(child.inside_traces.iter().copied().collect());
    }
    expand_trace_obligations(base, &obligations)
        .into_iter()
        .map(|d_int| EmdInstance::new(inst.s_i.clone(), d_int, d_ext.clone(), pairs.clone()))
        .collect()
}

fn introduce_type2(
    inst: &EmdInstance,
    v: VertexId,
    idx: usize,
    child: &NodeContext,
) -> Vec<EmdInstance> {
    if inst.s_i.binary_search(&v).is_err() {
        return Vec::new();
    }
    let k = child.bag.len() + 1;
    let s_child: Vec<VertexId> = inst.s_i.iter().copied().filter(|&u| u != v).collect();
    let v_trace = TraceVec::ones_except(k, idx);
    let mut base = BTreeSet::new();
    for r in &inst.d_int {
        if *r == v_trace {
            continue; // realized by v itself
        }
        if r.get(idx) != 1 {
            return Vec::new();
        }
        let d = r.drop_coord(idx);
        if !child.inside_traces.contains(&d) {
            return Vec::new();
        }
        base.insert(d);
    }
    let mut d_ext: BTreeSet<TraceVec> = inst
        .d_ext
        .iter()
        .map(|t| project_ext_trace(t, idx))
        .collect();
    d_ext.insert(TraceVec::zeros(k - 1)); // v seen from the child bag
    let mut pairs = BTreeSet::new();
    let mut obligations: Vec<BTreeSet<TraceVec>> = Vec::new();
    let mut need_nonempty = false;
    for (r, t) in &inst.d_pairs {
        if r.0[idx] == 0 {
            continue; // v resolves every pair against itself
        }
        let r1 = r.drop_coord(idx);
        let t1 = t.drop_coord(idx);
        if t1.min_entry() <= 2 {
            if child.inside2.contains(&r1) && child.outside2.contains(&t1) {
                pairs.insert((r1, t1));
            }
        } else if r1.min_entry() == 1 {
            // v is exactly as far from these realizers as the outside
            // vertex; some other solution vertex must exist
            need_nonempty = true;
        }
    }
    if need_nonempty && base.is_empty() && obligations.is_empty() && s_child.is_empty() {
        obligations.push(child.inside_traces.iter().copied().collect());
    }
    expand_trace_obligations(base, &obligations)
        .into_iter()
        .map(|d_int| EmdInstance::new(s_child.clone(), d_int, d_ext.clone(), pairs.clone()))
        .collect()
}

/// All minimal ways to extend `base` hitting each obligation set.
fn expand_trace_obligations(
    base: BTreeSet<TraceVec>,
    obligations: &[BTreeSet<TraceVec>],
) -> Vec<BTreeSet<TraceVec>> {
    let mut variants = vec![base];
    for ob in obligations {
        let mut next: BTreeSet<BTreeSet<TraceVec>> = BTreeSet::new();
        for var in &variants {
            if var.iter().any(|t| ob.contains(t)) {
                next.insert(var.clone());
                continue;
            }
            for tau in ob {
                let mut with = var.clone();
                with.insert(*tau);
                next.insert(with);
            }
        }
        variants = next.into_iter().collect();
    }
    variants
}

// -------------------------------------------------------------- forget

/// F1-F4, with one extension: a solution vertex strictly closer to the
/// forgotten vertex than to the rest of the bag has the all-zeros
/// parent trace but child trace ones-except-v, so F3 admits that lift
/// for the all-zeros trace.
pub fn is_compatible_forget(
    i: &EmdInstance,
    i1: &EmdInstance,
    idx: usize,
    child: &NodeContext,
) -> bool {
    let k_child = child.bag.len();
    let v = child.bag[idx];
    // F1
    let without: Vec<VertexId> = i1.s_i.iter().copied().filter(|&u| u != v).collect();
    if without != i.s_i {
        return false;
    }
    // F2
    for r in &i.d_ext {
        if !i1.d_ext.contains(&r.insert_coord(idx, 1)) {
            return false;
        }
    }
    // F3
    for r in &i.d_int {
        let lift0 = r.insert_coord(idx, 0);
        let lift1 = r.insert_coord(idx, 1);
        let shifted = r.is_all_zeros() && i1.d_int.contains(&TraceVec::ones_except(k_child, idx));
        if !i1.d_int.contains(&lift0) && !i1.d_int.contains(&lift1) && !shifted {
            return false;
        }
    }
    // F4
    for (r, t) in &i.d_pairs {
        let lifted_t = t.insert_coord(idx, t.min_entry() + 1);
        for m in forget_modes(r) {
            let lifted_r = r.insert_coord(idx, m);
            if child.inside2.contains(&lifted_r)
                && child.outside2.contains(&lifted_t)
                && !i1.d_pairs.contains(&(lifted_r.clone(), lifted_t.clone()))
            {
                return false;
            }
        }
    }
    true
}

/// Possible coordinate values of the forgotten vertex for an inside
/// vector: min/max for non-constant vectors, value-1/value/value+1 for
/// constant ones.
fn forget_modes(r: &DistVec) -> Vec<u32> {
    if r.is_constant() {
        let c = r.0[0];
        if c == 0 {
            vec![c, c + 1]
        } else {
            vec![c - 1, c, c + 1]
        }
    } else {
        vec![r.min_entry(), r.min_entry() + 1]
    }
}

/// Candidate child instances for a forget node.
pub fn candidates_forget(
    inst: &EmdInstance,
    idx: usize,
    child: &NodeContext,
) -> Vec<EmdInstance> {
    let k_child = child.bag.len();
    let v = child.bag[idx];
    let d_ext: BTreeSet<TraceVec> = inst
        .d_ext
        .iter()
        .map(|t| t.insert_coord(idx, 1))
        .collect();
    // per-trace lift options, realizability-filtered
    let mut options: Vec<Vec<TraceVec>> = Vec::new();
    for r in &inst.d_int {
        let mut opts = Vec::new();
        for bit in [0, 1] {
            let lifted = r.insert_coord(idx, bit);
            if child.inside_traces.contains(&lifted) {
                opts.push(lifted);
            }
        }
        if r.is_all_zeros() {
            let shifted = TraceVec::ones_except(k_child, idx);
            if child.inside_traces.contains(&shifted) {
                opts.push(shifted);
            }
        }
        if opts.is_empty() {
            return Vec::new();
        }
        options.push(opts);
    }
    // forced pair lifts
    let mut pairs = BTreeSet::new();
    for (r, t) in &inst.d_pairs {
        let lifted_t = t.insert_coord(idx, t.min_entry() + 1);
        if !child.outside2.contains(&lifted_t) {
            continue;
        }
        for m in forget_modes(r) {
            let lifted_r = r.insert_coord(idx, m);
            if child.inside2.contains(&lifted_r) {
                pairs.insert((lifted_r, lifted_t.clone()));
            }
        }
    }
    let mut with_v = inst.s_i.clone();
    with_v.push(v);
    with_v.sort_unstable();
    let mut out = BTreeSet::new();
    for s_child in [inst.s_i.clone(), with_v] {
        let mut d_int_variants: Vec<BTreeSet<TraceVec>> = vec![BTreeSet::new()];
        for opts in &options {
            let mut next = Vec::new();
            for var in &d_int_variants {
                for o in opts {
                    let mut with = var.clone();
                    with.insert(*o);
                    next.push(with);
                }
            }
            d_int_variants = next;
        }
        for d_int in d_int_variants {
            out.insert(EmdInstance::new(
                s_child.clone(),
                d_int,
                d_ext.clone(),
                pairs.clone(),
            ));
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(len: usize, bits: u16) -> TraceVec {
        TraceVec::new(len, bits)
    }

    #[test]
    fn leaf_formula() {
        let bag = vec![7];
        let empty = EmdInstance::new(
            vec![],
            BTreeSet::new(),
            [TraceVec::zeros(1)].into_iter().collect(),
            BTreeSet::new(),
        );
        assert_eq!(dim_leaf(&empty, &bag), 0);

        let forced = EmdInstance::new(
            vec![7],
            [TraceVec::zeros(1)].into_iter().collect(),
            BTreeSet::new(),
            BTreeSet::new(),
        );
        assert_eq!(dim_leaf(&forced, &bag), 1);

        let mut pairs = BTreeSet::new();
        pairs.insert((DistVec(vec![0]), DistVec(vec![1])));
        let stuck = EmdInstance::new(
            vec![],
            [TraceVec::zeros(1)].into_iter().collect(),
            [TraceVec::zeros(1)].into_iter().collect(),
            pairs,
        );
        assert_eq!(dim_leaf(&stuck, &bag), INFINITY);
    }

    fn mock_ctx(
        bag: Vec<VertexId>,
        inside2: Vec<DistVec>,
        strict: Vec<DistVec>,
        outside2: Vec<DistVec>,
        traces: Vec<TraceVec>,
    ) -> NodeContext {
        NodeContext {
            node: 0,
            bag,
            inside2: inside2.iter().cloned().collect(),
            inside2_strict: strict.into_iter().collect(),
            outside2: outside2.into_iter().collect(),
            inside_traces: traces.into_iter().collect(),
            outside_traces: BTreeSet::new(),
            inside_vecs_all: inside2.into_iter().collect(),
        }
    }

    #[test]
    fn join_j5_identical_vectors_need_a_pair() {
        // bag size 1, both children realize only (1) strictly inside;
        // no trace resolves an identical pair, so compatibility demands
        // the pair on one side.
        let ctx = mock_ctx(
            vec![0],
            vec![DistVec(vec![1])],
            vec![DistVec(vec![1])],
            vec![DistVec(vec![1])],
            vec![TraceVec::zeros(1)],
        );
        let i = EmdInstance::new(vec![0], BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        let bare = i.clone();
        assert!(!is_compatible_join(&i, &bare, &bare, &ctx, &ctx));
        let mut pairs = BTreeSet::new();
        pairs.insert((DistVec(vec![1]), DistVec(vec![1])));
        let with_pair = EmdInstance::new(vec![0], BTreeSet::new(), BTreeSet::new(), pairs);
        assert!(is_compatible_join(&i, &with_pair, &bare, &ctx, &ctx));
        assert!(is_compatible_join(&i, &bare, &with_pair, &ctx, &ctx));
    }

    #[test]
    fn join_j1_and_j3() {
        let ctx = mock_ctx(vec![0], vec![], vec![], vec![], vec![TraceVec::zeros(1)]);
        let mut d_int = BTreeSet::new();
        d_int.insert(TraceVec::zeros(1));
        let i = EmdInstance::new(vec![0], d_int, BTreeSet::new(), BTreeSet::new());
        let wrong_s = EmdInstance::new(vec![], BTreeSet::new(),
            [TraceVec::zeros(1)].into_iter().collect(), BTreeSet::new());
        let same_s_no_trace =
            EmdInstance::new(vec![0], BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        // J1 violation
        assert!(!is_compatible_join(&i, &wrong_s, &same_s_no_trace, &ctx, &ctx));
        // J3 violation: required trace in neither child
        assert!(!is_compatible_join(
            &i,
            &same_s_no_trace,
            &same_s_no_trace,
            &ctx,
            &ctx
        ));
        let with_trace = EmdInstance::new(
            vec![0],
            [TraceVec::zeros(1)].into_iter().collect(),
            BTreeSet::new(),
            BTreeSet::new(),
        );
        assert!(is_compatible_join(&i, &with_trace, &same_s_no_trace, &ctx, &ctx));
    }

    #[test]
    fn join_candidates_pass_checker_and_cover_assignments() {
        let ctx = mock_ctx(
            vec![0],
            vec![DistVec(vec![0]), DistVec(vec![1])],
            vec![DistVec(vec![1])],
            vec![DistVec(vec![1])],
            vec![TraceVec::zeros(1)],
        );
        let mut d_int = BTreeSet::new();
        d_int.insert(TraceVec::zeros(1));
        let i = EmdInstance::new(vec![0], d_int, BTreeSet::new(), BTreeSet::new());
        let cands = candidates_join(0, &i, &ctx, &ctx).unwrap();
        assert!(!cands.is_empty());
        let mut saw_left = false;
        let mut saw_right = false;
        let mut saw_both = false;
        for (i1, i2) in &cands {
            assert!(is_compatible_join(&i, i1, i2, &ctx, &ctx));
            let zero = TraceVec::zeros(1);
            match (i1.d_int.contains(&zero), i2.d_int.contains(&zero)) {
                (true, false) => saw_left = true,
                (false, true) => saw_right = true,
                (true, true) => saw_both = true,
                (false, false) => panic!("cover violated"),
            }
        }
        assert!(saw_left && saw_right && saw_both);
    }

    #[test]
    fn introduce_i3_rejects_zero_coordinate_type1() {
        // bag {0,1}, introduce v at idx 1; a required trace with a zero
        // there can only be realized by v.
        let child = mock_ctx(
            vec![0],
            vec![DistVec(vec![0])],
            vec![],
            vec![DistVec(vec![1])],
            vec![TraceVec::zeros(1)],
        );
        let mut d_int = BTreeSet::new();
        d_int.insert(tr(2, 0b01)); // (1,0): zero at idx 1
        let i = EmdInstance::new(vec![0], d_int, BTreeSet::new(), BTreeSet::new());
        let i1 = EmdInstance::new(vec![0], BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        assert!(!is_compatible_introduce(&i, &i1, IntroduceType::One, 1, 1, &child));
        assert!(introduce_type1(&i, 1, 1, &child).is_empty());
    }

    #[test]
    fn introduce_type2_allows_v_trace() {
        let child = mock_ctx(
            vec![0],
            vec![DistVec(vec![0])],
            vec![],
            vec![DistVec(vec![1])],
            vec![TraceVec::zeros(1)],
        );
        let mut d_int = BTreeSet::new();
        d_int.insert(TraceVec::ones_except(2, 1)); // trace of v
        let i = EmdInstance::new(vec![0, 1], d_int, BTreeSet::new(), BTreeSet::new());
        let cands = candidates_introduce(&i, 1, 1, &child);
        assert!(cands
            .iter()
            .any(|(c, ty)| *ty == IntroduceType::Two && c.d_int.is_empty()
                && is_compatible_introduce(&i, c, *ty, 1, 1, &child)));
    }

    #[test]
    fn introduce_generators_pass_checker() {
        let child = mock_ctx(
            vec![0, 2],
            vec![DistVec(vec![0, 1]), DistVec(vec![1, 0]), DistVec(vec![1, 2])],
            vec![DistVec(vec![1, 2])],
            vec![DistVec(vec![1, 1])],
            vec![tr(2, 0b10), tr(2, 0b01)],
        );
        for s_i in [vec![], vec![0], vec![3], vec![0, 3]] {
            let i = EmdInstance::new(
                s_i,
                BTreeSet::new(),
                [tr(3, 0b010)].into_iter().collect(),
                BTreeSet::new(),
            );
            for (cand, ty) in candidates_introduce(&i, 3, 2, &child) {
                assert!(
                    is_compatible_introduce(&i, &cand, ty, 3, 2, &child),
                    "candidate {cand:?} of type {ty:?} fails the checker"
                );
            }
        }
    }

    #[test]
    fn forget_f2_and_candidates() {
        let child = mock_ctx(
            vec![0, 1],
            vec![DistVec(vec![0, 1]), DistVec(vec![1, 0])],
            vec![],
            vec![DistVec(vec![1, 1]), DistVec(vec![2, 1])],
            vec![tr(2, 0b10), tr(2, 0b01)],
        );
        // parent bag {0}: forget v=1 at idx 1 in the child bag
        let i = EmdInstance::new(
            vec![],
            BTreeSet::new(),
            [TraceVec::zeros(1)].into_iter().collect(),
            BTreeSet::new(),
        );
        let bad = EmdInstance::new(vec![], BTreeSet::new(), BTreeSet::new(), BTreeSet::new());
        assert!(!is_compatible_forget(&i, &bad, 1, &child));
        let cands = candidates_forget(&i, 1, &child);
        assert!(!cands.is_empty());
        for c in &cands {
            assert!(is_compatible_forget(&i, c, 1, &child), "{c:?}");
            assert!(c.d_ext.contains(&tr(2, 0b10))); // (0)|1 at idx 1
        }
        // both S choices appear
        assert!(cands.iter().any(|c| c.s_i.is_empty()));
        assert!(cands.iter().any(|c| c.s_i == vec![1]));
    }

    #[test]
    fn forget_f3_branches() {
        let child = mock_ctx(
            vec![0, 1],
            vec![DistVec(vec![0, 1]), DistVec(vec![1, 0])],
            vec![],
            vec![DistVec(vec![1, 1])],
            vec![tr(2, 0b10), tr(2, 0b01)],
        );
        let mut d_int = BTreeSet::new();
        d_int.insert(TraceVec::zeros(1));
        let i = EmdInstance::new(vec![0], d_int, BTreeSet::new(), BTreeSet::new());
        let cands = candidates_forget(&i, 1, &child);
        // lifts (0,0) unrealizable here; (0,1) realizable; ones-except = (1,0) realizable
        for c in &cands {
            assert!(
                c.d_int.contains(&tr(2, 0b10)) || c.d_int.contains(&tr(2, 0b01)),
                "{c:?}"
            );
        }
        assert!(cands.iter().any(|c| c.d_int.contains(&tr(2, 0b10))));
        assert!(cands.iter().any(|c| c.d_int.contains(&tr(2, 0b01))));
    }

    #[test]
    fn extend_obligations_minimal_hitting() {
        let base: BTreeSet<TraceVec> = BTreeSet::new();
        let ob1: BTreeSet<TraceVec> = [tr(2, 0b01), tr(2, 0b10)].into_iter().collect();
        let variants = expand_trace_obligations(base, &[ob1]);
        assert_eq!(variants.len(), 2);
        for v in &variants {
            assert_eq!(v.len(), 1);
        }
    }
}
