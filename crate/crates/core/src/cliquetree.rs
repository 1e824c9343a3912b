//! Rooted nice clique trees of chordal graphs.
//!
//! The tree has at most 7n nodes, its root bag is exactly the requested
//! root vertex, every bag induces a clique, and every node is one of
//! leaf / introduce / forget / join. Construction goes through the
//! maximal-clique tree (max-weight spanning tree of the clique
//! intersection graph, which has the running-intersection property),
//! rooted at a clique containing the root vertex, then expanded into
//! unit-step chains with singleton leaves and a forget chain on top
//! that strips the root clique down to the root vertex.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::chordal::{is_chordal, maximal_cliques, Chordality};
use crate::graph::{Graph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    Introduce(VertexId),
    Forget(VertexId),
    Join,
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Bag in canonical order: ascending vertex id.
    pub bag: Vec<VertexId>,
    pub children: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("graph is not chordal (violating vertex {0})")]
    NotChordal(VertexId),
    #[error("root vertex {0} out of range")]
    BadRoot(VertexId),
    #[error("node id {0} out of range")]
    BadNode(usize),
}

#[derive(Debug, Clone)]
pub struct NiceCliqueTree {
    root_vertex: VertexId,
    root: usize,
    nodes: Vec<TreeNode>,
    /// Cached sorted vertex set of each node's subtree.
    subtree: Vec<Vec<VertexId>>,
    parent: Vec<Option<usize>>,
}

impl NiceCliqueTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_vertex(&self) -> VertexId {
        self.root_vertex
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    /// Vertices appearing in the bags of `i`'s subtree, sorted.
    pub fn subtree_vertices(&self, i: usize) -> Result<&[VertexId], TreeError> {
        self.subtree.get(i).map(|v| v.as_slice()).ok_or(TreeError::BadNode(i))
    }

    /// Node ids in post order (children before parents).
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![(self.root, false)];
        while let Some((i, expanded)) = stack.pop() {
            if expanded {
                order.push(i);
            } else {
                stack.push((i, true));
                for &c in &self.nodes[i].children {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// Structured text export: one record per node.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "root {}", self.root);
        let _ = writeln!(out, "root_vertex {}", self.root_vertex);
        for (i, node) in self.nodes.iter().enumerate() {
            let kind = match node.kind {
                NodeKind::Leaf => "leaf -".to_string(),
                NodeKind::Introduce(v) => format!("introduce {v}"),
                NodeKind::Forget(v) => format!("forget {v}"),
                NodeKind::Join => "join -".to_string(),
            };
            let bag = node
                .bag
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let children = node
                .children
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(
                out,
                "node {i} kind {kind} bag {bag} children {}",
                if children.is_empty() { "-".to_string() } else { children }
            );
        }
        out
    }

    /// DOT rendering for inspection.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph nicetree {\n  node [shape=box];\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let label = match node.kind {
                NodeKind::Leaf => format!("L{i} {:?}", node.bag),
                NodeKind::Introduce(v) => format!("I{i}+{v} {:?}", node.bag),
                NodeKind::Forget(v) => format!("F{i}-{v} {:?}", node.bag),
                NodeKind::Join => format!("J{i} {:?}", node.bag),
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", label.replace('"', ""));
            for &c in &node.children {
                let _ = writeln!(out, "  n{i} -> n{c};");
            }
        }
        out.push_str("}\n");
        out
    }
}

struct Builder {
    nodes: Vec<TreeNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, bag: Vec<VertexId>, children: Vec<usize>) -> usize {
        self.nodes.push(TreeNode { kind, bag, children });
        self.nodes.len() - 1
    }
}

/// Builds the nice clique tree of a chordal graph rooted at `root`.
pub fn build_nice_clique_tree(g: &Graph, root: VertexId) -> Result<NiceCliqueTree, TreeError> {
    if root >= g.n() {
        return Err(TreeError::BadRoot(root));
    }
    let mcs = match is_chordal(g) {
        Chordality::Chordal { mcs_order } => mcs_order,
        Chordality::NotChordal { violator } => return Err(TreeError::NotChordal(violator)),
    };
    let cliques = maximal_cliques(g, &mcs);
    let k = cliques.len();

    // Max-weight spanning tree of the clique intersection graph (Prim,
    // deterministic tie-breaking by smallest index). Positive weights
    // suffice because G is connected.
    let root_clique = cliques
        .iter()
        .position(|c| c.binary_search(&root).is_ok())
        .expect("every vertex lies in some maximal clique");
    let mut in_tree = vec![false; k];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    in_tree[root_clique] = true;
    for _ in 1..k {
        let mut best: Option<(usize, usize, usize)> = None; // (weight, new, attach)
        for c in 0..k {
            if in_tree[c] {
                continue;
            }
            for a in 0..k {
                if !in_tree[a] {
                    continue;
                }
                let w = intersection_size(&cliques[c], &cliques[a]);
                let cand = (w, c, a);
                let better = match best {
                    None => true,
                    Some((bw, bc, ba)) => {
                        (w > bw) || (w == bw && (c, a) < (bc, ba))
                    }
                };
                if better && w > 0 {
                    best = Some(cand);
                }
            }
        }
        let (_, c, a) = best.expect("clique intersection graph of a connected graph is connected");
        in_tree[c] = true;
        adj[a].push(c);
        adj[c].push(a);
    }

    // Orient away from the root clique.
    let mut clique_children: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut seen = vec![false; k];
    let mut queue = VecDeque::new();
    seen[root_clique] = true;
    queue.push_back(root_clique);
    while let Some(c) = queue.pop_front() {
        let mut kids = adj[c]
            .iter()
            .copied()
            .filter(|&d| !seen[d])
            .collect::<Vec<_>>();
        kids.sort_unstable();
        for &d in &kids {
            seen[d] = true;
            queue.push_back(d);
        }
        clique_children[c] = kids;
    }

    let mut b = Builder { nodes: Vec::new() };
    let top = emit_clique(&mut b, &cliques, &clique_children, root_clique);

    // Forget chain stripping the root clique down to {root}.
    let mut current = top;
    let mut bag = cliques[root_clique].clone();
    let mut to_remove: Vec<VertexId> = bag.iter().copied().filter(|&v| v != root).collect();
    to_remove.sort_unstable_by(|a, b| b.cmp(a));
    for v in to_remove {
        bag.retain(|&u| u != v);
        current = b.push(NodeKind::Forget(v), bag.clone(), vec![current]);
    }
    let root_node = current;

    let nodes = b.nodes;
    let mut parent = vec![None; nodes.len()];
    for (i, node) in nodes.iter().enumerate() {
        for &c in &node.children {
            parent[c] = Some(i);
        }
    }
    let mut subtree: Vec<Vec<VertexId>> = vec![Vec::new(); nodes.len()];
    let mut t = NiceCliqueTree {
        root_vertex: root,
        root: root_node,
        nodes,
        subtree: Vec::new(),
        parent,
    };
    for i in t.post_order() {
        let mut acc: Vec<VertexId> = t.nodes[i].bag.clone();
        for &c in &t.nodes[i].children {
            acc.extend_from_slice(&subtree[c]);
        }
        acc.sort_unstable();
        acc.dedup();
        subtree[i] = acc;
    }
    t.subtree = subtree;
    Ok(t)
}

/// Emits the subtree for one maximal clique; returns a node with bag = the clique.
fn emit_clique(
    b: &mut Builder,
    cliques: &[Vec<VertexId>],
    children: &[Vec<usize>],
    c: usize,
) -> usize {
    let bag = &cliques[c];
    let kids = &children[c];
    if kids.is_empty() {
        return emit_singleton_chain(b, bag);
    }
    let mut tops: Vec<usize> = Vec::with_capacity(kids.len());
    for &child in kids {
        let child_top = emit_clique(b, cliques, children, child);
        tops.push(emit_transition(b, &cliques[child], bag, child_top));
    }
    // Right-fold join tower over the child tops; every bag equals `bag`.
    let mut acc = tops.pop().unwrap();
    while let Some(t) = tops.pop() {
        acc = b.push(NodeKind::Join, bag.clone(), vec![t, acc]);
    }
    acc
}

/// Leaf with the smallest clique vertex, then introduces for the rest.
fn emit_singleton_chain(b: &mut Builder, clique: &[VertexId]) -> usize {
    let mut bag = vec![clique[0]];
    let mut node = b.push(NodeKind::Leaf, bag.clone(), Vec::new());
    for &v in &clique[1..] {
        bag.push(v);
        bag.sort_unstable();
        node = b.push(NodeKind::Introduce(v), bag.clone(), vec![node]);
    }
    node
}

/// Unit-step chain transforming bag `from` (on node `below`) into bag `to`:
/// first forget `from \ to`, then introduce `to \ from`.
fn emit_transition(
    b: &mut Builder,
    from: &[VertexId],
    to: &[VertexId],
    below: usize,
) -> usize {
    let mut bag = from.to_vec();
    let mut node = below;
    let drops: Vec<VertexId> = from
        .iter()
        .copied()
        .filter(|v| to.binary_search(v).is_err())
        .collect();
    for v in drops {
        bag.retain(|&u| u != v);
        node = b.push(NodeKind::Forget(v), bag.clone(), vec![node]);
    }
    let adds: Vec<VertexId> = to
        .iter()
        .copied()
        .filter(|v| from.binary_search(v).is_err())
        .collect();
    for v in adds {
        bag.push(v);
        bag.sort_unstable();
        node = b.push(NodeKind::Introduce(v), bag.clone(), vec![node]);
    }
    node
}

fn intersection_size(a: &[VertexId], b: &[VertexId]) -> usize {
    a.iter().filter(|x| b.binary_search(x).is_ok()).count()
}

/// Checks every nice-clique-tree invariant; returns the first violation.
pub fn validate_nice_tree(g: &Graph, t: &NiceCliqueTree, root: VertexId) -> Result<(), String> {
    let n = g.n();
    if t.len() > 7 * n {
        return Err(format!("node count {} exceeds 7n = {}", t.len(), 7 * n));
    }
    if t.node(t.root()).bag != vec![root] {
        return Err(format!(
            "root bag {:?} is not {{{root}}}",
            t.node(t.root()).bag
        ));
    }
    // structural checks per node
    for (i, node) in t.nodes().iter().enumerate() {
        if node.bag.is_empty() {
            return Err(format!("node {i}: empty bag"));
        }
        if node.bag.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("node {i}: bag not sorted/deduped"));
        }
        if node.bag.iter().any(|&v| v >= n) {
            return Err(format!("node {i}: bag vertex out of range"));
        }
        if !g.is_clique(&node.bag) {
            return Err(format!("node {i}: bag not clique"));
        }
        match node.kind {
            NodeKind::Leaf => {
                if !node.children.is_empty() || node.bag.len() != 1 {
                    return Err(format!("node {i}: Leaf arity/size"));
                }
            }
            NodeKind::Introduce(v) => {
                if node.children.len() != 1 {
                    return Err(format!("node {i}: Introduce arity"));
                }
                let child = &t.node(node.children[0]).bag;
                let mut expect = child.clone();
                if expect.binary_search(&v).is_ok() {
                    return Err(format!("node {i}: introduced vertex already in child"));
                }
                expect.push(v);
                expect.sort_unstable();
                if node.bag != expect {
                    return Err(format!("node {i}: Introduce bag relation"));
                }
            }
            NodeKind::Forget(v) => {
                if node.children.len() != 1 {
                    return Err(format!("node {i}: Forget arity"));
                }
                let child = &t.node(node.children[0]).bag;
                if child.binary_search(&v).is_err() {
                    return Err(format!("node {i}: forgotten vertex not in child"));
                }
                let expect: Vec<_> = child.iter().copied().filter(|&u| u != v).collect();
                if node.bag != expect {
                    return Err(format!("node {i}: Forget bag relation"));
                }
            }
            NodeKind::Join => {
                if node.children.len() != 2 {
                    return Err(format!("node {i}: Join arity"));
                }
                for &c in &node.children {
                    if t.node(c).bag != node.bag {
                        return Err(format!("node {i}: Join child bag differs"));
                    }
                }
            }
        }
    }
    // exactly one root, tree-connected
    let mut indeg = vec![0usize; t.len()];
    for node in t.nodes() {
        for &c in &node.children {
            indeg[c] += 1;
        }
    }
    for (i, &d) in indeg.iter().enumerate() {
        let expected = usize::from(i != t.root());
        if d != expected {
            return Err(format!("node {i}: in-degree {d}, expected {expected}"));
        }
    }
    // decomposition axioms
    let mut covered = vec![false; n];
    for node in t.nodes() {
        for &v in &node.bag {
            covered[v] = true;
        }
    }
    if let Some(v) = covered.iter().position(|&c| !c) {
        return Err(format!("vertex {v} in no bag"));
    }
    for (u, v) in g.edges() {
        let inside = t.nodes().iter().any(|node| {
            node.bag.binary_search(&u).is_ok() && node.bag.binary_search(&v).is_ok()
        });
        if !inside {
            return Err(format!("edge {u}-{v} in no bag"));
        }
    }
    for v in 0..n {
        if !vertex_subtree_connected(t, v) {
            return Err(format!("bags containing {v} not connected in the tree"));
        }
    }
    // separator property: every non-root bag separates its subtree-private
    // vertices from the rest of the graph
    for i in 0..t.len() {
        if i == t.root() {
            continue;
        }
        let bag = &t.node(i).bag;
        let sub = t.subtree_vertices(i).unwrap();
        let inside: Vec<VertexId> = sub
            .iter()
            .copied()
            .filter(|v| bag.binary_search(v).is_err())
            .collect();
        if inside.is_empty() {
            continue;
        }
        let mut outside_mark = vec![true; n];
        for &v in sub {
            outside_mark[v] = false;
        }
        if !outside_mark.iter().any(|&o| o) {
            continue;
        }
        // BFS from inside vertices avoiding the bag must stay inside
        let mut blocked = vec![false; n];
        for &v in bag {
            blocked[v] = true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in &inside {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !blocked[w] && !seen[w] {
                    if outside_mark[w] {
                        return Err(format!(
                            "bag of node {i} does not separate its subtree (leak via {w})"
                        ));
                    }
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    Ok(())
}

fn vertex_subtree_connected(t: &NiceCliqueTree, v: VertexId) -> bool {
    let holders: Vec<usize> = (0..t.len())
        .filter(|&i| t.node(i).bag.binary_search(&v).is_ok())
        .collect();
    if holders.len() <= 1 {
        return !holders.is_empty();
    }
    // walk the induced subgraph of the tree restricted to holders
    let inside = |i: usize| t.node(i).bag.binary_search(&v).is_ok();
    let mut seen = vec![false; t.len()];
    let mut queue = VecDeque::new();
    seen[holders[0]] = true;
    queue.push_back(holders[0]);
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        let mut step = |j: usize| {
            if inside(j) && !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        };
        if let Some(p) = t.parent(i) {
            step(p);
        }
        for &c in &t.node(i).children {
            step(c);
        }
    }
    count == holders.len()
}
