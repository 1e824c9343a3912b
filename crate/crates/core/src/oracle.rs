//! First-principles resolving-set semantics and exhaustive minimum
//! search. This module is the ground truth the dynamic program is
//! checked against; it never shares code with the solver.

use thiserror::Error;

use crate::graph::{DistanceMatrix, Graph, VertexId};

/// Hard cap on exhaustive search size; beyond this the oracle refuses.
pub const ORACLE_HARD_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle refuses n = {0} > cap {1} (exhaustive search)")]
    TooLarge(usize, usize),
    #[error("required vertex {0} out of range")]
    BadRequired(VertexId),
}

/// Minimum resolving set report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvingSetReport {
    pub size: usize,
    pub witness: Vec<VertexId>,
    pub required: Option<VertexId>,
}

/// True iff `s` distinguishes `u` from `v` by distance.
#[inline]
pub fn resolves(s: VertexId, u: VertexId, v: VertexId, d: &DistanceMatrix) -> bool {
    d.d(s, u) != d.d(s, v)
}

/// True iff every pair of distinct vertices is resolved by some member of `set`.
pub fn is_resolving_set(set: &[VertexId], g: &Graph, d: &DistanceMatrix) -> bool {
    let n = g.n();
    for u in 0..n {
        for v in u + 1..n {
            if !set.iter().any(|&s| resolves(s, u, v, d)) {
                return false;
            }
        }
    }
    true
}

/// Exhaustive minimum resolving set, by cardinality then lexicographic
/// order on sorted vertex ids, optionally constrained to contain
/// `required`. Deterministic: the first witness in enumeration order.
pub fn min_resolving_set(
    g: &Graph,
    required: Option<VertexId>,
    cap: usize,
) -> Result<ResolvingSetReport, OracleError> {
    let n = g.n();
    let cap = cap.min(ORACLE_HARD_CAP);
    if n > cap {
        return Err(OracleError::TooLarge(n, cap));
    }
    if let Some(r) = required {
        if r >= n {
            return Err(OracleError::BadRequired(r));
        }
    }
    let d = DistanceMatrix::new(g);
    let min_size = usize::from(required.is_some());
    for size in min_size..=n {
        let mut found: Option<Vec<VertexId>> = None;
        for_each_subset(n, size, &mut |subset| {
            if found.is_some() {
                return;
            }
            if let Some(r) = required {
                if !subset.contains(&r) {
                    return;
                }
            }
            if is_resolving_set(subset, g, &d) {
                found = Some(subset.to_vec());
            }
        });
        if let Some(witness) = found {
            return Ok(ResolvingSetReport {
                size,
                witness,
                required,
            });
        }
    }
    unreachable!("the full vertex set always resolves")
}

/// Visits all size-k subsets of 0..n in lexicographic order.
fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[VertexId])) {
    let mut current = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, current: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if current.len() == k {
            f(current);
            return;
        }
        let remaining = k - current.len();
        for v in start..=n.saturating_sub(remaining) {
            current.push(v);
            rec(n, k, v + 1, current, f);
            current.pop();
        }
    }
    if k == 0 {
        f(&[]);
        return;
    }
    rec(n, k, 0, &mut current, f);
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

    #[test]
    fn resolves_on_p3() {
        let g = path(3);
        let d = DistanceMatrix::new(&g);
        assert!(resolves(0, 1, 2, &d));
        assert!(!resolves(1, 0, 2, &d));
        assert!(resolves(0, 0, 2, &d));
    }

    #[test]
    fn endpoint_resolves_path() {
        let g = path(4);
        let d = DistanceMatrix::new(&g);
        assert!(is_resolving_set(&[0], &g, &d));
        assert!(!is_resolving_set(&[1], &g, &d));
    }

    #[test]
    fn singleton_fails_on_k3() {
        let g = complete(3);
        let d = DistanceMatrix::new(&g);
        for s in 0..3 {
            assert!(!is_resolving_set(&[s], &g, &d));
        }
    }

    #[test]
    fn empty_set_fails_for_n_ge_2() {
        let g = path(2);
        let d = DistanceMatrix::new(&g);
        assert!(!is_resolving_set(&[], &g, &d));
    }

    #[test]
    fn empty_set_vacuous_for_n_1() {
        let g = Graph::parse("1 0").unwrap();
        let d = DistanceMatrix::new(&g);
        assert!(is_resolving_set(&[], &g, &d));
        let rep = min_resolving_set(&g, None, 16).unwrap();
        assert_eq!(rep.size, 0);
        assert!(rep.witness.is_empty());
    }

    #[test]
    fn p5_dimension_one() {
        let rep = min_resolving_set(&path(5), None, 16).unwrap();
        assert_eq!(rep.size, 1);
        assert_eq!(rep.witness, vec![0]);
    }

    #[test]
    fn k4_dimension_three() {
        let rep = min_resolving_set(&complete(4), None, 16).unwrap();
        assert_eq!(rep.size, 3);
        assert_eq!(rep.witness, vec![0, 1, 2]);
    }

    #[test]
    fn p3_required_middle() {
        let rep = min_resolving_set(&path(3), Some(1), 16).unwrap();
        assert_eq!(rep.size, 2);
        assert!(rep.witness.contains(&1));
    }

    #[test]
    fn refuses_large() {
        let g = path(17);
        assert_eq!(
            min_resolving_set(&g, None, 16).unwrap_err(),
            OracleError::TooLarge(17, 16)
        );
    }

    #[test]
    fn superset_monotonicity_spot_check() {
        let g = path(6);
        let d = DistanceMatrix::new(&g);
        let base = vec![0];
        assert!(is_resolving_set(&base, &g, &d));
        for extra in 1..6 {
            assert!(is_resolving_set(&[0, extra], &g, &d));
        }
    }
}
