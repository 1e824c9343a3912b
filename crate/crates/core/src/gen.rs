//! Seeded random chordal graph generation.
//!
//! Construction: start from a single vertex; each new vertex attaches to
//! a uniformly chosen sub-clique (of uniform size in `[1, omega-1]`) of
//! an existing maximal clique. Every new vertex is simplicial when
//! added, so the result is chordal with maximum clique size <= omega,
//! and reverse insertion order is a perfect elimination ordering.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n must be >= 1, got {0}")]
    BadN(usize),
    #[error("omega must be >= 2, got {0}")]
    BadOmega(usize),
}

/// Deterministic for fixed `(n, omega, seed)`, bit-for-bit across runs.
pub fn random_chordal(n: usize, omega: usize, seed: u64) -> Result<Graph, GenError> {
    if n < 1 {
        return Err(GenError::BadN(n));
    }
    if omega < 2 {
        return Err(GenError::BadOmega(omega));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    // maximal cliques seen so far, each sorted
    let mut cliques: Vec<Vec<VertexId>> = vec![vec![0]];
    for v in 1..n {
        let want = rng.gen_range(1..omega);
        let host_idx = rng.gen_range(0..cliques.len());
        let host = cliques[host_idx].clone();
        let size = want.min(host.len());
        let attach = sample_subset(&host, size, &mut rng);
        for &u in &attach {
            edges.push((u, v));
        }
        let mut new_clique = attach.clone();
        new_clique.push(v);
        new_clique.sort_unstable();
        if size == host.len() {
            // host is now contained in the new clique
            cliques[host_idx] = new_clique;
        } else {
            cliques.push(new_clique);
        }
    }
    Ok(Graph::from_edges(n, &edges).expect("construction yields a valid connected graph"))
}

/// Uniform k-subset, returned sorted; consumes RNG deterministically.
fn sample_subset(pool: &[VertexId], k: usize, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let mut indices: Vec<usize> = (0..pool.len()).collect();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let i = rng.gen_range(0..indices.len());
        picked.push(pool[indices.swap_remove(i)]);
    }
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordal::{is_chordal, max_clique_size};

    #[test]
    fn single_vertex() {
        let g = random_chordal(1, 2, 42).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn chordal_and_bounded_omega() {
        for seed in 0..20 {
            let g = random_chordal(10, 3, seed).unwrap();
            assert!(is_chordal(&g).is_chordal(), "seed {seed}");
            assert!(max_clique_size(&g) <= 3, "seed {seed}");
        }
    }

    #[test]
    fn omega_two_gives_trees() {
        for seed in 0..10 {
            let g = random_chordal(15, 2, seed).unwrap();
            assert_eq!(g.edge_count(), 14, "seed {seed}");
        }
    }

    #[test]
    fn deterministic() {
        let a = random_chordal(30, 4, 7).unwrap();
        let b = random_chordal(30, 4, 7).unwrap();
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn bad_params() {
        assert_eq!(random_chordal(0, 3, 1).unwrap_err(), GenError::BadN(0));
        assert_eq!(random_chordal(5, 1, 1).unwrap_err(), GenError::BadOmega(1));
    }
}
