//! Distance vectors and traces over clique bags, and the coordinate
//! edits the dynamic-programming rules apply to them.
//!
//! All rules are stated for a distinguished bag vertex; since one node
//! can simultaneously be an introduce node and the child of a forget
//! node, edits take an explicit coordinate index instead of assuming
//! the distinguished vertex sits last.

use crate::graph::{DistanceMatrix, VertexId};

/// Distance vector of a vertex to an ordered bag: coordinate j is the
/// hop distance to the j-th bag vertex (canonical = ascending id).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DistVec(pub Vec<u32>);

impl DistVec {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_entry(&self) -> u32 {
        *self.0.iter().min().expect("non-empty distance vector")
    }

    pub fn max_entry(&self) -> u32 {
        *self.0.iter().max().expect("non-empty distance vector")
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&x| x == self.0[0])
    }

    /// Clique window: over a clique bag, entries span at most two
    /// consecutive values.
    pub fn satisfies_window(&self) -> bool {
        self.max_entry() <= self.min_entry() + 1
    }

    pub fn insert_coord(&self, at: usize, value: u32) -> DistVec {
        let mut v = self.0.clone();
        v.insert(at, value);
        DistVec(v)
    }

    pub fn drop_coord(&self, at: usize) -> DistVec {
        debug_assert!(self.len() >= 2, "drop needs length >= 2");
        let mut v = self.0.clone();
        v.remove(at);
        DistVec(v)
    }

    pub fn constant(len: usize, value: u32) -> DistVec {
        DistVec(vec![value; len])
    }
}

/// Binary trace over a bag, stored as a bitmask; never all-ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TraceVec {
    len: u8,
    bits: u16,
}

impl TraceVec {
    pub fn new(len: usize, bits: u16) -> TraceVec {
        assert!(len >= 1 && len <= 16);
        let t = TraceVec { len: len as u8, bits: bits & mask(len) };
        assert!(!t.is_all_ones(), "trace may not be all-ones");
        t
    }

    pub fn from_bits_unchecked(len: usize, bits: u16) -> TraceVec {
        TraceVec { len: len as u8, bits: bits & mask(len) }
    }

    pub fn zeros(len: usize) -> TraceVec {
        TraceVec { len: len as u8, bits: 0 }
    }

    /// Ones everywhere except coordinate `at` (the trace of a vertex
    /// adjacent only through / sitting at that bag position).
    pub fn ones_except(len: usize, at: usize) -> TraceVec {
        TraceVec { len: len as u8, bits: mask(len) & !(1 << at) }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> u32 {
        u32::from(self.bits >> j & 1)
    }

    pub fn is_all_ones(&self) -> bool {
        self.bits == mask(self.len())
    }

    pub fn is_all_zeros(&self) -> bool {
        self.bits == 0
    }

    pub fn coords(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len()).map(move |j| self.get(j))
    }

    /// Inserts a coordinate with the given bit at position `at`.
    pub fn insert_coord(&self, at: usize, bit: u32) -> TraceVec {
        let low = self.bits & (mask(at));
        let high = (self.bits >> at) << (at + 1);
        TraceVec {
            len: self.len + 1,
            bits: low | high | (((bit as u16) & 1) << at),
        }
    }

    /// Removes the coordinate at position `at`.
    pub fn drop_coord(&self, at: usize) -> TraceVec {
        debug_assert!(self.len >= 2);
        let low = self.bits & mask(at);
        let high = (self.bits >> (at + 1)) << at;
        TraceVec {
            len: self.len - 1,
            bits: low | high,
        }
    }
}

#[inline]
fn mask(len: usize) -> u16 {
    if len >= 16 {
        u16::MAX
    } else {
        (1u16 << len) - 1
    }
}

/// Distance vector of `x` to the bag, canonical bag order.
pub fn distance_vector(x: VertexId, bag: &[VertexId], dist: &DistanceMatrix) -> DistVec {
    DistVec(bag.iter().map(|&v| dist.d(x, v)).collect())
}

/// Trace of `x` on a clique bag: distance vector minus its minimum.
/// The clique window property makes the result binary and not all-ones.
pub fn trace_of(x: VertexId, bag: &[VertexId], dist: &DistanceMatrix) -> TraceVec {
    let dv = distance_vector(x, bag, dist);
    let a = dv.min_entry();
    let mut bits = 0u16;
    for (j, &d) in dv.0.iter().enumerate() {
        let r = d - a;
        assert!(r <= 1, "trace coordinate {r} > 1: bag is not a clique");
        bits |= (r as u16) << j;
    }
    let t = TraceVec::from_bits_unchecked(bag.len(), bits);
    assert!(!t.is_all_ones(), "all-ones trace cannot arise on a clique");
    t
}

/// min over coordinates of (dv + trace).
#[inline]
pub fn min_plus(dv: &DistVec, t: &TraceVec) -> u32 {
    dv.0.iter()
        .enumerate()
        .map(|(j, &d)| d + t.get(j))
        .min()
        .expect("non-empty vector")
}

/// Whether `r3` resolves the pair `(r1, r2)`:
/// `min_i (r1 + r3)_i != min_i (r2 + r3)_i`.
pub fn vector_resolves(r1: &DistVec, r2: &DistVec, r3: &TraceVec) -> bool {
    debug_assert_eq!(r1.len(), r2.len());
    debug_assert_eq!(r1.len(), r3.len());
    min_plus(r1, r3) != min_plus(r2, r3)
}

/// Whether the vertex pair `(x, y)` is resolved by some vector of `m`,
/// evaluated through their distance vectors to the bag.
pub fn pair_resolved_by_vectors<'a>(
    x: VertexId,
    y: VertexId,
    bag: &[VertexId],
    m: impl IntoIterator<Item = &'a TraceVec>,
    dist: &DistanceMatrix,
) -> bool {
    let rx = distance_vector(x, bag, dist);
    let ry = distance_vector(y, bag, dist);
    m.into_iter().any(|t| vector_resolves(&rx, &ry, t))
}

/// Extension mode for carrying a distance vector across a forgotten
/// bag vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendMode {
    Minus,
    Flat,
    Plus,
}

/// Inserts the coordinate a forgotten vertex would have: for
/// non-constant vectors minus/flat append the minimum and plus the
/// maximum; for constant vectors the three modes append value-1,
/// value, value+1.
pub fn extend_vector(r: &DistVec, mode: ExtendMode, at: usize) -> Result<DistVec, ExtendError> {
    let value = if r.is_constant() {
        let c = r.0[0];
        match mode {
            ExtendMode::Minus => {
                if c == 0 {
                    return Err(ExtendError::MinusOnConstantZero);
                }
                c - 1
            }
            ExtendMode::Flat => c,
            ExtendMode::Plus => c + 1,
        }
    } else {
        match mode {
            ExtendMode::Minus | ExtendMode::Flat => r.min_entry(),
            ExtendMode::Plus => r.max_entry(),
        }
    };
    Ok(r.insert_coord(at, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExtendError {
    #[error("minus extension of a constant zero vector would go negative")]
    MinusOnConstantZero,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn p4() -> (Graph, DistanceMatrix) {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = DistanceMatrix::new(&g);
        (g, d)
    }

    #[test]
    fn distance_vector_p4() {
        let (_, d) = p4();
        assert_eq!(distance_vector(3, &[1, 2], &d), DistVec(vec![2, 1]));
        assert_eq!(distance_vector(1, &[1, 2], &d), DistVec(vec![0, 1]));
    }

    #[test]
    fn distance_vector_window_on_cliques() {
        let (_, d) = p4();
        for x in 0..4 {
            assert!(distance_vector(x, &[1, 2], &d).satisfies_window());
        }
    }

    #[test]
    fn trace_p4() {
        let (_, d) = p4();
        // x=0, bag {1,2}: d=(1,2), a=1 -> (0,1)
        let t = trace_of(0, &[1, 2], &d);
        assert_eq!((t.get(0), t.get(1)), (0, 1));
        // bag vertex in a size-2 bag
        let t1 = trace_of(1, &[1, 2], &d);
        assert_eq!((t1.get(0), t1.get(1)), (0, 1));
        let t2 = trace_of(2, &[1, 2], &d);
        assert_eq!((t2.get(0), t2.get(1)), (1, 0));
    }

    #[test]
    fn trace_all_zeros_when_adjacent_to_whole_bag() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]).unwrap();
        let d = DistanceMatrix::new(&g);
        let t = trace_of(3, &[0, 1, 2], &d);
        assert!(t.is_all_zeros());
    }

    #[test]
    fn vector_resolves_examples() {
        let r3 = TraceVec::new(2, 0b10); // (0,1)
        assert!(vector_resolves(
            &DistVec(vec![2, 3]),
            &DistVec(vec![3, 3]),
            &r3
        ));
        let r = DistVec(vec![1, 2]);
        assert!(!vector_resolves(&r, &r, &TraceVec::new(2, 0b01)));
        // ((0,1),(1,1),(1,0)): min(1,1)=1 vs min(2,1)=1
        assert!(!vector_resolves(
            &DistVec(vec![0, 1]),
            &DistVec(vec![1, 1]),
            &TraceVec::new(2, 0b01)
        ));
    }

    #[test]
    fn pair_resolution_via_external_trace() {
        // P4 0-1-2-3, K={2}, pair (0,1), M={(0)}: vertex 3 resolves.
        let (_, d) = p4();
        let m = [TraceVec::zeros(1)];
        assert!(pair_resolved_by_vectors(0, 1, &[2], &m, &d));
        assert!(d.d(3, 0) != d.d(3, 1));
        // empty M never resolves
        let empty: [TraceVec; 0] = [];
        assert!(!pair_resolved_by_vectors(0, 1, &[2], &empty, &d));
        // identical distance vectors are never resolved
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let d2 = DistanceMatrix::new(&g);
        let m2 = [TraceVec::zeros(1), TraceVec::zeros(1)];
        assert!(!pair_resolved_by_vectors(1, 2, &[0], &m2, &d2));
    }

    #[test]
    fn lift_drop_round_trip() {
        let r = DistVec(vec![1, 2]);
        let lifted = r.insert_coord(2, 0);
        assert_eq!(lifted, DistVec(vec![1, 2, 0]));
        assert_eq!(lifted.drop_coord(2), r);
        for at in 0..=2 {
            for m in 0..4 {
                assert_eq!(r.insert_coord(at, m).drop_coord(at), r);
            }
        }
    }

    #[test]
    fn trace_insert_drop_round_trip() {
        let t = TraceVec::new(3, 0b011);
        for at in 0..=3 {
            for bit in 0..2 {
                let up = t.insert_coord(at, bit);
                assert_eq!(up.get(at), bit);
                assert_eq!(up.drop_coord(at), t);
            }
        }
    }

    #[test]
    fn extend_vector_cases() {
        let r = DistVec(vec![1, 2]);
        assert_eq!(
            extend_vector(&r, ExtendMode::Minus, 2).unwrap(),
            DistVec(vec![1, 2, 1])
        );
        assert_eq!(
            extend_vector(&r, ExtendMode::Flat, 2).unwrap(),
            DistVec(vec![1, 2, 1])
        );
        assert_eq!(
            extend_vector(&r, ExtendMode::Plus, 2).unwrap(),
            DistVec(vec![1, 2, 2])
        );
        let c = DistVec(vec![1, 1]);
        assert_eq!(
            extend_vector(&c, ExtendMode::Minus, 2).unwrap(),
            DistVec(vec![1, 1, 0])
        );
        assert_eq!(
            extend_vector(&c, ExtendMode::Flat, 2).unwrap(),
            DistVec(vec![1, 1, 1])
        );
        assert_eq!(
            extend_vector(&c, ExtendMode::Plus, 2).unwrap(),
            DistVec(vec![1, 1, 2])
        );
        let zero = DistVec(vec![0, 0]);
        assert_eq!(
            extend_vector(&zero, ExtendMode::Minus, 2),
            Err(ExtendError::MinusOnConstantZero)
        );
    }

    #[test]
    fn separated_vertex_extends_plus() {
        // if the smaller bag separates x from v, the bigger-bag vector
        // is exactly the plus extension
        let (_, d) = p4();
        // bag {2}, extended by v=3 at index 1; x=0 is separated from 3 by {2}
        let small = distance_vector(0, &[2], &d);
        let big = distance_vector(0, &[2, 3], &d);
        assert_eq!(extend_vector(&small, ExtendMode::Plus, 1).unwrap(), big);
    }
}
