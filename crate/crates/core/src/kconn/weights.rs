//! Shared random edge costs, derived locally by every node.

use serde::Serialize;

use crate::congest::NodeId;
use crate::rng::{mix64, stream, tagged};

/// Total order on edges: 53-bit cost, then the canonical id pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeKey {
    pub weight_bits: u64,
    pub lo: u64,
    pub hi: u64,
}

impl EdgeKey {
    /// Cost in `[0, 1)`.
    pub fn weight(&self) -> f64 {
        self.weight_bits as f64 / (1u64 << 53) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeWeighting {
    pub master_seed: u64,
    pub rep: u64,
}

impl EdgeWeighting {
    pub fn new(master_seed: u64, rep: u64) -> Self {
        EdgeWeighting { master_seed, rep }
    }

    pub fn key(&self, a: NodeId, b: NodeId) -> EdgeKey {
        debug_assert_ne!(a, b);
        let (lo, hi) = if a < b { (a.0, b.0) } else { (b.0, a.0) };
        let base = tagged(self.master_seed, stream::WEIGHTS, self.rep);
        let h = mix64(base ^ mix64(lo.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ mix64(hi)));
        EdgeKey {
            weight_bits: h >> 11,
            lo,
            hi,
        }
    }

    /// Key function over vertex indices for a given id assignment.
    pub fn by_vertex<'a>(&'a self, ids: &'a [NodeId]) -> impl Fn(usize, usize) -> EdgeKey + 'a {
        move |u, v| self.key(ids[u], ids[v])
    }

    /// Key function using vertex indices directly as ids.
    pub fn by_index(&self) -> impl Fn(usize, usize) -> EdgeKey + '_ {
        move |u, v| self.key(NodeId(u as u64), NodeId(v as u64))
    }
}
