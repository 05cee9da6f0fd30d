//! Exact structural oracles: cuts, components, edge connectivity and the
//! smallest small-cut parameter `s_k`.
//!
//! Everything here is a pure function of an immutable [`Graph`], and serves as
//! ground truth for the testers and the Monte-Carlo machinery.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Default bound on `n` for the subset-enumerating oracles.
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutReport {
    pub set: VertexSet,
    pub cut_size: usize,
    /// `|U| (n - |U|)`, the number of vertex pairs crossing the cut.
    pub potential: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WitnessSource {
    Oracle,
    SequentialProcess,
    DistributedRun { root: u64, repetition: usize },
}

/// A vertex set of at most `s_bound` nodes whose cut is below `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub set: VertexSet,
    pub cut_size: usize,
    pub k: usize,
    pub s_bound: usize,
    pub source: WitnessSource,
}

impl WitnessReport {
    /// Builds a report after checking every witness invariant against `g`.
    pub fn verified(
        g: &Graph,
        set: VertexSet,
        k: usize,
        s_bound: usize,
        source: WitnessSource,
    ) -> Result<Self> {
        let cut = cut_size(g, &set)?;
        if cut >= k {
            return Err(Error::Soundness(format!(
                "claimed witness {:?} has cut {cut} >= k = {k}",
                set.as_slice()
            )));
        }
        if set.len() > s_bound {
            return Err(Error::Soundness(format!(
                "claimed witness has {} > s = {s_bound} vertices",
                set.len()
            )));
        }
        Ok(WitnessReport {
            set,
            cut_size: cut,
            k,
            s_bound,
            source,
        })
    }
}

fn check_cut_side(g: &Graph, u: &VertexSet) -> Result<Vec<bool>> {
    if u.is_empty() {
        return Err(Error::domain("cut side must be nonempty"));
    }
    if u.len() >= g.n() {
        return Err(Error::domain("cut side must be a proper subset of V"));
    }
    u.indicator(g.n())
        .ok_or_else(|| Error::domain("cut side contains a vertex outside V"))
}

/// `c(U)`: number of edges with exactly one endpoint in `U`.
pub fn cut_size(g: &Graph, u: &VertexSet) -> Result<usize> {
    let inside = check_cut_side(g, u)?;
    Ok(u.iter()
        .map(|v| g.neighbors(v).iter().filter(|&&w| !inside[w]).count())
        .sum())
}

pub fn cut_report(g: &Graph, u: &VertexSet) -> Result<CutReport> {
    let cut = cut_size(g, u)?;
    Ok(CutReport {
        set: u.clone(),
        cut_size: cut,
        potential: u.len() * (g.n() - u.len()),
    })
}

/// Components ordered by their smallest vertex.
pub fn connected_components(g: &Graph) -> Vec<VertexSet> {
    let n = g.n();
    let mut label = vec![usize::MAX; n];
    let mut parts = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = parts.len();
        let mut members = vec![start];
        label[start] = id;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        parts.push(VertexSet::new(members));
    }
    parts
}

pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).len() == 1
}

/// Number of edge additions needed to connect `g`.
pub fn hamming_additions_to_connected(g: &Graph) -> usize {
    connected_components(g).len() - 1
}

/// Global minimum edge cut (Stoer-Wagner on unit weights).
pub fn edge_connectivity(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n < 2 {
        return Err(Error::domain("edge connectivity needs n >= 2"));
    }
    if !is_connected(g) {
        return Ok(0);
    }
    // weight[a][b] between super-vertices; merged vertices are dropped from `active`.
    let mut weight = vec![vec![0usize; n]; n];
    for (u, v) in g.edges() {
        weight[u][v] = 1;
        weight[v][u] = 1;
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    let mut key = vec![0usize; n];
    let mut added = vec![false; n];
    while active.len() > 1 {
        for &v in &active {
            key[v] = 0;
            added[v] = false;
        }
        let mut order = Vec::with_capacity(active.len());
        for _ in 0..active.len() {
            let next = active
                .iter()
                .copied()
                .filter(|&v| !added[v])
                .max_by_key(|&v| (key[v], std::cmp::Reverse(v)))
                .expect("an unadded vertex remains");
            added[next] = true;
            order.push(next);
            for &v in &active {
                if !added[v] {
                    key[v] += weight[next][v];
                }
            }
        }
        let last = order[order.len() - 1];
        let prev = order[order.len() - 2];
        // Cut of the phase: `last` against everything else.
        best = best.min(key[last]);
        // Merge `last` into `prev`.
        for &v in &active {
            weight[prev][v] += weight[last][v];
            weight[v][prev] = weight[prev][v];
        }
        weight[prev][prev] = 0;
        active.retain(|&v| v != last);
    }
    Ok(best)
}

/// Edge connectivity by enumerating every cut side; cross-check for small `n`.
pub fn edge_connectivity_exhaustive(g: &Graph) -> Result<usize> {
    let n = g.n();
    if n < 2 {
        return Err(Error::domain("edge connectivity needs n >= 2"));
    }
    ensure_enumerable(n, ENUMERATION_LIMIT, "exhaustive edge connectivity")?;
    let masks = g.adjacency_masks();
    let full = (1u64 << n) - 1;
    // Sides not containing vertex n-1 cover every cut exactly once.
    let best = (1..(1u64 << (n - 1)))
        .map(|side| mask_cut(&masks, side, full))
        .min()
        .expect("n >= 2 gives at least one side");
    Ok(best)
}

/// `true` iff `edge_connectivity(g) >= k`; single-vertex graphs are k-connected for all k.
pub fn is_k_connected(g: &Graph, k: usize) -> bool {
    if g.n() == 1 || k == 0 {
        return true;
    }
    if g.min_degree() < k {
        return false;
    }
    if k == 1 {
        return is_connected(g);
    }
    edge_connectivity(g).expect("n >= 2 here") >= k
}

fn ensure_enumerable(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit || n > 63 {
        return Err(Error::Capacity {
            what,
            n,
            limit: limit.min(63),
        });
    }
    Ok(())
}

fn mask_cut(masks: &[u64], side: u64, full: u64) -> usize {
    let outside = full & !side;
    let mut rest = side;
    let mut cut = 0usize;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        cut += (masks[v] & outside).count_ones() as usize;
    }
    cut
}

/// Iterates all `n`-bit masks with exactly `bits` ones in increasing order.
fn masks_with_popcount(n: usize, bits: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let first = if bits == 0 || bits > n {
        limit
    } else {
        (1u64 << bits) - 1
    };
    std::iter::successors(Some(first), move |&x| {
        // Gosper's hack.
        let c = x & x.wrapping_neg();
        let r = x + c;
        let next = (((r ^ x) >> 2) / c) | r;
        Some(next)
    })
    .take_while(move |&x| x < limit)
}

/// `s_k(G)`: size of the smallest nonempty proper subset with cut `< k`, or `n`
/// when no such subset exists.
pub fn s_k_oracle(g: &Graph, k: usize) -> Result<usize> {
    s_k_oracle_bounded(g, k, ENUMERATION_LIMIT)
}

pub fn s_k_oracle_bounded(g: &Graph, k: usize, limit: usize) -> Result<usize> {
    let n = g.n();
    ensure_enumerable(n, limit, "s_k enumeration")?;
    if n == 1 {
        return Ok(1);
    }
    let masks = g.adjacency_masks();
    let full = (1u64 << n) - 1;
    // A set and its complement have the same cut, so the minimum is at most n/2.
    for size in 1..=n / 2 {
        if masks_with_popcount(n, size).any(|side| mask_cut(&masks, side, full) < k) {
            return Ok(size);
        }
    }
    Ok(n)
}

/// Every `U` with `c(U) < k` and `|U| = s_k(G)`; empty when `G` is k-connected.
pub fn minimal_small_cut_sets(g: &Graph, k: usize) -> Result<Vec<CutReport>> {
    let n = g.n();
    let size = s_k_oracle(g, k)?;
    if size == n {
        return Ok(Vec::new());
    }
    let masks = g.adjacency_masks();
    let full = (1u64 << n) - 1;
    Ok(masks_with_popcount(n, size)
        .filter_map(|side| {
            let cut = mask_cut(&masks, side, full);
            (cut < k).then(|| CutReport {
                set: VertexSet::from_mask(side),
                cut_size: cut,
                potential: size * (n - size),
            })
        })
        .collect())
}

/// Whether the subgraph induced by `u` is connected (`true` for singletons).
pub fn induces_connected(g: &Graph, u: &VertexSet) -> bool {
    let Some(first) = u.iter().next() else {
        return false;
    };
    let Some(inside) = u.indicator(g.n()) else {
        return false;
    };
    let mut seen = vec![false; g.n()];
    seen[first] = true;
    let mut stack = vec![first];
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if inside[w] && !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    reached == u.len()
}
