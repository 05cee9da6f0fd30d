//! The sequential cluster-growth process and the cheap-spanning-tree event.

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;

use super::weights::{EdgeKey, EdgeWeighting};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{cut_size, WitnessReport, WitnessSource};
use crate::rng::{stream, tagged};

/// Grows `W` from `{u}` by repeatedly adding the endpoint of the cheapest cut
/// edge, declaring a witness as soon as `c(W) < k`. The singleton is checked
/// too, so an isolated low-degree start is reported immediately.
pub fn sequential_witness_search<F>(
    g: &Graph,
    u: usize,
    s: usize,
    k: usize,
    key: F,
) -> Option<WitnessReport>
where
    F: Fn(usize, usize) -> EdgeKey,
{
    let n = g.n();
    let mut inside = vec![false; n];
    inside[u] = true;
    let mut members = vec![u];
    let mut cut = g.degree(u);
    let found = |members: &[usize], cut: usize| {
        Some(WitnessReport {
            set: VertexSet::new(members.iter().copied()),
            cut_size: cut,
            k,
            s_bound: s,
            source: WitnessSource::SequentialProcess,
        })
    };
    if cut < k {
        return found(&members, cut);
    }
    while members.len() < s {
        let next = members
            .iter()
            .flat_map(|&a| g.neighbors(a).iter().map(move |&b| (a, b)))
            .filter(|&(_, b)| !inside[b])
            .min_by_key(|&(a, b)| key(a, b));
        let (_, x) = next?;
        let into_w = g.neighbors(x).iter().filter(|&&y| inside[y]).count();
        cut = cut + g.degree(x) - 2 * into_w;
        inside[x] = true;
        members.push(x);
        if cut < k {
            return found(&members, cut);
        }
    }
    None
}

/// Whether the minimum spanning tree of `G[W]` exists and every tree edge is
/// cheaper than every cut edge of `W`.
pub fn cheap_tree_event<F>(g: &Graph, w: &VertexSet, key: F) -> bool
where
    F: Fn(usize, usize) -> EdgeKey,
{
    if w.len() <= 1 {
        return true;
    }
    let inside = w.indicator(g.n()).expect("members in range");
    let mut internal = Vec::new();
    let mut min_cut: Option<EdgeKey> = None;
    for a in w.iter() {
        for &b in g.neighbors(a) {
            if inside[b] {
                if a < b {
                    internal.push((key(a, b), a, b));
                }
            } else {
                let kk = key(a, b);
                min_cut = Some(min_cut.map_or(kk, |m| m.min(kk)));
            }
        }
    }
    internal.sort_unstable();
    let pos: Vec<usize> = {
        let mut p = vec![usize::MAX; g.n()];
        for (i, v) in w.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let mut uf = UnionFind::<usize>::new(w.len());
    let mut joined = 1;
    let mut max_tree: Option<EdgeKey> = None;
    for (kk, a, b) in internal {
        if uf.union(pos[a], pos[b]) {
            joined += 1;
            max_tree = Some(kk);
            if joined == w.len() {
                break;
            }
        }
    }
    if joined < w.len() {
        return false;
    }
    match (max_tree, min_cut) {
        (Some(t), Some(c)) => t < c,
        _ => true,
    }
}

/// Fraction of `trials` independent weightings under which [`cheap_tree_event`] holds.
pub fn cheap_tree_frequency(
    g: &Graph,
    w: &VertexSet,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let cut = cut_size(g, w)?;
    if cut >= k {
        return Err(Error::domain(format!(
            "cut of W is {cut}, not below k = {k}"
        )));
    }
    if w.len() == 1 {
        return Ok(1.0);
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let weighting = EdgeWeighting::new(tagged(seed, stream::TRIALS, t), 0);
            cheap_tree_event(g, w, weighting.by_index())
        })
        .count();
    Ok(hits as f64 / trials as f64)
}
