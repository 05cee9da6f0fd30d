//! All graphs on a few vertices, one per isomorphism class.

use std::collections::BTreeSet;

use crate::graph::Graph;

/// Largest `n` the corpus builder accepts.
pub const CORPUS_LIMIT: usize = 7;

fn pair_index(n: usize) -> Vec<Vec<usize>> {
    let mut idx = vec![vec![usize::MAX; n]; n];
    let mut next = 0;
    #[allow(clippy::needless_range_loop)]
    for u in 0..n {
        for v in u + 1..n {
            idx[u][v] = next;
            idx[v][u] = next;
            next += 1;
        }
    }
    idx
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    out.push(perm.clone());
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            perm.swap(j, i);
            out.push(perm.clone());
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

struct Canon {
    n: usize,
    pairs: Vec<(usize, usize)>,
    idx: Vec<Vec<usize>>,
    perms: Vec<Vec<usize>>,
}

impl Canon {
    fn new(n: usize) -> Self {
        let pairs = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Canon {
            n,
            pairs,
            idx: pair_index(n),
            perms: all_permutations(n),
        }
    }

    /// Smallest edge mask over all relabelings.
    fn canonical(&self, mask: u32) -> u32 {
        let edges: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        self.perms
            .iter()
            .map(|p| {
                edges
                    .iter()
                    .fold(0u32, |m, &(u, v)| m | 1 << self.idx[p[u]][p[v]])
            })
            .min()
            .unwrap_or(0)
    }

    fn graph(&self, mask: u32) -> Graph {
        let edges = self
            .pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e);
        Graph::from_edges(self.n, edges).expect("valid pair list")
    }
}

/// One representative per isomorphism class of graphs on `n` vertices.
///
/// Built by extending every class on `n - 1` vertices with a new vertex in
/// all possible ways, then deduplicating by canonical form.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    assert!(
        (1..=CORPUS_LIMIT).contains(&n),
        "corpus supports 1 <= n <= {CORPUS_LIMIT}"
    );
    let mut masks: BTreeSet<u32> = BTreeSet::from([0]);
    for m in 2..=n {
        let prev = Canon::new(m - 1);
        let cur = Canon::new(m);
        let mut next = BTreeSet::new();
        for &mask in &masks {
            let base = prev
                .pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(0u32, |acc, (_, &(u, v))| acc | 1 << cur.idx[u][v]);
            for nbrs in 0u32..(1 << (m - 1)) {
                let ext = (0..m - 1)
                    .filter(|u| nbrs >> u & 1 == 1)
                    .fold(base, |acc, u| acc | 1 << cur.idx[u][m - 1]);
                next.insert(cur.canonical(ext));
            }
        }
        masks = next;
    }
    let canon = Canon::new(n);
    masks.into_iter().map(|m| canon.graph(m)).collect()
}
