//! Simple undirected graphs over dense vertex ids `0..n`.
//!
//! Edges are stored canonically as `(u, v)` with `u < v`, so iteration order
//! and the text serialization are deterministic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Edgeless graph on `n >= 1` vertices.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph needs at least one vertex"));
        }
        Ok(Graph {
            n,
            edges: BTreeSet::new(),
            adj: vec![Vec::new(); n],
        })
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(n)?;
        for (u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(Error::domain(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Graph::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                g.insert_unchecked(u, v);
            }
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("cycle needs n >= 3"));
        }
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Inserts `{u, v}`. Returns `false` if the edge was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        if u == v {
            return Err(Error::domain(format!("self-loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::domain(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        let (a, b) = canonical(u, v);
        if self.edges.contains(&(a, b)) {
            return Ok(false);
        }
        self.insert_unchecked(a, b);
        Ok(true)
    }

    pub(crate) fn insert_unchecked(&mut self, a: usize, b: usize) {
        debug_assert!(a < b && b < self.n);
        if self.edges.insert((a, b)) {
            let pos = self.adj[a].binary_search(&b).unwrap_err();
            self.adj[a].insert(pos, b);
            let pos = self.adj[b].binary_search(&a).unwrap_err();
            self.adj[b].insert(pos, a);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn max_edges(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    /// `|Ē|`, the number of vertex pairs that are not edges.
    pub fn non_edge_count(&self) -> usize {
        self.max_edges() - self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&canonical(u, v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Non-edges in lexicographic order.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.non_edge_count());
        for u in 0..self.n {
            let mut row = self.adj[u].iter().copied().filter(|&w| w > u).peekable();
            for v in u + 1..self.n {
                if row.peek() == Some(&v) {
                    row.next();
                } else {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_supergraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && other.edges.is_subset(&self.edges)
    }

    /// Edge-union of two graphs on the same vertex set.
    pub fn union(&self, other: &Graph) -> Result<Graph> {
        if self.n != other.n {
            return Err(Error::domain("union of graphs with different n"));
        }
        let mut g = self.clone();
        for (u, v) in other.edges() {
            g.insert_unchecked(u, v);
        }
        Ok(g)
    }

    /// Adjacency bitmasks, one word per vertex. Only valid for `n <= 64`.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        debug_assert!(self.n <= 64);
        self.adj
            .iter()
            .map(|nbrs| nbrs.iter().fold(0u64, |m, &w| m | (1u64 << w)))
            .collect()
    }

    /// Text form: `n m` header then one `u v` line per edge, `u < v`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.edges.len());
        for (u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(header, 1)?;
        let mut g = Graph::new(n).map_err(|_| Error::Parse {
            line: 1,
            msg: "n must be at least 1".into(),
        })?;
        let mut seen = 0usize;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "blank line".into(),
                });
            }
            let (u, v) = parse_pair(line, lineno)?;
            if u >= v {
                let msg = if u == v {
                    format!("self-loop at {u}")
                } else {
                    format!("edge ({u}, {v}) not in canonical u < v order")
                };
                return Err(Error::Parse { line: lineno, msg });
            }
            if v >= n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("vertex {v} out of range for n = {n}"),
                });
            }
            if g.has_edge(u, v) {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("duplicate edge ({u}, {v})"),
                });
            }
            g.insert_unchecked(u, v);
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }
}

fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let bad = |msg: &str| Error::Parse {
        line: lineno,
        msg: format!("{msg}: {line:?}"),
    };
    let mut it = line.split(' ');
    let a = it.next().ok_or_else(|| bad("expected two integers"))?;
    let b = it.next().ok_or_else(|| bad("expected two integers"))?;
    if it.next().is_some() {
        return Err(bad("trailing fields"));
    }
    let a = a.parse().map_err(|_| bad("not a decimal integer"))?;
    let b = b.parse().map_err(|_| bad("not a decimal integer"))?;
    Ok((a, b))
}

/// A set of vertices, kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn from_mask(mask: u64) -> Self {
        VertexSet((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn complement(&self, n: usize) -> VertexSet {
        VertexSet((0..n).filter(|&v| !self.contains(v)).collect())
    }

    /// Membership table of length `n`; `None` if a member is out of range.
    pub(crate) fn indicator(&self, n: usize) -> Option<Vec<bool>> {
        let mut ind = vec![false; n];
        for &v in &self.0 {
            *ind.get_mut(v)? = true;
        }
        Some(ind)
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_edge_count_matches_list() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(g.non_edge_count(), 10 - 3);
        let ne = g.non_edges();
        assert_eq!(ne.len(), 7);
        assert!(ne.iter().all(|&(u, v)| u < v && !g.has_edge(u, v)));
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::new(0).is_err());
    }

    #[test]
    fn text_format_roundtrip() {
        let g = Graph::cycle(6).unwrap();
        let text = g.to_text();
        assert!(text.starts_with("6 6\n0 1\n0 5\n"));
        assert_eq!(Graph::parse(&text).unwrap(), g);
    }

    #[test]
    fn parser_rejects_bad_input() {
        for bad in [
            "",
            "3 1\n1 1\n",
            "3 2\n0 1\n0 1\n",
            "3 1\n2 1\n",
            "3 2\n0 1\n",
            "3 1\n0 3\n",
            "3 1\n0 x\n",
            "0 0\n",
            "3 1\n\n0 1\n",
        ] {
            assert!(Graph::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn vertex_set_is_canonical() {
        let s = VertexSet::new([3, 1, 3, 0]);
        assert_eq!(s.as_slice(), &[0, 1, 3]);
        assert_eq!(s.complement(5).as_slice(), &[2, 4]);
        assert_eq!(VertexSet::from_mask(0b1011).as_slice(), &[0, 1, 3]);
    }
}
