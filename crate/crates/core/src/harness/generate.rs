//! Instance families with self-checked structural guarantees.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{self, connected_components, cut_size, edge_connectivity, ENUMERATION_LIMIT};
use crate::rng::{rng_from_seed, stream, tagged};

/// Edge structure inside each block of a block family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interior {
    Clique,
    /// A cycle (an edge or a single vertex for blocks of size 2 or 1).
    Cycle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    /// Disjoint blocks; two-cliques is the two-block case.
    Blocks {
        sizes: Vec<usize>,
        interior: Interior,
    },
    /// `K_s` tied to a k-connected circulant bulk by `k - 1` edges.
    PlantedWitness {
        n: usize,
        s: usize,
        k: usize,
    },
    CirculantKconn {
        n: usize,
        k: usize,
    },
    ErdosRenyi {
        n: usize,
        p: f64,
    },
    Edgeless {
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        InstanceSpec { family, seed }
    }

    pub fn two_cliques(a: usize, b: usize) -> Self {
        InstanceSpec::new(
            Family::Blocks {
                sizes: vec![a, b],
                interior: Interior::Clique,
            },
            0,
        )
    }

    /// Short stable label for CSV rows.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Blocks { sizes, interior } => {
                let kind = match interior {
                    Interior::Clique => "cliques",
                    Interior::Cycle => "cycles",
                };
                let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
                format!("{kind}[{}]", sizes.join("+"))
            }
            Family::PlantedWitness { n, s, k } => format!("planted[n={n};s={s};k={k}]"),
            Family::CirculantKconn { n, k } => format!("circulant[n={n};k={k}]"),
            Family::ErdosRenyi { n, p } => format!("gnp[n={n};p={p}]"),
            Family::Edgeless { n } => format!("edgeless[n={n}]"),
        }
    }
}

fn add_block(g: &mut Graph, base: usize, size: usize, interior: Interior) {
    match interior {
        Interior::Clique => {
            for u in base..base + size {
                for v in u + 1..base + size {
                    g.insert_unchecked(u, v);
                }
            }
        }
        Interior::Cycle => {
            for i in 1..size {
                g.insert_unchecked(base + i - 1, base + i);
            }
            if size >= 3 {
                g.insert_unchecked(base, base + size - 1);
            }
        }
    }
}

/// Circulant offsets giving edge connectivity `k` on `n` vertices.
fn circulant_edges(n: usize, k: usize) -> Result<Vec<(usize, usize)>> {
    if k == 0 || n < k + 1 {
        return Err(Error::domain(format!(
            "circulant needs 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    if k == 1 {
        return Ok((1..n).map(|i| (i - 1, i)).collect());
    }
    if k % 2 == 1 && n % 2 == 1 {
        return Err(Error::domain("odd k needs even n for the antipodal chords"));
    }
    let mut edges = Vec::new();
    for d in 1..=k / 2 {
        for i in 0..n {
            let j = (i + d) % n;
            edges.push((i.min(j), i.max(j)));
        }
    }
    if k % 2 == 1 {
        for i in 0..n / 2 {
            edges.push((i, i + n / 2));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

fn guarantee(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "generated graph violates its guarantee: {what}"
        )))
    }
}

pub fn generate(spec: &InstanceSpec) -> Result<Graph> {
    match &spec.family {
        Family::Blocks { sizes, interior } => {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Error::domain("block sizes must be positive"));
            }
            let n = sizes.iter().sum();
            let mut g = Graph::new(n)?;
            let mut base = 0;
            for &size in sizes {
                add_block(&mut g, base, size, *interior);
                base += size;
            }
            let mut got: Vec<usize> = connected_components(&g)
                .iter()
                .map(VertexSet::len)
                .collect();
            let mut want = sizes.clone();
            got.sort_unstable();
            want.sort_unstable();
            guarantee(got == want, "component sizes")?;
            Ok(g)
        }
        Family::PlantedWitness { n, s, k } => {
            let (n, s, k) = (*n, *s, *k);
            if s == 0 || k == 0 || s >= n {
                return Err(Error::domain("planted witness needs 1 <= s < n and k >= 1"));
            }
            let bulk = n - s;
            if k - 1 > bulk || k - 1 > s * bulk {
                return Err(Error::domain("not enough room for k - 1 bridge edges"));
            }
            let bulk_edges = circulant_edges(bulk, k)?;
            let mut g = Graph::new(n)?;
            add_block(&mut g, 0, s, Interior::Clique);
            for (u, v) in bulk_edges {
                g.insert_unchecked(s + u, s + v);
            }
            for j in 0..k - 1 {
                g.insert_unchecked(j % s, s + j);
            }
            let w = VertexSet::new(0..s);
            guarantee(cut_size(&g, &w)? == k - 1, "planted cut is k - 1")?;
            let bulk_graph = Graph::from_edges(bulk, circulant_edges(bulk, k)?)?;
            guarantee(
                oracle::is_k_connected(&bulk_graph, k),
                "bulk is k-connected",
            )?;
            if n <= ENUMERATION_LIMIT {
                guarantee(oracle::s_k_oracle(&g, k)? <= s, "s_k <= s")?;
            }
            Ok(g)
        }
        Family::CirculantKconn { n, k } => {
            let g = Graph::from_edges(*n, circulant_edges(*n, *k)?)?;
            guarantee(edge_connectivity(&g)? == *k, "edge connectivity equals k")?;
            Ok(g)
        }
        Family::ErdosRenyi { n, p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::domain("edge probability must lie in [0, 1]"));
            }
            let mut g = Graph::new(*n)?;
            let mut rng = rng_from_seed(tagged(spec.seed, stream::GENERATOR, 0));
            for u in 0..*n {
                for v in u + 1..*n {
                    if rng.random_bool(*p) {
                        g.insert_unchecked(u, v);
                    }
                }
            }
            Ok(g)
        }
        Family::Edgeless { n } => Graph::new(*n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cliques_components() {
        let g = generate(&InstanceSpec::two_cliques(3, 17)).unwrap();
        let sizes: Vec<usize> = connected_components(&g)
            .iter()
            .map(VertexSet::len)
            .collect();
        assert_eq!(sizes, vec![3, 17]);
        assert_eq!(g.edge_count(), 3 + 136);
    }

    #[test]
    fn circulant_connectivity() {
        for (n, k) in [(16, 4), (24, 3), (64, 4), (10, 1), (9, 2)] {
            let g = generate(&InstanceSpec::new(Family::CirculantKconn { n, k }, 0)).unwrap();
            assert_eq!(edge_connectivity(&g).unwrap(), k);
        }
        assert!(generate(&InstanceSpec::new(Family::CirculantKconn { n: 9, k: 3 }, 0)).is_err());
    }

    #[test]
    fn planted_witness_cut() {
        let g = generate(&InstanceSpec::new(
            Family::PlantedWitness { n: 20, s: 4, k: 3 },
            0,
        ))
        .unwrap();
        assert_eq!(cut_size(&g, &VertexSet::new(0..4)).unwrap(), 2);
        assert!(oracle::s_k_oracle(&g, 3).unwrap() <= 4);
        assert!(generate(&InstanceSpec::new(
            Family::PlantedWitness { n: 6, s: 4, k: 3 },
            0
        ))
        .is_err());
    }

    #[test]
    fn cycle_blocks() {
        let spec = InstanceSpec::new(
            Family::Blocks {
                sizes: vec![1, 2, 5],
                interior: Interior::Cycle,
            },
            0,
        );
        let g = generate(&spec).unwrap();
        assert_eq!(g.edge_count(), 1 + 5);
        assert_eq!(spec.label(), "cycles[1+2+5]");
    }

    #[test]
    fn gnp_is_seeded() {
        let spec = InstanceSpec::new(Family::ErdosRenyi { n: 30, p: 0.3 }, 4);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = InstanceSpec::new(Family::ErdosRenyi { n: 30, p: 0.3 }, 5);
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }
}
