use proptest::prelude::*;
use stochdist::oracle::{
    connected_components, cut_size, edge_connectivity, edge_connectivity_exhaustive,
    hamming_additions_to_connected, induces_connected, is_connected, is_k_connected,
    minimal_small_cut_sets, s_k_oracle,
};
use stochdist::{Graph, VertexSet};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = Graph::new(n).unwrap();
            let mut it = bits.into_iter();
            for u in 0..n {
                for v in u + 1..n {
                    if it.next().unwrap() {
                        g.add_edge(u, v).unwrap();
                    }
                }
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_format_roundtrips(g in graph(12)) {
        let text = g.to_text();
        prop_assert!(text.ends_with('\n'));
        prop_assert_eq!(Graph::parse(&text).unwrap(), g);
    }

    #[test]
    fn stoer_wagner_matches_exhaustive_cuts(g in graph(10)) {
        prop_assert_eq!(edge_connectivity(&g).unwrap(), edge_connectivity_exhaustive(&g).unwrap());
    }

    #[test]
    fn s_k_is_n_exactly_when_k_connected(g in graph(9), k in 1usize..4) {
        let n = g.n();
        prop_assert_eq!(s_k_oracle(&g, k).unwrap() == n, is_k_connected(&g, k));
        prop_assert_eq!(is_k_connected(&g, 1), is_connected(&g));
    }

    #[test]
    fn s_k_is_monotone_in_k_and_under_additions(g in graph(9), k in 1usize..4, pick in any::<prop::sample::Index>()) {
        let s = s_k_oracle(&g, k).unwrap();
        prop_assert!(s_k_oracle(&g, k + 1).unwrap() <= s);
        let missing = g.non_edges();
        if !missing.is_empty() {
            let (u, v) = missing[pick.index(missing.len())];
            let mut h = g.clone();
            h.add_edge(u, v).unwrap();
            prop_assert!(s_k_oracle(&h, k).unwrap() >= s);
        }
    }

    #[test]
    fn minimal_small_cut_sets_are_connected_and_small(g in graph(9), k in 1usize..4) {
        let s = s_k_oracle(&g, k).unwrap();
        for rep in minimal_small_cut_sets(&g, k).unwrap() {
            prop_assert_eq!(rep.set.len(), s);
            prop_assert!(rep.cut_size < k);
            prop_assert_eq!(cut_size(&g, &rep.set).unwrap(), rep.cut_size);
            prop_assert!(induces_connected(&g, &rep.set));
        }
    }

    #[test]
    fn cut_is_symmetric_under_complement(g in graph(10), mask in 1u64..) {
        let n = g.n();
        let side = mask % ((1u64 << n) - 1);
        prop_assume!(side != 0);
        let u = VertexSet::from_mask(side);
        let c = cut_size(&g, &u).unwrap();
        prop_assert_eq!(c, cut_size(&g, &u.complement(n)).unwrap());
        prop_assert!(c >= edge_connectivity(&g).unwrap());
    }

    #[test]
    fn hamming_distance_counts_components(g in graph(12)) {
        prop_assert_eq!(hamming_additions_to_connected(&g), connected_components(&g).len() - 1);
    }

    #[test]
    fn components_partition_the_vertices(g in graph(12)) {
        let parts = connected_components(&g);
        let mut all: Vec<usize> = parts.iter().flat_map(|p| p.iter()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..g.n()).collect::<Vec<_>>());
        for p in &parts {
            prop_assert!(induces_connected(&g, p));
            if p.len() < g.n() {
                prop_assert_eq!(cut_size(&g, p).unwrap(), 0);
            }
        }
    }
}

#[test]
fn complete_and_cycle_connectivity() {
    for n in 2..9 {
        assert_eq!(
            edge_connectivity(&Graph::complete(n).unwrap()).unwrap(),
            n - 1
        );
        assert_eq!(s_k_oracle(&Graph::complete(n).unwrap(), n - 1).unwrap(), n);
    }
    for n in 3..9 {
        let c = Graph::cycle(n).unwrap();
        assert_eq!(edge_connectivity(&c).unwrap(), 2);
        assert_eq!(s_k_oracle(&c, 3).unwrap(), 1);
    }
}

#[test]
fn enumeration_limit_is_a_capacity_error() {
    let g = Graph::cycle(21).unwrap();
    assert!(matches!(
        s_k_oracle(&g, 2),
        Err(stochdist::Error::Capacity { .. })
    ));
}
