use std::collections::BTreeSet;

use rayon::prelude::*;
use stochdist::congest::{assign_ids, tester_verdict, NodeId, TesterVerdict};
use stochdist::conn_tester::conn_semantic_oracle;
use stochdist::harness::{generate, nonisomorphic_graphs, Family, InstanceSpec, Interior};
use stochdist::kconn::{
    cheap_tree_event, phase, rep_rounds, rep_seed, run_kconn_test, run_repetition,
    run_repetition_observed, sequential_witness_search, witnesses, EdgeWeighting, KconnProgram,
    Membership, Phase, RepetitionSchedule,
};
use stochdist::oracle::{cut_size, is_k_connected};
use stochdist::{Graph, VertexSet};

fn planted(n: usize, s: usize, k: usize) -> Graph {
    generate(&InstanceSpec::new(Family::PlantedWitness { n, s, k }, 0)).unwrap()
}

fn circulant(n: usize, k: usize) -> Graph {
    generate(&InstanceSpec::new(Family::CirculantKconn { n, k }, 0)).unwrap()
}

/// Nodes of each cluster root at the end of a run.
fn final_sizes(programs: &[KconnProgram]) -> std::collections::BTreeMap<NodeId, usize> {
    let mut out = std::collections::BTreeMap::new();
    for p in programs {
        if let Membership::Member { root, .. } = p.membership() {
            *out.entry(root).or_insert(0) += 1;
        }
    }
    out
}

#[test]
fn never_rejects_small_k_connected_graphs() {
    for n in 2..=7 {
        let corpus = nonisomorphic_graphs(n);
        corpus.par_iter().enumerate().for_each(|(gi, g)| {
            for k in 1..=3.min(n - 1) {
                if !is_k_connected(g, k) {
                    continue;
                }
                for s in 1..n {
                    for rep in 0..2 {
                        let out = run_repetition(g, s, k, gi as u64, rep).unwrap();
                        assert_eq!(
                            tester_verdict(&out.report).unwrap(),
                            TesterVerdict::AllAccept,
                            "n {n} graph {gi} k {k} s {s}"
                        );
                    }
                }
            }
        });
    }
}

#[test]
fn circulants_accept() {
    for (n, k, s) in [(64, 4, 4), (24, 3, 4), (16, 4, 6), (30, 2, 8)] {
        let g = circulant(n, k);
        for seed in 0..3 {
            let run = run_kconn_test(&g, s, k, seed, Some(6)).unwrap();
            assert_eq!(run.verdict, TesterVerdict::AllAccept);
            assert_eq!(run.reps_run, 6);
            assert!(run.max_message_bits <= run.budget_bits);
        }
    }
}

#[test]
fn planted_witness_is_detected_and_reverified() {
    let g = planted(20, 4, 3);
    let mut detected = 0;
    for seed in 0..10 {
        let run = run_kconn_test(&g, 4, 3, seed, None).unwrap();
        if run.verdict == TesterVerdict::SomeReject {
            detected += 1;
            let w = run.witness.unwrap();
            assert!(w.cut_size < 3 && w.set.len() <= 4);
            assert_eq!(cut_size(&g, &w.set).unwrap(), w.cut_size);
        }
    }
    assert!(detected >= 8, "detected {detected}/10");
}

#[test]
fn k_one_finds_the_small_component() {
    let g = generate(&InstanceSpec::new(
        Family::Blocks {
            sizes: vec![3, 12],
            interior: Interior::Cycle,
        },
        0,
    ))
    .unwrap();
    assert_eq!(conn_semantic_oracle(&g, 4), TesterVerdict::SomeReject);
    let run = run_kconn_test(&g, 4, 1, 2, None).unwrap();
    assert_eq!(run.verdict, TesterVerdict::SomeReject);
    assert_eq!(run.witness.unwrap().set, VertexSet::new(0..3));
}

#[test]
fn schedule_and_round_counts() {
    assert_eq!(RepetitionSchedule::new(20, 1, 3).reps, 24);
    assert!(RepetitionSchedule::new(20, 4, 3).reps > 100);
    let g = circulant(32, 2);
    for s in [1, 2, 4, 8] {
        let out = run_repetition(&g, s, 2, 1, 0).unwrap();
        assert_eq!(out.report.rounds_used, rep_rounds(s));
    }
}

#[test]
fn distributed_run_matches_sequential_process_for_surviving_clusters() {
    let graphs = vec![
        (planted(20, 4, 3), 4, 3),
        (planted(18, 5, 2), 5, 2),
        (
            generate(&InstanceSpec::new(Family::ErdosRenyi { n: 25, p: 0.15 }, 3)).unwrap(),
            5,
            3,
        ),
        (
            generate(&InstanceSpec::new(Family::ErdosRenyi { n: 30, p: 0.3 }, 8)).unwrap(),
            6,
            4,
        ),
    ];
    let mut compared = 0;
    for (g, s, k) in &graphs {
        for rep in 0..20 {
            let master = 77;
            let out = run_repetition(g, *s, *k, master, rep).unwrap();
            let ids = assign_ids(g.n(), rep_seed(master, rep));
            let weighting = EdgeWeighting::new(master, rep as u64);
            let sizes = final_sizes(&out.programs);
            let found = witnesses(g, &out, *s, *k, rep).unwrap();
            for u in 0..g.n() {
                let root = ids[u];
                let root_witness = found.iter().find(|w| {
                    matches!(w.source, stochdist::oracle::WitnessSource::DistributedRun { root: r, .. } if r == root.0)
                });
                let survived = root_witness.is_some() || sizes.get(&root).copied() == Some(*s);
                if !survived {
                    continue;
                }
                compared += 1;
                let seq = sequential_witness_search(g, u, *s, *k, weighting.by_vertex(&ids));
                assert_eq!(
                    seq.map(|w| w.set),
                    root_witness.map(|w| w.set.clone()),
                    "vertex {u} rep {rep}"
                );
            }
        }
    }
    assert!(compared > 50, "compared {compared}");
}

#[test]
fn an_in_witness_cluster_survives_every_window_under_the_cheap_tree_event() {
    let (n, s, k) = (20, 4, 3);
    let g = planted(n, s, k);
    let w = VertexSet::new(0..s);
    let master = 5;
    let mut checked = 0;
    for rep in 0..400 {
        let ids = assign_ids(n, rep_seed(master, rep));
        let weighting = EdgeWeighting::new(master, rep as u64);
        if !cheap_tree_event(&g, &w, weighting.by_vertex(&ids)) {
            continue;
        }
        checked += 1;
        let in_w: BTreeSet<NodeId> = w.iter().map(|v| ids[v]).collect();
        let mut observer = |round: usize, programs: &[KconnProgram], _ids: &[NodeId]| {
            if let Phase::Window { i, o } = phase(round, s) {
                if o != 2 * i {
                    return;
                }
                let rejected = programs.iter().any(|p| p.rejected_roots().next().is_some());
                let alive_inside = programs.iter().any(|p| {
                    matches!(p.membership(), Membership::Member { root, .. } if in_w.contains(&root))
                });
                assert!(
                    rejected || alive_inside,
                    "rep {rep} window {i}: no in-witness cluster alive"
                );
            }
        };
        let out = run_repetition_observed(&g, s, k, master, rep, &mut observer).unwrap();
        assert_eq!(
            tester_verdict(&out.report).unwrap(),
            TesterVerdict::SomeReject,
            "rep {rep}"
        );
    }
    assert!(
        checked >= 5,
        "only {checked} weightings satisfied the event"
    );
}

#[test]
fn reruns_reproduce_transcripts() {
    let g = planted(20, 4, 3);
    let a = run_repetition(&g, 4, 3, 11, 3).unwrap().report;
    let b = run_repetition(&g, 4, 3, 11, 3).unwrap().report;
    assert_eq!(a, b);
}

#[test]
fn parameter_validation() {
    let g = circulant(10, 2);
    assert!(run_kconn_test(&g, 0, 2, 1, None).is_err());
    assert!(run_kconn_test(&g, 10, 2, 1, None).is_err());
    assert!(run_kconn_test(&g, 3, 0, 1, None).is_err());
    assert!(run_kconn_test(&g, 3, 10, 1, None).is_err());
}
