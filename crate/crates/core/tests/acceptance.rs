//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use stochdist::congest::{default_budget_bits, tester_verdict, TesterVerdict};
use stochdist::conn_tester::{conn_semantic_oracle, max_rounds, run_conn_test};
use stochdist::harness::{
    experiment_cheap_tree, experiment_g1_vs_g2, experiment_round_counts,
    experiment_threshold_scaling, experiment_union_amplification, generate, nonisomorphic_graphs,
    rows_to_csv, ExperimentRow, Family, InstanceSpec, RoundsConfig, ScalingConfig,
};
use stochdist::kconn::{run_kconn_test, run_repetition};
use stochdist::oracle::{
    cut_size, induces_connected, is_k_connected, minimal_small_cut_sets, s_k_oracle,
};
use stochdist::Graph;

const CORPUS_MAX_N: usize = 7;
const K_VALUES: [usize; 3] = [1, 2, 3];
const ORACLE_BUDGET: Duration = Duration::from_secs(120);

const SCALING_BUDGET: Duration = Duration::from_secs(300);

const CONN_PAIRS: usize = 500;
const CONN_MAX_N: usize = 40;

const KCONN_SEEDS: u64 = 60;
const KCONN_MIN_REJECT: f64 = 2.0 / 3.0;
const KCONN_BUDGET: Duration = Duration::from_secs(900);
const CIRCULANTS: [(usize, usize, usize); 3] = [(64, 4, 4), (24, 3, 4), (16, 2, 5)];

const SIGMAS: f64 = 3.0;
const MASTER_SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, elapsed: Duration, out: &Outcome) -> bool {
    let tag = if out.pass { "PASS" } else { "FAIL" };
    println!(
        "{tag} [{id}] {name}: {} ({:.1}s)",
        out.detail,
        elapsed.as_secs_f64()
    );
    out.pass
}

fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn oracle_coherence() -> Outcome {
    let violations: usize = (1..=CORPUS_MAX_N)
        .into_par_iter()
        .map(|n| {
            let mut bad = 0;
            for g in nonisomorphic_graphs(n) {
                let s: Vec<usize> = K_VALUES
                    .iter()
                    .map(|&k| s_k_oracle(&g, k).unwrap())
                    .collect();
                for (i, &k) in K_VALUES.iter().enumerate() {
                    bad += usize::from((s[i] == n) != is_k_connected(&g, k));
                    if i > 0 {
                        bad += usize::from(s[i] > s[i - 1]);
                    }
                    for rep in minimal_small_cut_sets(&g, k).unwrap() {
                        bad += usize::from(!induces_connected(&g, &rep.set));
                    }
                    for (u, v) in g.non_edges() {
                        let mut h = g.clone();
                        h.add_edge(u, v).unwrap();
                        bad += usize::from(s_k_oracle(&h, k).unwrap() < s[i]);
                    }
                }
            }
            bad
        })
        .sum();
    Outcome {
        pass: violations == 0,
        detail: format!(
            "{violations} violations on all graphs with n <= {CORPUS_MAX_N}, k in {K_VALUES:?}"
        ),
    }
}

fn rows_with<'a>(rows: &'a [ExperimentRow], measure: &str) -> Vec<&'a ExperimentRow> {
    rows.iter().filter(|r| r.measure == measure).collect()
}

fn all_hold(rows: &[&ExperimentRow]) -> bool {
    !rows.is_empty() && rows.iter().all(|r| r.holds == Some(true))
}

fn upper_bound(rows: &[ExperimentRow], elapsed: Duration) -> Outcome {
    let upper = rows_with(rows, "failure_upper_p");
    let worst = upper.iter().map(|r| r.value).fold(0.0, f64::max);
    Outcome {
        pass: all_hold(&upper) && upper.len() == 9 && elapsed < SCALING_BUDGET,
        detail: format!(
            "{} instances, max disconnection rate {worst} (bound n^-2 with Wilson slack)",
            upper.len()
        ),
    }
}

fn tight_bound(rows: &[ExperimentRow]) -> Outcome {
    let tight = rows_with(rows, "failure_tight_p");
    let margin = tight
        .iter()
        .map(|r| (r.value - r.bound.unwrap()) / r.sigma.unwrap().max(1e-12))
        .fold(f64::INFINITY, f64::min);
    Outcome {
        pass: all_hold(&tight) && tight.len() == 9,
        detail: format!(
            "{} instances, smallest margin over n^-c/2 is {margin:.1} sigma",
            tight.len()
        ),
    }
}

fn mixed_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut g = Graph::new(n).unwrap();
    let mut start = 0;
    while start < n {
        let len = rng.random_range(1..=(n - start));
        let p = [0.05, 0.2, 0.6][rng.random_range(0..3)];
        for u in start..start + len {
            if u + 1 < start + len && rng.random_bool(0.7) {
                g.add_edge(u, u + 1).unwrap();
            }
            for v in u + 1..start + len {
                if rng.random_bool(p) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        start += len;
    }
    g
}

fn conn_tester() -> Outcome {
    let results: Vec<(bool, bool, bool, TesterVerdict)> = (0..CONN_PAIRS as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED ^ i);
            let n = rng.random_range(1..=CONN_MAX_N);
            let mut g = mixed_graph(&mut rng, n);
            if i % 2 == 0 {
                for u in 1..n {
                    if !g.has_edge(u - 1, u) {
                        g.add_edge(u - 1, u).unwrap();
                    }
                }
            }
            let s = rng.random_range(1..=n);
            let report = run_conn_test(&g, s, rng.random()).unwrap();
            let want = conn_semantic_oracle(&g, s);
            let got = tester_verdict(&report).unwrap();
            (
                got == want,
                report.rounds_used <= max_rounds(s),
                report.max_message_bits <= default_budget_bits(n),
                want,
            )
        })
        .collect();
    let mismatches = results.iter().filter(|r| !r.0).count();
    let slow = results.iter().filter(|r| !r.1).count();
    let wide = results.iter().filter(|r| !r.2).count();
    let rejects = results
        .iter()
        .filter(|r| r.3 == TesterVerdict::SomeReject)
        .count();
    Outcome {
        pass: mismatches == 0 && slow == 0 && wide == 0,
        detail: format!(
            "{mismatches} mismatches, {slow} runs over 4s+8 rounds, {wide} over the bit budget; {rejects}/{CONN_PAIRS} pairs should reject"
        ),
    }
}

fn kconn_tester() -> Outcome {
    let (n, s, k) = (20, 4, 3);
    let planted = generate(&InstanceSpec::new(Family::PlantedWitness { n, s, k }, 0)).unwrap();
    let planted_runs: Vec<_> = (0..KCONN_SEEDS)
        .into_par_iter()
        .map(|i| run_kconn_test(&planted, s, k, MASTER_SEED + i, None))
        .collect();
    let mut bad_witness = 0;
    let mut errors = 0;
    let mut rejects = 0;
    for run in &planted_runs {
        match run {
            Ok(r) if r.verdict == TesterVerdict::SomeReject => {
                rejects += 1;
                let w = r.witness.as_ref().unwrap();
                let ok = w.set.len() <= s
                    && w.cut_size < k
                    && cut_size(&planted, &w.set).unwrap() == w.cut_size;
                bad_witness += usize::from(!ok);
            }
            Ok(_) => {}
            Err(_) => errors += 1,
        }
    }
    let mut circulant_rejects = 0;
    for &(cn, ck, cs) in &CIRCULANTS {
        let g = generate(&InstanceSpec::new(
            Family::CirculantKconn { n: cn, k: ck },
            0,
        ))
        .unwrap();
        let runs: Vec<_> = (0..KCONN_SEEDS)
            .into_par_iter()
            .map(|i| run_kconn_test(&g, cs, ck, MASTER_SEED ^ (i << 8), None))
            .collect();
        for run in runs {
            match run {
                Ok(r) if r.verdict == TesterVerdict::AllAccept => {}
                Ok(_) => circulant_rejects += 1,
                Err(_) => errors += 1,
            }
        }
    }
    let rate = rejects as f64 / KCONN_SEEDS as f64;
    Outcome {
        pass: rate >= KCONN_MIN_REJECT && circulant_rejects == 0 && bad_witness == 0 && errors == 0,
        detail: format!(
            "planted rejects {rejects}/{KCONN_SEEDS}; circulant rejects {circulant_rejects}/{}; {bad_witness} bad witnesses; {errors} errors",
            KCONN_SEEDS as usize * CIRCULANTS.len()
        ),
    }
}

fn cheap_tree(rows: &[ExperimentRow]) -> Outcome {
    let f = rows_with(rows, "frequency");
    Outcome {
        pass: all_hold(&f) && f.len() == 2,
        detail: format!(
            "planted K4 frequency {:.4} (bound {:.4}); two-path frequency {:.4} (1/2 within 3 sigma = {:.4})",
            f[0].value,
            f[0].bound.unwrap(),
            f[1].value,
            SIGMAS * f[1].sigma.unwrap()
        ),
    }
}

fn amplification(rows: &[ExperimentRow]) -> Outcome {
    let single = rows_with(rows, "failure_t")[0];
    let checks = [
        rows_with(rows, "failure_union_m2")[0],
        rows_with(rows, "failure_2t")[0],
    ];
    let tuned = (single.value - 0.2).abs() <= SIGMAS * single.sigma.unwrap();
    Outcome {
        pass: all_hold(&checks) && tuned,
        detail: format!(
            "failure(t) {:.4}, union m=2 {:.4} vs failure(t)^2 {:.4}, failure(2t) {:.4}",
            single.value,
            checks[0].value,
            checks[0].bound.unwrap(),
            checks[1].value
        ),
    }
}

fn determinism(first: &[String], second: &[String]) -> Outcome {
    let csv_same = first == second;
    let mut hash_diffs = 0;
    let mut runs = 0;
    for (i, spec) in [
        InstanceSpec::new(Family::PlantedWitness { n: 20, s: 4, k: 3 }, 0),
        InstanceSpec::new(Family::ErdosRenyi { n: 40, p: 0.1 }, 7),
        InstanceSpec::two_cliques(5, 30),
    ]
    .iter()
    .enumerate()
    {
        let g = generate(spec).unwrap();
        for seed in 0..5u64 {
            let seed = seed + 100 * i as u64;
            let a = run_conn_test(&g, 6, seed).unwrap();
            let b = run_conn_test(&g, 6, seed).unwrap();
            let c = run_repetition(&g, 4, 2, seed, 1).unwrap().report;
            let d = run_repetition(&g, 4, 2, seed, 1).unwrap().report;
            hash_diffs += usize::from(a.transcript_hash != b.transcript_hash || a != b);
            hash_diffs += usize::from(c.transcript_hash != d.transcript_hash || c != d);
            runs += 2;
        }
    }
    Outcome {
        pass: csv_same && hash_diffs == 0,
        detail: format!(
            "{hash_diffs}/{runs} reruns changed a transcript; experiment CSV bytes {}",
            if csv_same { "identical" } else { "differ" }
        ),
    }
}

fn round_scaling(rows: &[ExperimentRow]) -> Outcome {
    let conn = rows_with(rows, "conn_exponent");
    let kconn = rows_with(rows, "kconn_exponent");
    Outcome {
        pass: all_hold(&conn) && all_hold(&kconn),
        detail: format!(
            "conn exponent {:.3} in [0.8, 1.2]; kconn per-repetition exponent {:.3} in [1.6, 2.4]",
            conn[0].value, kconn[0].value
        ),
    }
}

type Experiments = (Vec<Vec<ExperimentRow>>, Duration);

fn run_experiments() -> Experiments {
    let start = Instant::now();
    let scaling_start = Instant::now();
    let scaling = experiment_threshold_scaling(&ScalingConfig::default(), MASTER_SEED).unwrap();
    let scaling_time = scaling_start.elapsed();
    let rows = vec![
        experiment_g1_vs_g2(100, 5000, MASTER_SEED).unwrap(),
        scaling,
        experiment_round_counts(&RoundsConfig::default(), MASTER_SEED).unwrap(),
        experiment_union_amplification(16, 20000, MASTER_SEED).unwrap(),
        experiment_cheap_tree(20000, MASTER_SEED).unwrap(),
    ];
    eprintln!("experiments took {:.1}s", start.elapsed().as_secs_f64());
    (rows, scaling_time)
}

fn main() {
    let mut passed = Vec::new();

    let (out, t) = timed(oracle_coherence);
    let out = Outcome {
        pass: out.pass && t < ORACLE_BUDGET,
        ..out
    };
    passed.push(report(1, "oracle coherence", t, &out));

    let ((first, scaling_time), t_exp) = {
        let start = Instant::now();
        let r = run_experiments();
        (r, start.elapsed())
    };
    let (second, _) = run_experiments();
    let csv = |rows: &[Vec<ExperimentRow>]| {
        rows.iter()
            .map(|r| rows_to_csv(r).unwrap())
            .collect::<Vec<_>>()
    };

    passed.push(report(
        2,
        "upper disconnection bound",
        scaling_time,
        &upper_bound(&first[1], scaling_time),
    ));
    passed.push(report(
        3,
        "tightness of the bound",
        scaling_time,
        &tight_bound(&first[1]),
    ));

    let (out, t) = timed(conn_tester);
    passed.push(report(4, "connectivity tester", t, &out));

    let (out, t) = timed(kconn_tester);
    let out = Outcome {
        pass: out.pass && t < KCONN_BUDGET,
        ..out
    };
    passed.push(report(5, "k-connectivity tester", t, &out));

    passed.push(report(
        6,
        "cheap spanning tree frequency",
        t_exp,
        &cheap_tree(&first[4]),
    ));
    passed.push(report(
        7,
        "repeated union amplification",
        t_exp,
        &amplification(&first[3]),
    ));

    let (out, t) = timed(|| determinism(&csv(&first), &csv(&second)));
    passed.push(report(8, "determinism", t, &out));

    passed.push(report(9, "round scaling", t_exp, &round_scaling(&first[2])));

    let g1g2 = &first[0];
    let extra = rows_with(g1g2, "failure_gap");
    println!(
        "info: g1-vs-g2 failure gap {:.4} at t = {} ({})",
        extra[0].value,
        extra[0].t.unwrap(),
        if extra[0].holds == Some(true) {
            "separated"
        } else {
            "not separated"
        }
    );

    let failed = passed.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {}/{} criteria passed",
        passed.len() - failed,
        passed.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
