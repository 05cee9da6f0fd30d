//! Experiment drivers. Each returns rows in a fixed, parameter-sorted order;
//! every stochastic quantity in a row is reproducible from the row's seed.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::generate::{generate, Family, InstanceSpec, Interior};
use crate::augment::{
    estimate_failure, estimate_failure_at_probability, estimate_union_failure, threshold_search,
};
use crate::conn_tester::run_conn_test;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::kconn::{cheap_tree_frequency, run_repetition};
use crate::oracle::hamming_additions_to_connected;
use crate::rng::{stream, tagged};
use crate::stats::{bernoulli_sigma, log_log_slope, wilson95};

/// One measured quantity. Columns are fixed; unused ones are left empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub experiment: &'static str,
    pub instance: String,
    pub n: usize,
    pub k: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<f64>,
    pub trials: Option<u64>,
    pub measure: &'static str,
    pub value: f64,
    pub sigma: Option<f64>,
    pub bound: Option<f64>,
    pub holds: Option<bool>,
    pub seed: u64,
}

impl ExperimentRow {
    fn new(
        experiment: &'static str,
        instance: String,
        n: usize,
        measure: &'static str,
        value: f64,
        seed: u64,
    ) -> Self {
        ExperimentRow {
            experiment,
            instance,
            n,
            k: None,
            s: None,
            t: None,
            trials: None,
            measure,
            value,
            sigma: None,
            bound: None,
            holds: None,
            seed,
        }
    }

    fn k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    fn s(mut self, s: usize) -> Self {
        self.s = Some(s);
        self
    }

    fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    fn trials(mut self, trials: u64, sigma: f64) -> Self {
        self.trials = Some(trials);
        self.sigma = Some(sigma);
        self
    }

    fn check(mut self, bound: f64, holds: bool) -> Self {
        self.bound = Some(bound);
        self.holds = Some(holds);
        self
    }
}

/// Writes rows as CSV with a header line.
pub fn write_rows<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ExperimentRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn sub_seed(seed: u64, index: usize) -> u64 {
    tagged(seed, stream::EXPERIMENT, index as u64)
}

fn blocks(sizes: Vec<usize>, interior: Interior) -> InstanceSpec {
    InstanceSpec::new(Family::Blocks { sizes, interior }, 0)
}

/// A small component next to a large one versus two halves. Both have Hamming
/// distance 1 to connectivity; sparse interiors keep `|Ē|` equal so only the
/// number of crossing non-edges differs.
pub fn experiment_g1_vs_g2(n: usize, trials: u64, seed: u64) -> Result<Vec<ExperimentRow>> {
    if n < 16 || n % 2 == 1 {
        return Err(Error::domain(format!(
            "n must be even and at least 16, got {n}"
        )));
    }
    let specs = [
        blocks(vec![3, n - 3], Interior::Cycle),
        blocks(vec![n / 2, n / 2], Interior::Cycle),
    ];
    let graphs: Vec<Graph> = specs.iter().map(generate).collect::<Result<_>>()?;
    let ln = (n as f64).ln();
    let cap = graphs[0].non_edge_count().min(graphs[1].non_edge_count()) as f64;
    let grid = [
        ln.ceil(),
        (4.0 * ln).ceil(),
        (n as f64 * ln / 8.0).ceil(),
        cap,
    ];
    let mut rows = Vec::new();
    let mut index = 0;
    for (spec, g) in specs.iter().zip(&graphs) {
        let h = hamming_additions_to_connected(g);
        rows.push(
            ExperimentRow::new("g1g2", spec.label(), n, "hamming_distance", h as f64, seed)
                .k(1)
                .check(1.0, h == 1),
        );
    }
    let mut at_mid = Vec::new();
    for (ti, &t) in grid.iter().enumerate() {
        for (spec, g) in specs.iter().zip(&graphs) {
            let sd = sub_seed(seed, index);
            index += 1;
            let st = estimate_failure(g, 1, t.min(g.non_edge_count() as f64), trials, sd)?;
            rows.push(
                ExperimentRow::new("g1g2", spec.label(), n, "failure_rate", st.failure_rate, sd)
                    .k(1)
                    .t(st.t)
                    .trials(trials, st.sigma()),
            );
            if ti == 1 {
                at_mid.push(st);
            }
        }
    }
    let (f1, f2) = (&at_mid[0], &at_mid[1]);
    let sigma = (f1.sigma().powi(2) + f2.sigma().powi(2)).sqrt();
    let gap = f1.failure_rate - f2.failure_rate;
    rows.push(
        ExperimentRow::new(
            "g1g2",
            format!("{} vs {}", specs[0].label(), specs[1].label()),
            n,
            "failure_gap",
            gap,
            seed,
        )
        .k(1)
        .t(grid[1])
        .trials(trials, sigma)
        .check(3.0 * sigma, gap > 3.0 * sigma),
    );
    Ok(rows)
}

/// Component size given either directly or as a fraction of `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SizeRule {
    Fixed(usize),
    Fraction(usize),
}

impl SizeRule {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            SizeRule::Fixed(s) => s,
            SizeRule::Fraction(d) => n / d,
        }
    }
}

impl FromStr for SizeRule {
    type Err = String;

    /// `"5"` or `"n/10"`.
    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        let parse = |x: &str| {
            x.parse::<usize>()
                .map_err(|e| format!("bad size '{text}': {e}"))
        };
        match text.strip_prefix("n/") {
            Some(d) => match parse(d)? {
                0 => Err("division by zero in size rule".into()),
                d => Ok(SizeRule::Fraction(d)),
            },
            None => parse(text).map(SizeRule::Fixed),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub s_list: Vec<SizeRule>,
    pub c: f64,
    pub threshold_trials: u64,
    pub bound_trials: u64,
    pub tight_trials: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            n_list: vec![50, 100, 200],
            s_list: vec![
                SizeRule::Fixed(2),
                SizeRule::Fraction(10),
                SizeRule::Fraction(2),
            ],
            c: 2.0,
            threshold_trials: 5000,
            bound_trials: 10000,
            tight_trials: 20000,
        }
    }
}

/// Two components with the smaller of size `s`, both cycles.
pub fn two_component_instance(n: usize, s: usize) -> Result<(InstanceSpec, Graph)> {
    if s == 0 || 2 * s > n {
        return Err(Error::domain(format!(
            "smaller component size {s} must lie in 1..={}",
            n / 2
        )));
    }
    let spec = blocks(vec![s, n - s], Interior::Cycle);
    let g = generate(&spec)?;
    Ok((spec, g))
}

/// Thresholds for disconnection probability `1/n`, their normalization by
/// `n ln n / s`, and the failure rates at the upper and tight probabilities.
pub fn experiment_threshold_scaling(cfg: &ScalingConfig, seed: u64) -> Result<Vec<ExperimentRow>> {
    if cfg.c <= 1.0 {
        return Err(Error::domain("c must exceed 1"));
    }
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    let mut index = 0;
    let mut next_seed = || {
        index += 1;
        sub_seed(seed, index - 1)
    };
    for &n in &cfg.n_list {
        let mut sizes: Vec<usize> = cfg.s_list.iter().map(|r| r.resolve(n)).collect();
        sizes.sort_unstable();
        sizes.dedup();
        for s in sizes {
            let (spec, g) = two_component_instance(n, s)?;
            let label = spec.label();
            let (nf, sf) = (n as f64, s as f64);
            let ln = nf.ln();
            let row = |measure, value, sd| {
                ExperimentRow::new("scaling", label.clone(), n, measure, value, sd)
                    .k(1)
                    .s(s)
            };

            let sd = next_seed();
            let th = threshold_search(&g, 1, 1.0 / nf, cfg.threshold_trials, sd)?;
            rows.push(row("threshold", th, sd).t(th).check(1.0, th >= 1.0));
            let ratio = th * sf / (nf * ln);
            ratios.push(ratio);
            rows.push(row("threshold_ratio", ratio, sd).t(th));

            let sd = next_seed();
            let p = 2.0 * (cfg.c + 2.0) * ln / (sf * nf);
            let st = estimate_failure_at_probability(&g, 1, p.min(1.0), cfg.bound_trials, sd)?;
            let bound = nf.powf(-cfg.c);
            let lower = wilson95(st.failures, st.trials).0;
            rows.push(
                row("failure_upper_p", st.failure_rate, sd)
                    .t(st.t)
                    .trials(st.trials, st.sigma())
                    .check(bound, lower <= bound),
            );

            let sd = next_seed();
            let p_tight = cfg.c * ln / (4.0 * sf * nf);
            let st =
                estimate_failure_at_probability(&g, 1, p_tight.min(1.0), cfg.tight_trials, sd)?;
            let bound = nf.powf(-cfg.c / 2.0);
            rows.push(
                row("failure_tight_p", st.failure_rate, sd)
                    .t(st.t)
                    .trials(st.trials, st.sigma())
                    .check(bound, st.failure_rate >= bound - 3.0 * st.sigma()),
            );
        }
    }
    if !ratios.is_empty() {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        let n_max = cfg.n_list.iter().copied().max().unwrap_or(0);
        rows.push(
            ExperimentRow::new(
                "scaling",
                "grid".into(),
                n_max,
                "ratio_spread",
                max / min,
                seed,
            )
            .k(1),
        );
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundsConfig {
    pub conn_n: usize,
    pub conn_s: Vec<usize>,
    pub kconn_n: usize,
    pub kconn_k: usize,
    pub kconn_s: Vec<usize>,
}

impl Default for RoundsConfig {
    fn default() -> Self {
        RoundsConfig {
            conn_n: 64,
            conn_s: vec![4, 8, 16, 32],
            kconn_n: 64,
            kconn_k: 4,
            kconn_s: vec![2, 4, 8],
        }
    }
}

pub const CONN_EXPONENT_BAND: (f64, f64) = (0.8, 1.2);
pub const KCONN_EXPONENT_BAND: (f64, f64) = (1.6, 2.4);

/// Rounds used by the connectivity tester on a cycle and by one repetition of
/// the k-connectivity tester on a circulant, with fitted log-log exponents.
pub fn experiment_round_counts(cfg: &RoundsConfig, seed: u64) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    let mut index = 0;

    let spec = blocks(vec![cfg.conn_n], Interior::Cycle);
    let g = generate(&spec)?;
    let mut points = Vec::new();
    for &s in &cfg.conn_s {
        let sd = sub_seed(seed, index);
        index += 1;
        let report = run_conn_test(&g, s, sd)?;
        points.push((s as f64, report.rounds_used as f64));
        rows.push(
            ExperimentRow::new(
                "rounds",
                spec.label(),
                cfg.conn_n,
                "conn_rounds",
                report.rounds_used as f64,
                sd,
            )
            .s(s),
        );
    }
    push_exponent(
        &mut rows,
        "conn_exponent",
        spec.label(),
        cfg.conn_n,
        None,
        &points,
        CONN_EXPONENT_BAND,
        seed,
    );

    let spec = InstanceSpec::new(
        Family::CirculantKconn {
            n: cfg.kconn_n,
            k: cfg.kconn_k,
        },
        0,
    );
    let g = generate(&spec)?;
    let mut points = Vec::new();
    for &s in &cfg.kconn_s {
        let sd = sub_seed(seed, index);
        index += 1;
        let out = run_repetition(&g, s, cfg.kconn_k, sd, 0)?;
        let rounds = out.report.rounds_used;
        points.push((s as f64, rounds as f64));
        rows.push(
            ExperimentRow::new(
                "rounds",
                spec.label(),
                cfg.kconn_n,
                "kconn_rep_rounds",
                rounds as f64,
                sd,
            )
            .k(cfg.kconn_k)
            .s(s),
        );
    }
    push_exponent(
        &mut rows,
        "kconn_exponent",
        spec.label(),
        cfg.kconn_n,
        Some(cfg.kconn_k),
        &points,
        KCONN_EXPONENT_BAND,
        seed,
    );
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn push_exponent(
    rows: &mut Vec<ExperimentRow>,
    measure: &'static str,
    instance: String,
    n: usize,
    k: Option<usize>,
    points: &[(f64, f64)],
    band: (f64, f64),
    seed: u64,
) {
    if points.len() < 2 {
        return;
    }
    let slope = log_log_slope(points);
    let mut row = ExperimentRow::new("rounds", instance, n, measure, slope, seed)
        .check(band.1, slope >= band.0 && slope <= band.1);
    row.k = k;
    rows.push(row);
}

/// Failure target used to tune `t` in the amplification experiment.
pub const AMPLIFICATION_TARGET: f64 = 0.2;

/// Two equal cliques with `t` chosen so that `Pr[Add(G, t) disconnected]`
/// equals [`AMPLIFICATION_TARGET`]: every non-edge crosses, so that probability
/// is `(1 - t/|Ē|)^{|Ē|}`.
pub fn amplification_instance(n: usize) -> Result<(InstanceSpec, Graph, f64)> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::domain(format!(
            "n must be even and at least 4, got {n}"
        )));
    }
    let spec = blocks(vec![n / 2, n / 2], Interior::Clique);
    let g = generate(&spec)?;
    let m = g.non_edge_count() as f64;
    let t = m * (1.0 - AMPLIFICATION_TARGET.powf(1.0 / m));
    Ok((spec, g, t))
}

/// Union of two draws at `t` against one draw at `t` and one at `2t`.
pub fn experiment_union_amplification(
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ExperimentRow>> {
    let (spec, g, t) = amplification_instance(n)?;
    let label = spec.label();
    let row = |measure, value, sd, t: f64| {
        ExperimentRow::new("amplification", label.clone(), n, measure, value, sd)
            .k(1)
            .t(t)
    };

    let (s0, s1, s2) = (sub_seed(seed, 0), sub_seed(seed, 1), sub_seed(seed, 2));
    let single = estimate_failure(&g, 1, t, trials, s0)?;
    let union = estimate_union_failure(&g, 1, t, 2, trials, s1)?;
    let double = estimate_failure(&g, 1, 2.0 * t, trials, s2)?;

    let f = single.failure_rate;
    let union_sigma = (union.sigma().powi(2) + (2.0 * f * single.sigma()).powi(2)).sqrt();
    let double_sigma = (double.sigma().powi(2) + union.sigma().powi(2)).sqrt();
    Ok(vec![
        row("failure_t", f, s0, t).trials(trials, single.sigma()),
        row("failure_union_m2", union.failure_rate, s1, t)
            .trials(trials, union_sigma)
            .check(f * f, union.failure_rate <= f * f + 3.0 * union_sigma),
        row("failure_2t", double.failure_rate, s2, 2.0 * t)
            .trials(trials, double_sigma)
            .check(
                union.failure_rate,
                double.failure_rate <= union.failure_rate + 3.0 * double_sigma,
            ),
    ])
}

/// Lower bound on the cheap-tree frequency for a set of size `s` at level `k`.
pub fn cheap_tree_bound(s: usize, k: usize) -> f64 {
    0.25 * (s as f64).powf(-2.0 * (1.0 - 1.0 / k as f64))
}

/// Cheap-tree event frequency on a planted `K_4` with `k = 3` and on the
/// two-vertex prefix of a three-vertex path, whose frequency is exactly 1/2.
pub fn experiment_cheap_tree(trials: u64, seed: u64) -> Result<Vec<ExperimentRow>> {
    let (n, s, k) = (20, 4, 3);
    let spec = InstanceSpec::new(Family::PlantedWitness { n, s, k }, 0);
    let g = generate(&spec)?;
    let sd = sub_seed(seed, 0);
    let f = cheap_tree_frequency(&g, &VertexSet::new(0..s), k, trials, sd)?;
    let bound = cheap_tree_bound(s, k);
    let planted = ExperimentRow::new("cheap-tree", spec.label(), n, "frequency", f, sd)
        .k(k)
        .s(s)
        .trials(trials, bernoulli_sigma(f, trials))
        .check(bound, f >= bound);

    let path = Graph::path(3)?;
    let sd = sub_seed(seed, 1);
    let f = cheap_tree_frequency(&path, &VertexSet::new([0, 1]), 2, trials, sd)?;
    let sigma = bernoulli_sigma(0.5, trials);
    let two_path = ExperimentRow::new("cheap-tree", "path[3]".into(), 3, "frequency", f, sd)
        .k(2)
        .s(2)
        .trials(trials, sigma)
        .check(0.5, (f - 0.5).abs() <= 3.0 * sigma);
    Ok(vec![planted, two_path])
}
