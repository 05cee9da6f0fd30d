//! Random edge addition `Add(G, t)` and the Monte-Carlo estimators built on it.
//!
//! Every non-edge of `G` is added independently with probability `t / |Ē|`.
//! Sampling skips over the non-edge list with geometric gaps, so the cost of a
//! draw is proportional to the number of added edges rather than to `|Ē|`.

use petgraph::unionfind::UnionFind;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::{self, connected_components, edge_connectivity, is_k_connected};
use crate::rng::{rng_from_seed, stream, tagged};
use crate::stats::wilson_upper95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AugmentParams {
    /// Expected number of added edges.
    pub t: f64,
    pub seed: u64,
}

impl AugmentParams {
    pub fn new(t: f64, seed: u64) -> Self {
        AugmentParams { t, seed }
    }

    /// `t / |Ē|` after validating `0 <= t <= |Ē|`.
    pub fn per_edge_prob(&self, g: &Graph) -> Result<f64> {
        per_edge_prob(g.non_edge_count(), self.t)
    }
}

fn per_edge_prob(non_edges: usize, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!(
            "t must be a finite value >= 0, got {t}"
        )));
    }
    if t > non_edges as f64 {
        return Err(Error::domain(format!(
            "t = {t} exceeds the {non_edges} available non-edges"
        )));
    }
    if non_edges == 0 {
        return Ok(0.0);
    }
    Ok((t / non_edges as f64).min(1.0))
}

/// Indices into a list of `len` items, each kept independently with probability `p`.
fn bernoulli_indices(len: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if p <= 0.0 || len == 0 {
        return Vec::new();
    }
    if p >= 1.0 {
        return (0..len).collect();
    }
    let gap = Geometric::new(p).expect("0 < p < 1");
    let mut out = Vec::new();
    let mut idx: u64 = 0;
    loop {
        idx = idx.saturating_add(gap.sample(rng));
        if idx >= len as u64 {
            return out;
        }
        out.push(idx as usize);
        idx += 1;
    }
}

fn sample_additions(non_edges: &[(usize, usize)], p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng_from_seed(seed);
    bernoulli_indices(non_edges.len(), p, &mut rng)
        .into_iter()
        .map(|i| non_edges[i])
        .collect()
}

/// One draw of `Add(G, t)`.
pub fn random_addition(g: &Graph, params: AugmentParams) -> Result<Graph> {
    let p = params.per_edge_prob(g)?;
    let non_edges = g.non_edges();
    let mut out = g.clone();
    for (u, v) in sample_additions(&non_edges, p, params.seed) {
        out.insert_unchecked(u, v);
    }
    Ok(out)
}

/// Adds every current non-edge of `g` with probability `p` (clamped to `[0, 1]`).
pub(crate) fn add_with_probability(g: &Graph, p: f64, seed: u64) -> Graph {
    let non_edges = g.non_edges();
    let mut out = g.clone();
    for (u, v) in sample_additions(&non_edges, p.clamp(0.0, 1.0), seed) {
        out.insert_unchecked(u, v);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub failures: u64,
    pub t: f64,
    pub k: usize,
    pub seed: u64,
    pub failure_rate: f64,
    pub wilson_upper95: f64,
}

impl TrialStats {
    pub fn new(trials: u64, failures: u64, t: f64, k: usize, seed: u64) -> Self {
        assert!(failures <= trials && trials > 0);
        TrialStats {
            trials,
            failures,
            t,
            k,
            seed,
            failure_rate: failures as f64 / trials as f64,
            wilson_upper95: wilson_upper95(failures, trials),
        }
    }

    /// Binomial standard error of the failure rate.
    pub fn sigma(&self) -> f64 {
        crate::stats::bernoulli_sigma(self.failure_rate, self.trials)
    }

    pub fn csv_row(&self, family: &str, n: usize, s: Option<usize>) -> TrialRow {
        TrialRow {
            family: family.to_string(),
            n,
            k: self.k,
            s,
            t: self.t,
            trials: self.trials,
            failures: self.failures,
            failure_rate: self.failure_rate,
            wilson_upper95: self.wilson_upper95,
            seed: self.seed,
        }
    }
}

/// CSV form `family,n,k,s,t,trials,failures,failure_rate,wilson_upper95,seed`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub family: String,
    pub n: usize,
    pub k: usize,
    pub s: Option<usize>,
    pub t: f64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub wilson_upper95: f64,
    pub seed: u64,
}

/// Decides k-connectivity of `G + added` for many draws of `added`.
enum FailureCheck {
    AlwaysHolds,
    /// k = 1: merge the base components with a union-find.
    Components {
        label: Vec<usize>,
        parts: usize,
    },
    General {
        k: usize,
    },
}

impl FailureCheck {
    fn new(g: &Graph, k: usize) -> Self {
        if is_k_connected(g, k) {
            return FailureCheck::AlwaysHolds;
        }
        if k == 1 {
            let parts = connected_components(g);
            let mut label = vec![0; g.n()];
            for (id, part) in parts.iter().enumerate() {
                for v in part.iter() {
                    label[v] = id;
                }
            }
            return FailureCheck::Components {
                label,
                parts: parts.len(),
            };
        }
        FailureCheck::General { k }
    }

    fn fails(&self, g: &Graph, added: &[(usize, usize)]) -> bool {
        match self {
            FailureCheck::AlwaysHolds => false,
            FailureCheck::Components { label, parts } => {
                let mut uf = UnionFind::<usize>::new(*parts);
                let mut remaining = *parts;
                for &(u, v) in added {
                    if uf.union(label[u], label[v]) {
                        remaining -= 1;
                        if remaining == 1 {
                            return false;
                        }
                    }
                }
                remaining > 1
            }
            FailureCheck::General { k } => {
                let mut h = g.clone();
                for &(u, v) in added {
                    h.insert_unchecked(u, v);
                }
                !is_k_connected(&h, *k)
            }
        }
    }
}

/// Monte-Carlo estimate of `Pr[Add(G, t) is not k-connected]`.
///
/// Trial `i` draws from its own seed derived from `(seed, i)`, so the result
/// does not depend on how the trials are scheduled across threads.
pub fn estimate_failure(g: &Graph, k: usize, t: f64, trials: u64, seed: u64) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let non_edges = g.non_edges();
    let p = per_edge_prob(non_edges.len(), t)?;
    let check = FailureCheck::new(g, k);
    let failures = match check {
        FailureCheck::AlwaysHolds => 0,
        _ => (0..trials)
            .into_par_iter()
            .filter(|&i| {
                let added = sample_additions(&non_edges, p, tagged(seed, stream::TRIALS, i));
                check.fails(g, &added)
            })
            .count() as u64,
    };
    Ok(TrialStats::new(trials, failures, t, k, seed))
}

/// Same as [`estimate_failure`] but parameterized by the per-edge probability.
pub fn estimate_failure_at_probability(
    g: &Graph,
    k: usize,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<TrialStats> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let t = (p * g.non_edge_count() as f64).min(g.non_edge_count() as f64);
    estimate_failure(g, k, t, trials, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdGrid {
    pub start: f64,
    pub ratio: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid {
            start: 1.0,
            ratio: 1.25,
        }
    }
}

/// Smallest grid value of `t` whose estimated failure rate is at most `target`.
pub fn threshold_search(
    g: &Graph,
    k: usize,
    target_failure: f64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    threshold_search_on(g, k, target_failure, trials, seed, ThresholdGrid::default())
}

pub fn threshold_search_on(
    g: &Graph,
    k: usize,
    target_failure: f64,
    trials: u64,
    seed: u64,
    grid: ThresholdGrid,
) -> Result<f64> {
    if !(target_failure > 0.0 && target_failure < 1.0) {
        return Err(Error::domain("target failure must lie in (0, 1)"));
    }
    if !(grid.start > 0.0 && grid.ratio > 1.0) {
        return Err(Error::domain("grid needs start > 0 and ratio > 1"));
    }
    if is_k_connected(g, k) {
        return Err(Error::domain("graph already has the property"));
    }
    let cap = g.non_edge_count() as f64;
    let mut t = grid.start;
    for step in 0.. {
        if t >= cap {
            return Ok(cap);
        }
        let stats = estimate_failure(g, k, t, trials, tagged(seed, stream::GRID, step))?;
        if stats.failure_rate <= target_failure {
            return Ok(t);
        }
        t *= grid.ratio;
    }
    unreachable!()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessTag {
    /// k - r iterations, each with a probability recomputed from the current graph.
    IterativeAdaptive,
    /// k - r iterations with one fixed probability derived from `s_k(G)`.
    IterativeFixed,
    /// A single addition round with `k` times the fixed probability.
    OneShot,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProcessVariant {
    pub tag: ProcessTag,
    pub c_const: f64,
}

impl ProcessVariant {
    pub fn new(tag: ProcessTag, c_const: f64) -> Result<Self> {
        if c_const.is_nan() || c_const <= 1.0 {
            return Err(Error::domain("the constant c must exceed 1"));
        }
        Ok(ProcessVariant { tag, c_const })
    }

    /// `4 (c + 3) ln n / (s n)`, unclamped.
    pub fn level_probability(&self, n: usize, s: usize) -> f64 {
        let nf = n as f64;
        4.0 * (self.c_const + 3.0) * nf.ln() / (s as f64 * nf)
    }
}

/// Runs one of the three comparison processes used to raise connectivity to `k`.
pub fn iterative_process(g: &Graph, k: usize, variant: ProcessVariant, seed: u64) -> Result<Graph> {
    let n = g.n();
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if n < 4 * k {
        return Err(Error::domain(format!(
            "process needs n >= 4k, got n = {n}, k = {k}"
        )));
    }
    let r = edge_connectivity(g)?.min(k);
    if r == k {
        return Ok(g.clone());
    }
    let iteration_seed = |i: usize| tagged(seed, stream::ITERATION, i as u64);
    match variant.tag {
        ProcessTag::IterativeAdaptive => {
            let mut current = g.clone();
            for (idx, level) in (r + 1..=k).enumerate() {
                let s = oracle::s_k_oracle(&current, level)?;
                let p = variant.level_probability(n, s);
                current = add_with_probability(&current, p, iteration_seed(idx));
            }
            Ok(current)
        }
        ProcessTag::IterativeFixed => {
            let s = oracle::s_k_oracle(g, k)?;
            let p = variant.level_probability(n, s);
            let mut current = g.clone();
            for idx in 0..k - r {
                current = add_with_probability(&current, p, iteration_seed(idx));
            }
            Ok(current)
        }
        ProcessTag::OneShot => {
            let s = oracle::s_k_oracle(g, k)?;
            let p = (variant.level_probability(n, s) * k as f64).min(1.0);
            let t = p * g.non_edge_count() as f64;
            random_addition(g, AugmentParams::new(t, seed))
        }
    }
}

/// Union of `m` independent draws of `Add(G, t)`.
pub fn repeated_union(g: &Graph, t: f64, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if m as f64 * t > g.non_edge_count() as f64 {
        return Err(Error::domain(format!(
            "m t = {} exceeds |Ē| = {}",
            m as f64 * t,
            g.non_edge_count()
        )));
    }
    let p = per_edge_prob(g.non_edge_count(), t)?;
    let non_edges = g.non_edges();
    let mut out = g.clone();
    for i in 0..m {
        for (u, v) in sample_additions(&non_edges, p, tagged(seed, stream::UNION, i as u64)) {
            out.insert_unchecked(u, v);
        }
    }
    Ok(out)
}

/// Failure frequency of `repeated_union(G, t, m)` over `trials` draws.
pub fn estimate_union_failure(
    g: &Graph,
    k: usize,
    t: f64,
    m: usize,
    trials: u64,
    seed: u64,
) -> Result<TrialStats> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    repeated_union(g, t, m, seed)?;
    let check = FailureCheck::new(g, k);
    let non_edges = g.non_edges();
    let p = per_edge_prob(non_edges.len(), t)?;
    let failures = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let trial_seed = tagged(seed, stream::TRIALS, i);
            let added: Vec<_> = (0..m)
                .flat_map(|j| {
                    sample_additions(&non_edges, p, tagged(trial_seed, stream::UNION, j as u64))
                })
                .collect();
            check.fails(g, &added)
        })
        .count() as u64;
    Ok(TrialStats::new(trials, failures, t, k, seed))
}
