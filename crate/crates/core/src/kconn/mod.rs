//! Distributed tester for k-edge-connectivity by randomized cluster growth.

mod program;
mod sequential;
mod weights;

use std::collections::BTreeMap;

use serde::Serialize;

pub use program::{
    phase, rep_rounds, window_len, window_start, KconnParams, KconnProgram, Membership, Phase,
};
pub use sequential::{cheap_tree_event, cheap_tree_frequency, sequential_witness_search};
pub use weights::{EdgeKey, EdgeWeighting};

use crate::congest::{self, NodeId, RunConfig, RunObserverFn, RunOutcome, TesterVerdict};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::oracle::{WitnessReport, WitnessSource};
use crate::rng::{stream, tagged};

/// Constant in front of the repetition count.
pub const REPETITION_GAMMA: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RepetitionSchedule {
    pub reps: usize,
}

impl RepetitionSchedule {
    /// `⌈γ · s^{2(1 - 1/k)} · ln n⌉`, at least 1.
    pub fn new(n: usize, s: usize, k: usize) -> Self {
        let exponent = 2.0 * (1.0 - 1.0 / k as f64);
        let reps = (REPETITION_GAMMA * (s as f64).powf(exponent) * (n as f64).ln()).ceil();
        RepetitionSchedule {
            reps: (reps as usize).max(1),
        }
    }
}

pub fn check_params(g: &Graph, s: usize, k: usize) -> Result<()> {
    let n = g.n();
    if s == 0 || s >= n {
        return Err(Error::domain(format!("s must lie in 1..{n}, got {s}")));
    }
    if k == 0 || k >= n {
        return Err(Error::domain(format!("k must lie in 1..{n}, got {k}")));
    }
    Ok(())
}

/// Id-assignment seed of repetition `rep`.
pub fn rep_seed(master_seed: u64, rep: usize) -> u64 {
    tagged(master_seed, stream::REPETITION, rep as u64)
}

pub fn rep_config(s: usize, master_seed: u64, rep: usize) -> RunConfig {
    RunConfig::new(rep_rounds(s) + 4 * s + 8, rep_seed(master_seed, rep))
}

/// Runs repetition `rep` with `observer(round, programs, ids)` after each round.
pub fn run_repetition_observed(
    g: &Graph,
    s: usize,
    k: usize,
    master_seed: u64,
    rep: usize,
    observer: RunObserverFn<'_, KconnProgram>,
) -> Result<RunOutcome<KconnProgram>> {
    check_params(g, s, k)?;
    let params = KconnParams {
        s,
        k,
        weighting: EdgeWeighting::new(master_seed, rep as u64),
    };
    congest::run_observed(
        g,
        |ctx| KconnProgram::new(ctx, params),
        rep_config(s, master_seed, rep),
        observer,
    )
}

pub fn run_repetition(
    g: &Graph,
    s: usize,
    k: usize,
    master_seed: u64,
    rep: usize,
) -> Result<RunOutcome<KconnProgram>> {
    run_repetition_observed(g, s, k, master_seed, rep, &mut |_, _, _| {})
}

/// Groups rejecting nodes by cluster root and re-verifies each group.
pub fn witnesses(
    g: &Graph,
    outcome: &RunOutcome<KconnProgram>,
    s: usize,
    k: usize,
    rep: usize,
) -> Result<Vec<WitnessReport>> {
    let mut groups: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (v, p) in outcome.programs.iter().enumerate() {
        for r in p.rejected_roots() {
            groups.entry(r).or_default().push(v);
        }
    }
    groups
        .into_iter()
        .map(|(root, members)| {
            WitnessReport::verified(
                g,
                VertexSet::new(members),
                k,
                s,
                WitnessSource::DistributedRun {
                    root: root.0,
                    repetition: rep,
                },
            )
            .map_err(|e| Error::Soundness(format!("distributed witness rooted at {root}: {e}")))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct KconnRun {
    pub verdict: TesterVerdict,
    pub reps_run: usize,
    pub reps_scheduled: usize,
    pub rounds_total: usize,
    pub max_message_bits: usize,
    pub budget_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

/// Runs repetitions until one rejects or the schedule is exhausted.
pub fn run_kconn_test(
    g: &Graph,
    s: usize,
    k: usize,
    master_seed: u64,
    reps: Option<usize>,
) -> Result<KconnRun> {
    check_params(g, s, k)?;
    let scheduled = reps.unwrap_or_else(|| RepetitionSchedule::new(g.n(), s, k).reps);
    if scheduled == 0 {
        return Err(Error::domain("at least one repetition is required"));
    }
    let mut result = KconnRun {
        verdict: TesterVerdict::AllAccept,
        reps_run: 0,
        reps_scheduled: scheduled,
        rounds_total: 0,
        max_message_bits: 0,
        budget_bits: congest::default_budget_bits(g.n()),
        witness: None,
    };
    for rep in 0..scheduled {
        let outcome = run_repetition(g, s, k, master_seed, rep)?;
        result.reps_run += 1;
        result.rounds_total += outcome.report.rounds_used;
        result.max_message_bits = result.max_message_bits.max(outcome.report.max_message_bits);
        if congest::tester_verdict(&outcome.report)? == TesterVerdict::SomeReject {
            let found = witnesses(g, &outcome, s, k, rep)?;
            if found.is_empty() {
                return Err(Error::Soundness("rejection without a witness".into()));
            }
            result.verdict = TesterVerdict::SomeReject;
            result.witness = found
                .into_iter()
                .min_by_key(|w| (w.set.len(), w.set.clone()));
            break;
        }
    }
    Ok(result)
}
