//! Synchronous CONGEST round engine.
//!
//! Each round every node reads the envelopes sent to it in the previous round
//! and may send at most one envelope to each neighbor. Payload length is
//! capped by a per-run bit budget; violating any rule aborts the run with
//! [`Error::Protocol`].

pub mod bits;

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{rng_from_seed, stream, tagged};

pub use bits::{BitReader, BitWriter, Payload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub src: NodeId,
    pub dst: NodeId,
    pub payload: Payload,
}

impl Envelope {
    pub fn bit_len(&self) -> usize {
        self.payload.len()
    }
}

/// Everything a node knows when it starts.
#[derive(Clone, Debug)]
pub struct NodeContext {
    pub id: NodeId,
    /// Neighbor ids, sorted ascending.
    pub neighbors: Vec<NodeId>,
    pub n: usize,
    pub id_bits: usize,
    pub budget_bits: usize,
    pub private_seed: u64,
}

impl NodeContext {
    /// The node's private random stream.
    pub fn private_rng(&self) -> ChaCha8Rng {
        rng_from_seed(self.private_seed)
    }
}

#[derive(Debug, Default)]
pub struct Outbox {
    sends: Vec<(NodeId, Payload)>,
}

impl Outbox {
    pub fn send(&mut self, dst: NodeId, payload: Payload) {
        self.sends.push((dst, payload));
    }

    pub fn is_empty(&self) -> bool {
        self.sends.is_empty()
    }
}

pub trait NodeProgram {
    /// `inbox` holds the envelopes sent to this node in round `round - 1`,
    /// sorted by sender id.
    fn on_round(&mut self, round: usize, inbox: &[Envelope], out: &mut Outbox);

    fn verdict(&self) -> Verdict;
}

/// `max(1, ⌈log2 n⌉)`.
pub fn id_bits(n: usize) -> usize {
    let ceil = if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    };
    ceil.max(1)
}

pub fn default_budget_bits(n: usize) -> usize {
    8 * id_bits(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Sequential,
    /// Nodes are stepped in a fresh random order every round.
    Shuffled(u64),
    Parallel,
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub max_rounds: usize,
    /// `None` selects [`default_budget_bits`].
    pub budget_bits: Option<usize>,
    pub seed: u64,
    pub activation: Activation,
}

impl RunConfig {
    pub fn new(max_rounds: usize, seed: u64) -> Self {
        RunConfig {
            max_rounds,
            budget_bits: None,
            seed,
            activation: Activation::Sequential,
        }
    }
}

fn hex_hash<S: Serializer>(h: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{h:016x}"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub verdicts: BTreeMap<NodeId, Verdict>,
    pub rounds_used: usize,
    pub max_rounds: usize,
    pub max_message_bits: usize,
    pub budget_bits: usize,
    #[serde(serialize_with = "hex_hash")]
    pub transcript_hash: u64,
}

impl RunReport {
    pub fn transcript_hex(&self) -> String {
        format!("{:016x}", self.transcript_hash)
    }
}

/// Observer hook passed to [`run_observed`] by callers that store it.
pub type RunObserverFn<'a, P> = &'a mut dyn FnMut(usize, &[P], &[NodeId]);

pub struct RunOutcome<P> {
    pub report: RunReport,
    /// `ids[v]` is the id assigned to vertex `v`.
    pub ids: Vec<NodeId>,
    /// Final program state, indexed by vertex.
    pub programs: Vec<P>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TesterVerdict {
    AllAccept,
    SomeReject,
}

pub fn tester_verdict(report: &RunReport) -> Result<TesterVerdict> {
    let undecided = report
        .verdicts
        .values()
        .filter(|v| **v == Verdict::Undecided)
        .count();
    if undecided > 0 {
        return Err(Error::IncompleteRun { undecided });
    }
    if report.verdicts.values().any(|v| *v == Verdict::Reject) {
        Ok(TesterVerdict::SomeReject)
    } else {
        Ok(TesterVerdict::AllAccept)
    }
}

/// The seed-derived id permutation used by [`run`].
pub fn assign_ids(n: usize, seed: u64) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = (0..n as u64).map(NodeId).collect();
    ids.shuffle(&mut rng_from_seed(tagged(seed, stream::NODE_IDS, 0)));
    ids
}

pub fn run<P, F>(g: &Graph, factory: F, cfg: RunConfig) -> Result<RunOutcome<P>>
where
    P: NodeProgram + Send,
    F: FnMut(&NodeContext) -> P,
{
    run_observed(g, factory, cfg, |_, _, _| {})
}

/// Like [`run`], calling `observer(round, programs, ids)` after every round.
pub fn run_observed<P, F, O>(
    g: &Graph,
    mut factory: F,
    cfg: RunConfig,
    mut observer: O,
) -> Result<RunOutcome<P>>
where
    P: NodeProgram + Send,
    F: FnMut(&NodeContext) -> P,
    O: FnMut(usize, &[P], &[NodeId]),
{
    let n = g.n();
    let id_bits = id_bits(n);
    let budget_bits = cfg.budget_bits.unwrap_or_else(|| default_budget_bits(n));
    let min_budget = if n <= 1 { 0 } else { id_bits };
    if budget_bits < min_budget {
        return Err(Error::domain(format!(
            "budget of {budget_bits} bits is below ⌈log2 n⌉ = {min_budget}"
        )));
    }
    let ids = assign_ids(n, cfg.seed);
    let index_of: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(v, &id)| (id, v)).collect();

    let mut programs: Vec<P> = (0..n)
        .map(|v| {
            let mut neighbors: Vec<NodeId> = g.neighbors(v).iter().map(|&w| ids[w]).collect();
            neighbors.sort_unstable();
            let ctx = NodeContext {
                id: ids[v],
                neighbors,
                n,
                id_bits,
                budget_bits,
                private_seed: tagged(cfg.seed, stream::PRIVATE, ids[v].0),
            };
            factory(&ctx)
        })
        .collect();

    let mut hasher = Sha256::new();
    let mut inboxes: Vec<Vec<Envelope>> = vec![Vec::new(); n];
    let mut max_message_bits = 0usize;
    let mut rounds_used = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle_rng = match cfg.activation {
        Activation::Shuffled(s) => Some(rng_from_seed(s)),
        _ => None,
    };

    for round in 0..cfg.max_rounds {
        if programs.iter().all(|p| p.verdict() != Verdict::Undecided) {
            break;
        }
        let outboxes: Vec<Outbox> = match cfg.activation {
            Activation::Parallel => programs
                .par_iter_mut()
                .zip(inboxes.par_iter())
                .map(|(p, inbox)| {
                    let mut out = Outbox::default();
                    p.on_round(round, inbox, &mut out);
                    out
                })
                .collect(),
            _ => {
                if let Some(rng) = shuffle_rng.as_mut() {
                    order.shuffle(rng);
                }
                let mut outs: Vec<Option<Outbox>> = (0..n).map(|_| None).collect();
                for &v in &order {
                    let mut out = Outbox::default();
                    programs[v].on_round(round, &inboxes[v], &mut out);
                    outs[v] = Some(out);
                }
                outs.into_iter()
                    .map(|o| o.expect("every node stepped"))
                    .collect()
            }
        };
        rounds_used = round + 1;

        let mut next: Vec<Vec<Envelope>> = vec![Vec::new(); n];
        let mut sent: Vec<Envelope> = Vec::new();
        for (v, out) in outboxes.into_iter().enumerate() {
            let src = ids[v];
            let mut seen = Vec::with_capacity(out.sends.len());
            for (dst, payload) in out.sends {
                let violation = |reason: String| Error::Protocol {
                    node: src.0,
                    round,
                    reason,
                };
                let w = match index_of.get(&dst) {
                    Some(&w) if g.has_edge(v, w) => w,
                    _ => return Err(violation(format!("{dst} is not a neighbor"))),
                };
                if seen.contains(&w) {
                    return Err(violation(format!("second envelope to {dst} in one round")));
                }
                if payload.len() > budget_bits {
                    return Err(violation(format!(
                        "{}-bit payload exceeds the {budget_bits}-bit budget",
                        payload.len()
                    )));
                }
                seen.push(w);
                max_message_bits = max_message_bits.max(payload.len());
                let env = Envelope { src, dst, payload };
                next[w].push(env.clone());
                sent.push(env);
            }
        }
        sent.sort_by_key(|e| (e.src, e.dst));
        hasher.update((round as u64).to_be_bytes());
        hasher.update((sent.len() as u64).to_be_bytes());
        for e in &sent {
            hasher.update(e.src.0.to_be_bytes());
            hasher.update(e.dst.0.to_be_bytes());
            hasher.update((e.payload.len() as u64).to_be_bytes());
            hasher.update(bits::to_bytes(&e.payload));
        }
        for inbox in &mut next {
            inbox.sort_by_key(|e| e.src);
        }
        inboxes = next;
        observer(round, &programs, &ids);
    }

    let digest = hasher.finalize();
    let transcript_hash = u64::from_be_bytes(digest[..8].try_into().expect("32-byte digest"));
    let verdicts = ids
        .iter()
        .zip(&programs)
        .map(|(&id, p)| (id, p.verdict()))
        .collect();
    Ok(RunOutcome {
        report: RunReport {
            verdicts,
            rounds_used,
            max_rounds: cfg.max_rounds,
            max_message_bits,
            budget_bits,
            transcript_hash,
        },
        ids,
        programs,
    })
}
