//! Distributed connectivity tester built from competing DFS executions.
//!
//! Every node starts a DFS rooted at itself. A node keeps only the execution
//! with the largest root id that has reached it; tokens of smaller roots die
//! where they collide. An execution that has visited `s` nodes walks back up
//! its DFS stack collecting whether any stack node still has a neighbor
//! outside the execution; the root rejects if none does. An execution that
//! runs out of nodes before reaching `s` rejects unless it visited all `n`.
//! Nodes that never reach a decision accept at round [`default_accept_round`].

use serde::Serialize;

use crate::congest::{
    self, BitReader, BitWriter, Envelope, NodeContext, NodeId, NodeProgram, Outbox, Payload,
    RunConfig, RunOutcome, RunReport, TesterVerdict, Verdict,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::connected_components;

/// Round budget is `ROUND_SLOPE * s + ROUND_OFFSET`.
pub const ROUND_SLOPE: usize = 4;
pub const ROUND_OFFSET: usize = 8;

pub fn max_rounds(s: usize) -> usize {
    ROUND_SLOPE * s + ROUND_OFFSET
}

/// Every execution finishes by round `3s - 4`; stragglers accept here.
pub fn default_accept_round(s: usize) -> usize {
    3 * s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Msg {
    Token { root: u64, count: usize },
    Notify { root: u64 },
    Backtrack { root: u64, count: usize },
    Check { root: u64, boundary: bool },
}

impl Msg {
    fn root(&self) -> u64 {
        match *self {
            Msg::Token { root, .. }
            | Msg::Notify { root }
            | Msg::Backtrack { root, .. }
            | Msg::Check { root, .. } => root,
        }
    }

    fn encode(&self, id_bits: usize) -> Payload {
        let w = BitWriter::new();
        match *self {
            Msg::Token { root, count } => w
                .uint(0, 2)
                .uint(root, id_bits)
                .uint(count as u64 - 1, id_bits),
            Msg::Notify { root } => w.uint(1, 2).uint(root, id_bits),
            Msg::Backtrack { root, count } => w
                .uint(2, 2)
                .uint(root, id_bits)
                .uint(count as u64 - 1, id_bits),
            Msg::Check { root, boundary } => w.uint(3, 2).uint(root, id_bits).flag(boundary),
        }
        .finish()
    }

    fn decode(p: &Payload, id_bits: usize) -> Result<Msg> {
        let mut r = BitReader::new(p);
        let tag = r.uint(2)?;
        let root = r.uint(id_bits)?;
        Ok(match tag {
            0 => Msg::Token {
                root,
                count: r.uint(id_bits)? as usize + 1,
            },
            1 => Msg::Notify { root },
            2 => Msg::Backtrack {
                root,
                count: r.uint(id_bits)? as usize + 1,
            },
            _ => Msg::Check {
                root,
                boundary: r.flag()?,
            },
        })
    }
}

pub struct ConnProgram {
    id: NodeId,
    neighbors: Vec<NodeId>,
    n: usize,
    s: usize,
    id_bits: usize,
    /// Largest root that has reached this node.
    owner: u64,
    /// Parent in the owner's DFS tree; `None` at the root or once dropped.
    parent: Option<NodeId>,
    /// Largest root each neighbor is known to belong to.
    view: Vec<Option<u64>>,
    verdict: Verdict,
}

impl ConnProgram {
    pub fn new(ctx: &NodeContext, s: usize) -> Self {
        ConnProgram {
            id: ctx.id,
            neighbors: ctx.neighbors.clone(),
            n: ctx.n,
            s,
            id_bits: ctx.id_bits,
            owner: ctx.id.0,
            parent: None,
            view: vec![None; ctx.neighbors.len()],
            verdict: Verdict::Undecided,
        }
    }

    pub fn owner(&self) -> NodeId {
        NodeId(self.owner)
    }

    fn slot(&self, x: NodeId) -> usize {
        self.neighbors
            .binary_search(&x)
            .expect("message from a neighbor")
    }

    fn is_root(&self) -> bool {
        self.owner == self.id.0
    }

    /// True if some neighbor is not known to belong to the current owner.
    fn has_boundary(&self) -> bool {
        self.view.iter().any(|v| *v != Some(self.owner))
    }

    fn send(&self, out: &mut Outbox, dst: NodeId, msg: Msg) {
        out.send(dst, msg.encode(self.id_bits));
    }

    fn decide(&mut self, v: Verdict) {
        if self.verdict == Verdict::Undecided {
            self.verdict = v;
        }
    }

    /// The token of the owner's execution is here with `count` nodes visited.
    /// Returns the neighbor that receives the action message, if any.
    fn advance(&mut self, count: usize, out: &mut Outbox) -> Option<NodeId> {
        let r = self.owner;
        if count >= self.s {
            let boundary = self.has_boundary();
            return match self.parent {
                Some(p) => {
                    self.send(out, p, Msg::Check { root: r, boundary });
                    Some(p)
                }
                None => {
                    self.finish_check(boundary);
                    None
                }
            };
        }
        let forward = self
            .neighbors
            .iter()
            .zip(&self.view)
            .filter(|(_, v)| v.is_none_or(|o| o < r))
            .map(|(&x, _)| x)
            .max();
        if let Some(x) = forward {
            self.send(out, x, Msg::Token { root: r, count });
            return Some(x);
        }
        if self.view.iter().any(|v| v.is_some_and(|o| o > r)) {
            // A larger execution holds a neighbor; this one can never close.
            self.parent = None;
            return None;
        }
        match self.parent {
            Some(p) => {
                self.send(out, p, Msg::Backtrack { root: r, count });
                Some(p)
            }
            None => {
                let v = if count == self.n {
                    Verdict::Accept
                } else {
                    Verdict::Reject
                };
                self.decide(v);
                None
            }
        }
    }

    fn finish_check(&mut self, boundary: bool) {
        let v = if !boundary && self.s < self.n {
            Verdict::Reject
        } else {
            Verdict::Accept
        };
        self.decide(v);
    }

    fn notify_others(&self, skip: Option<NodeId>, out: &mut Outbox) {
        for &x in &self.neighbors {
            if Some(x) != skip {
                self.send(out, x, Msg::Notify { root: self.owner });
            }
        }
    }
}

impl NodeProgram for ConnProgram {
    fn on_round(&mut self, round: usize, inbox: &[Envelope], out: &mut Outbox) {
        if round == 0 {
            if self.s <= 1 {
                let isolated = self.neighbors.is_empty();
                self.decide(if isolated && self.n > 1 {
                    Verdict::Reject
                } else {
                    Verdict::Accept
                });
                return;
            }
            let used = self.advance(1, out);
            self.notify_others(used, out);
            return;
        }

        let msgs: Vec<(NodeId, Msg)> = inbox
            .iter()
            .map(|e| {
                (
                    e.src,
                    Msg::decode(&e.payload, self.id_bits).expect("well-formed payload"),
                )
            })
            .collect();
        for &(src, m) in &msgs {
            let i = self.slot(src);
            self.view[i] = Some(self.view[i].map_or(m.root(), |o| o.max(m.root())));
        }

        let token = msgs
            .iter()
            .filter_map(|&(src, m)| match m {
                Msg::Token { root, count } if root > self.owner => Some((root, count, src)),
                _ => None,
            })
            .max();
        if let Some((root, count, src)) = token {
            self.owner = root;
            self.parent = Some(src);
            let used = self.advance(count + 1, out);
            self.notify_others(used, out);
        } else {
            let own = msgs.iter().find_map(|&(_, m)| match m {
                Msg::Backtrack { root, count } if root == self.owner => Some((count, None)),
                Msg::Check { root, boundary } if root == self.owner => Some((0, Some(boundary))),
                _ => None,
            });
            match own {
                Some((count, None)) => {
                    if self.parent.is_some() || self.is_root() {
                        self.advance(count, out);
                    }
                }
                Some((_, Some(boundary))) => {
                    let boundary = boundary || self.has_boundary();
                    match self.parent {
                        Some(p) => self.send(
                            out,
                            p,
                            Msg::Check {
                                root: self.owner,
                                boundary,
                            },
                        ),
                        None if self.is_root() => self.finish_check(boundary),
                        None => {}
                    }
                }
                None => {}
            }
        }

        if round >= default_accept_round(self.s) {
            self.decide(Verdict::Accept);
        }
    }

    fn verdict(&self) -> Verdict {
        self.verdict
    }
}

fn check_s(g: &Graph, s: usize) -> Result<()> {
    if s == 0 || s > g.n() {
        return Err(Error::domain(format!(
            "s must lie in 1..={}, got {s}",
            g.n()
        )));
    }
    Ok(())
}

pub fn conn_config(s: usize, seed: u64) -> RunConfig {
    RunConfig::new(max_rounds(s), seed)
}

pub fn run_conn_program(g: &Graph, s: usize, cfg: RunConfig) -> Result<RunOutcome<ConnProgram>> {
    check_s(g, s)?;
    congest::run(g, |ctx| ConnProgram::new(ctx, s), cfg)
}

/// One run of the tester with the default round and bit budgets.
pub fn run_conn_test(g: &Graph, s: usize, seed: u64) -> Result<RunReport> {
    Ok(run_conn_program(g, s, conn_config(s, seed))?.report)
}

/// The decision the distributed tester realizes: reject iff some component
/// has at most `s` vertices and is not the whole graph.
pub fn conn_semantic_oracle(g: &Graph, s: usize) -> TesterVerdict {
    let n = g.n();
    if connected_components(g)
        .iter()
        .any(|c| c.len() <= s && c.len() < n)
    {
        TesterVerdict::SomeReject
    } else {
        TesterVerdict::AllAccept
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnRun {
    pub verdict: TesterVerdict,
    #[serde(flatten)]
    pub report: RunReport,
}
