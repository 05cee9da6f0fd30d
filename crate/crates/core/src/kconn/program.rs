//! One repetition of the distributed cluster-growth tester.
//!
//! Every node starts as the root of a one-node cluster. Iteration `i`
//! (`1 <= i < s`) runs in a fixed window of `2i + 6` rounds; with `o` the
//! offset inside the window:
//!
//! * `o < i`: convergecast of the cheapest cut edge and of the cut size. The
//!   root rejects if the cut is below `k`, otherwise it broadcasts the winner.
//! * `o = 2i - 1`: members that heard no broadcast consider their cluster
//!   terminated and become free.
//! * `o = 2i`: the member on the winning edge sends a join request across it.
//! * `o = 2i + 1`: the target keeps the request with the smallest
//!   `(max-edge, root)` key, or stays with its own cluster if that key is
//!   smaller. On joining it recomputes the cut locally and announces its new
//!   cluster to all neighbors, flagging a rejection if the cut is below `k`.
//! * `o = 2i + 2`: the requester confirms the new child; a cluster that lost
//!   a node or whose request was refused stops reporting and so dies in the
//!   next window.
//!
//! Rejections flood along the tree edges of the rejecting cluster, including
//! through nodes that left it in the same window.

use std::collections::{BTreeSet, VecDeque};

use super::weights::{EdgeKey, EdgeWeighting};
use crate::congest::{
    BitReader, BitWriter, Envelope, NodeContext, NodeId, NodeProgram, Outbox, Payload, Verdict,
};
use crate::error::Result;

pub fn window_start(i: usize) -> usize {
    (i - 1) * (i + 6)
}

pub fn window_len(i: usize) -> usize {
    2 * i + 6
}

/// Rounds of one repetition: all growth windows plus a tail for the last
/// rejection flood.
pub fn rep_rounds(s: usize) -> usize {
    if s <= 1 {
        1
    } else {
        window_start(s - 1) + (2 * s + 4).max(4 * s - 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Window { i: usize, o: usize },
    Tail,
}

pub fn phase(t: usize, s: usize) -> Phase {
    for i in 1..s {
        let start = window_start(i);
        if t >= start && t < start + window_len(i) {
            return Phase::Window { i, o: t - start };
        }
    }
    Phase::Tail
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KMsg {
    Report {
        root: u64,
        edge: Option<(u64, u64)>,
        cut: u64,
    },
    Grow {
        root: u64,
        edge: (u64, u64),
        cut: u64,
    },
    Join {
        root: u64,
        max_edge: (u64, u64),
        cut: u64,
    },
    Notify {
        root: u64,
        reject: bool,
    },
    Reject {
        root: u64,
    },
}

impl KMsg {
    fn encode(&self, b: usize) -> Payload {
        let w = BitWriter::new();
        let pair = |w: BitWriter, (lo, hi): (u64, u64)| w.uint(lo, b).uint(hi, b);
        match *self {
            KMsg::Report { root, edge, cut } => {
                pair(w.uint(0, 3).uint(root, b), edge.unwrap_or((root, root))).uint(cut, 2 * b)
            }
            KMsg::Grow { root, edge, cut } => {
                pair(w.uint(1, 3).uint(root, b), edge).uint(cut, 2 * b)
            }
            KMsg::Join {
                root,
                max_edge,
                cut,
            } => pair(w.uint(2, 3).uint(root, b), max_edge).uint(cut, 2 * b),
            KMsg::Notify { root, reject } => w.uint(3, 3).uint(root, b).flag(reject),
            KMsg::Reject { root } => w.uint(4, 3).uint(root, b),
        }
        .finish()
    }

    fn decode(p: &Payload, b: usize) -> Result<KMsg> {
        let mut r = BitReader::new(p);
        let tag = r.uint(3)?;
        let root = r.uint(b)?;
        Ok(match tag {
            0 => {
                let (lo, hi) = (r.uint(b)?, r.uint(b)?);
                let edge = (lo != hi).then_some((lo, hi));
                KMsg::Report {
                    root,
                    edge,
                    cut: r.uint(2 * b)?,
                }
            }
            1 => KMsg::Grow {
                root,
                edge: (r.uint(b)?, r.uint(b)?),
                cut: r.uint(2 * b)?,
            },
            2 => KMsg::Join {
                root,
                max_edge: (r.uint(b)?, r.uint(b)?),
                cut: r.uint(2 * b)?,
            },
            3 => KMsg::Notify {
                root,
                reject: r.flag()?,
            },
            _ => KMsg::Reject { root },
        })
    }
}

#[derive(Clone, Debug)]
struct Cluster {
    root: u64,
    parent: Option<NodeId>,
    /// Children ever attached; kept after they leave so floods still reach them.
    children: Vec<NodeId>,
    max_edge: Option<EdgeKey>,
    rejected: bool,
    broken: bool,
    // Per-window state.
    reported: Vec<NodeId>,
    best: Option<EdgeKey>,
    cut_acc: u64,
    sent_report: bool,
    grow: Option<(EdgeKey, u64)>,
    join_target: Option<NodeId>,
    awaiting: Option<NodeId>,
}

impl Cluster {
    fn new(root: u64, parent: Option<NodeId>, max_edge: Option<EdgeKey>) -> Self {
        Cluster {
            root,
            parent,
            children: Vec::new(),
            max_edge,
            rejected: false,
            broken: false,
            reported: Vec::new(),
            best: None,
            cut_acc: 0,
            sent_report: false,
            grow: None,
            join_target: None,
            awaiting: None,
        }
    }

    fn tree_nbrs(&self) -> Vec<NodeId> {
        self.parent.iter().chain(&self.children).copied().collect()
    }

    fn active(&self) -> bool {
        !self.rejected && !self.broken
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Free,
    Member { root: NodeId, rejected: bool },
}

#[derive(Clone, Copy, Debug)]
pub struct KconnParams {
    pub s: usize,
    pub k: usize,
    pub weighting: EdgeWeighting,
}

pub struct KconnProgram {
    id: NodeId,
    neighbors: Vec<NodeId>,
    s: usize,
    k: usize,
    id_bits: usize,
    weighting: EdgeWeighting,
    /// Cluster root each neighbor last announced.
    view: Vec<u64>,
    cluster: Option<Cluster>,
    /// Tree neighbors of clusters this node has left, for relaying floods.
    left: Vec<(u64, Vec<NodeId>)>,
    rejected_roots: BTreeSet<u64>,
    floods: Vec<VecDeque<KMsg>>,
    rounds_seen: usize,
    rounds_needed: usize,
}

impl KconnProgram {
    pub fn new(ctx: &NodeContext, params: KconnParams) -> Self {
        let deg = ctx.neighbors.len();
        KconnProgram {
            id: ctx.id,
            neighbors: ctx.neighbors.clone(),
            s: params.s,
            k: params.k,
            id_bits: ctx.id_bits,
            weighting: params.weighting,
            view: ctx.neighbors.iter().map(|x| x.0).collect(),
            cluster: Some(Cluster::new(ctx.id.0, None, None)),
            left: Vec::new(),
            rejected_roots: BTreeSet::new(),
            floods: vec![VecDeque::new(); deg],
            rounds_seen: 0,
            rounds_needed: rep_rounds(params.s),
        }
    }

    pub fn membership(&self) -> Membership {
        match &self.cluster {
            None => Membership::Free,
            Some(c) => Membership::Member {
                root: NodeId(c.root),
                rejected: c.rejected,
            },
        }
    }

    /// Roots of every rejecting cluster this node belonged to.
    pub fn rejected_roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.rejected_roots.iter().map(|&r| NodeId(r))
    }

    fn slot(&self, x: NodeId) -> usize {
        self.neighbors.binary_search(&x).expect("neighbor")
    }

    fn key_of(&self, (lo, hi): (u64, u64)) -> EdgeKey {
        self.weighting.key(NodeId(lo), NodeId(hi))
    }

    fn leave(&mut self) {
        if let Some(c) = self.cluster.take() {
            self.left.push((c.root, c.tree_nbrs()));
        }
    }

    fn put(&self, out: &mut [Option<KMsg>], x: NodeId, m: KMsg) {
        let j = self.slot(x);
        assert!(
            out[j].is_none(),
            "two protocol messages on one edge in one round"
        );
        out[j] = Some(m);
    }

    fn reject_cluster(&mut self) {
        let c = self.cluster.as_mut().expect("member");
        c.rejected = true;
        let root = c.root;
        self.rejected_roots.insert(root);
        for x in c.tree_nbrs() {
            let j = self.slot(x);
            self.floods[j].push_back(KMsg::Reject { root });
        }
    }

    fn flood_in(&mut self, root: u64, from: NodeId) {
        if self.rejected_roots.contains(&root) {
            return;
        }
        let nbrs = match self.cluster.as_mut() {
            Some(c) if c.root == root => {
                c.rejected = true;
                c.tree_nbrs()
            }
            _ => match self.left.iter().find(|(r, _)| *r == root) {
                Some((_, nbrs)) => nbrs.clone(),
                None => return,
            },
        };
        self.rejected_roots.insert(root);
        for x in nbrs {
            if x != from {
                let j = self.slot(x);
                self.floods[j].push_back(KMsg::Reject { root });
            }
        }
    }

    /// This node's own cut edges: count and cheapest.
    fn own_cut(&self, root: u64) -> (u64, Option<EdgeKey>) {
        let mut cut = 0;
        let mut best: Option<EdgeKey> = None;
        for (j, &x) in self.neighbors.iter().enumerate() {
            if self.view[j] != root {
                cut += 1;
                let kk = self.weighting.key(self.id, x);
                best = Some(best.map_or(kk, |b| b.min(kk)));
            }
        }
        (cut, best)
    }

    fn apply_grow(&mut self, winner: EdgeKey, cut: u64, out: &mut [Option<KMsg>]) {
        let id = self.id.0;
        let c = self.cluster.as_mut().expect("member");
        c.grow = Some((winner, cut));
        c.max_edge = Some(c.max_edge.map_or(winner, |m| m.max(winner)));
        let msg = KMsg::Grow {
            root: c.root,
            edge: (winner.lo, winner.hi),
            cut,
        };
        if winner.lo == id {
            c.join_target = Some(NodeId(winner.hi));
        } else if winner.hi == id {
            c.join_target = Some(NodeId(winner.lo));
        }
        let children = c.children.clone();
        for x in children {
            self.put(out, x, msg);
        }
    }

    /// Tries to finish the convergecast at this node.
    fn try_report(&mut self, out: &mut [Option<KMsg>]) {
        let Some(c) = self.cluster.as_ref() else {
            return;
        };
        if !c.active() || c.sent_report || c.reported.len() < c.children.len() {
            return;
        }
        let (root, parent, best, cut) = (c.root, c.parent, c.best, c.cut_acc);
        self.cluster.as_mut().unwrap().sent_report = true;
        match parent {
            Some(p) => self.put(
                out,
                p,
                KMsg::Report {
                    root,
                    edge: best.map(|e| (e.lo, e.hi)),
                    cut,
                },
            ),
            None => {
                if (cut as usize) < self.k {
                    self.reject_cluster();
                } else {
                    let winner = best.expect("positive cut has a cut edge");
                    self.apply_grow(winner, cut, out);
                }
            }
        }
    }

    fn start_window(&mut self, out: &mut [Option<KMsg>]) {
        let Some(root) = self.cluster.as_ref().map(|c| c.root) else {
            return;
        };
        let (cut, best) = self.own_cut(root);
        let c = self.cluster.as_mut().unwrap();
        c.reported.clear();
        c.best = best;
        c.cut_acc = cut;
        c.sent_report = false;
        c.grow = None;
        c.join_target = None;
        c.awaiting = None;
        self.try_report(out);
    }

    fn resolve_joins(&mut self, joins: &[(EdgeKey, u64, NodeId, u64)], out: &mut [Option<KMsg>]) {
        let Some(&(key, root, src, cut_w)) = joins.iter().min_by_key(|j| (j.0, j.1)) else {
            return;
        };
        let accept = match &self.cluster {
            None => true,
            Some(c) if c.rejected => false,
            Some(c) => (Some(key), root) < (c.max_edge, c.root),
        };
        if !accept {
            return;
        }
        self.leave();
        let into_w = self.view.iter().filter(|&&r| r == root).count() as u64;
        let cut = cut_w + self.neighbors.len() as u64 - 2 * into_w;
        let reject = (cut as usize) < self.k;
        let mut c = Cluster::new(root, Some(src), Some(key));
        c.rejected = reject;
        self.cluster = Some(c);
        if reject {
            self.rejected_roots.insert(root);
        }
        for &x in &self.neighbors.clone() {
            self.put(out, x, KMsg::Notify { root, reject });
        }
    }
}

impl NodeProgram for KconnProgram {
    fn on_round(&mut self, round: usize, inbox: &[Envelope], outbox: &mut Outbox) {
        self.rounds_seen = round + 1;
        let mut out: Vec<Option<KMsg>> = vec![None; self.neighbors.len()];
        let msgs: Vec<(NodeId, KMsg)> = inbox
            .iter()
            .map(|e| {
                (
                    e.src,
                    KMsg::decode(&e.payload, self.id_bits).expect("well-formed payload"),
                )
            })
            .collect();

        if self.s <= 1 && round == 0 && self.neighbors.len() < self.k {
            self.reject_cluster();
        }

        // Announcements first: they carry membership changes.
        for &(src, m) in &msgs {
            if let KMsg::Notify { root, .. } = m {
                let j = self.slot(src);
                self.view[j] = root;
                if let Some(c) = self.cluster.as_mut() {
                    if c.awaiting == Some(src) && root == c.root {
                        c.awaiting = None;
                        c.children.push(src);
                    } else if root != c.root && (c.parent == Some(src) || c.children.contains(&src))
                    {
                        c.broken = true;
                    }
                }
            }
        }
        for &(src, m) in &msgs {
            match m {
                KMsg::Notify { root, reject: true } | KMsg::Reject { root } => {
                    self.flood_in(root, src)
                }
                _ => {}
            }
        }

        if let Phase::Window { i, o } = phase(round, self.s) {
            if o == 0 {
                self.start_window(&mut out);
            }
            if o < i {
                for &(src, m) in &msgs {
                    if let KMsg::Report { root, edge, cut } = m {
                        let key = edge.map(|e| self.key_of(e));
                        if let Some(c) = self.cluster.as_mut() {
                            if c.root == root
                                && c.children.contains(&src)
                                && !c.reported.contains(&src)
                            {
                                c.reported.push(src);
                                c.cut_acc += cut;
                                if let Some(kk) = key {
                                    c.best = Some(c.best.map_or(kk, |b| b.min(kk)));
                                }
                            }
                        }
                    }
                }
                self.try_report(&mut out);
            }
            if o <= 2 * i - 2 {
                for &(src, m) in &msgs {
                    if let KMsg::Grow { root, edge, cut } = m {
                        let ok = self.cluster.as_ref().is_some_and(|c| {
                            c.active()
                                && c.root == root
                                && c.parent == Some(src)
                                && c.grow.is_none()
                        });
                        if ok {
                            let winner = self.key_of(edge);
                            self.apply_grow(winner, cut, &mut out);
                        }
                    }
                }
            }
            if o == 2 * i - 1
                && self
                    .cluster
                    .as_ref()
                    .is_some_and(|c| !c.rejected && c.grow.is_none())
            {
                self.leave();
            }
            if o == 2 * i {
                let send = self.cluster.as_mut().and_then(|c| {
                    let target = c.join_target.take().filter(|_| c.active())?;
                    c.awaiting = Some(target);
                    let (_, cut) = c.grow.expect("grown");
                    let m = c.max_edge.expect("grown");
                    Some((
                        target,
                        KMsg::Join {
                            root: c.root,
                            max_edge: (m.lo, m.hi),
                            cut,
                        },
                    ))
                });
                if let Some((x, m)) = send {
                    self.put(&mut out, x, m);
                }
            }
            if o == 2 * i + 1 {
                let joins: Vec<_> = msgs
                    .iter()
                    .filter_map(|&(src, m)| match m {
                        KMsg::Join {
                            root,
                            max_edge,
                            cut,
                        } => Some((self.key_of(max_edge), root, src, cut)),
                        _ => None,
                    })
                    .collect();
                self.resolve_joins(&joins, &mut out);
            }
            if o == 2 * i + 2 {
                if let Some(c) = self.cluster.as_mut() {
                    if c.awaiting.take().is_some() {
                        c.broken = true;
                    }
                }
            }
        }

        for (j, slot) in out.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = self.floods[j].pop_front();
            }
        }
        for (j, m) in out.into_iter().enumerate() {
            if let Some(m) = m {
                outbox.send(self.neighbors[j], m.encode(self.id_bits));
            }
        }
    }

    fn verdict(&self) -> Verdict {
        if self.rounds_seen < self.rounds_needed || self.floods.iter().any(|q| !q.is_empty()) {
            Verdict::Undecided
        } else if self.rejected_roots.is_empty() {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_tile_the_repetition() {
        for s in 2..12 {
            let mut t = 0;
            for i in 1..s {
                assert_eq!(window_start(i), t);
                for o in 0..window_len(i) {
                    assert_eq!(phase(t + o, s), Phase::Window { i, o });
                }
                t += window_len(i);
            }
            assert!(rep_rounds(s) >= t);
            assert_eq!(phase(t, s), Phase::Tail);
        }
        assert_eq!(rep_rounds(1), 1);
        assert_eq!([rep_rounds(2), rep_rounds(4), rep_rounds(8)], [8, 32, 108]);
    }

    #[test]
    fn codec_roundtrip_fits_budget() {
        let b = 5;
        for m in [
            KMsg::Report {
                root: 3,
                edge: Some((1, 9)),
                cut: 600,
            },
            KMsg::Report {
                root: 3,
                edge: None,
                cut: 0,
            },
            KMsg::Grow {
                root: 31,
                edge: (0, 31),
                cut: 1023,
            },
            KMsg::Join {
                root: 2,
                max_edge: (4, 5),
                cut: 7,
            },
            KMsg::Notify {
                root: 8,
                reject: true,
            },
            KMsg::Reject { root: 30 },
        ] {
            let p = m.encode(b);
            assert!(p.len() <= 8 * b);
            assert_eq!(KMsg::decode(&p, b).unwrap(), m);
        }
        // Smallest id width still fits.
        assert!(
            KMsg::Join {
                root: 1,
                max_edge: (0, 1),
                cut: 1
            }
            .encode(1)
            .len()
                <= 8
        );
    }
}
