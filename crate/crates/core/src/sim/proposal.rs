//! The two-sided proposal algorithm for x-maximal y-matching.
//!
//! Each node tracks its incident ports in four disjoint sets: `F` (free),
//! `M` (matched), `S` (proposal sent) and `R` (proposal received). Active
//! and passive roles alternate every round. An active node with `M = ∅`
//! accepts its lowest port in `R` if there is one, and otherwise proposes
//! over its `y` lowest free ports. A passive node with `M = ∅` records
//! acceptances in `M` and proposals in `R`. Nodes with `M ≠ ∅` are done.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::graph::SimGraph;
use crate::error::{Error, Result};
use crate::family::t_bound;
use crate::problem::{Label, Side};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodeState {
    pub f: BTreeSet<usize>,
    pub m: BTreeSet<usize>,
    pub s: BTreeSet<usize>,
    pub r: BTreeSet<usize>,
}

impl NodeState {
    fn new(degree: usize) -> NodeState {
        NodeState {
            f: (0..degree).collect(),
            ..NodeState::default()
        }
    }

    pub fn terminated(&self) -> bool {
        !self.m.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        let sets = [&self.f, &self.m, &self.s, &self.r];
        let total: usize = sets.iter().map(|s| s.len()).sum();
        let union: BTreeSet<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
        total == union.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Propose,
    Accept,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Message {
    pub round: usize,
    pub side: Side,
    pub node: usize,
    /// 0-based port of the sender.
    pub port: usize,
    pub kind: MessageKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub rounds_used: usize,
    /// White nodes that accepted a proposal of the last round without
    /// sending anything: `(node, port)`.
    pub final_accepts: Vec<(usize, usize)>,
}

impl Transcript {
    /// One JSON record per line: every message, then the final decisions.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("serializable"));
            out.push('\n');
        }
        for &(node, port) in &self.final_accepts {
            let rec = serde_json::json!({
                "round": self.rounds_used,
                "side": "white",
                "node": node,
                "port": port,
                "kind": "decide",
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MatchLabel {
    M,
    O,
    P,
    X,
}

impl MatchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchLabel::M => "M",
            MatchLabel::O => "O",
            MatchLabel::P => "P",
            MatchLabel::X => "X",
        }
    }
}

/// One label per edge, chosen by the white endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputLabeling {
    pub labels: Vec<MatchLabel>,
}

impl OutputLabeling {
    pub fn to_labels(&self) -> Vec<Label> {
        self.labels
            .iter()
            .map(|l| Label::new(l.as_str()).expect("valid"))
            .collect()
    }

    pub fn matched(&self, e: usize) -> bool {
        self.labels[e] == MatchLabel::M
    }
}

#[derive(Clone, Debug)]
pub struct ProposalRun {
    pub labeling: OutputLabeling,
    pub transcript: Transcript,
    pub white: Vec<NodeState>,
    pub black: Vec<NodeState>,
}

/// Runs the algorithm with Δ = the maximum degree of `g`.
pub fn run_proposal(g: &SimGraph, x: usize, y: usize) -> Result<ProposalRun> {
    let delta = g.max_degree();
    if y == 0 || y > delta || x > delta {
        return Err(Error::Range(format!("need 1 ≤ y ≤ Δ and 0 ≤ x ≤ Δ, got x = {x}, y = {y}, Δ = {delta}")));
    }
    let mut white: Vec<NodeState> = (0..g.node_count(Side::White))
        .map(|v| NodeState::new(g.degree(Side::White, v)))
        .collect();
    let mut black: Vec<NodeState> = (0..g.node_count(Side::Black))
        .map(|v| NodeState::new(g.degree(Side::Black, v)))
        .collect();
    let mut transcript = Transcript::default();

    if y == delta {
        return Ok(ProposalRun {
            labeling: OutputLabeling {
                labels: vec![MatchLabel::M; g.edge_count()],
            },
            transcript,
            white,
            black,
        });
    }
    let k = (delta - x).div_ceil(y);
    if k == 0 {
        return Ok(ProposalRun {
            labeling: OutputLabeling {
                labels: vec![MatchLabel::X; g.edge_count()],
            },
            transcript,
            white,
            black,
        });
    }
    // Equal ceilings: run the x = 0 schedule with black starting, one round
    // shorter.
    let black_starts = delta.div_ceil(y) == k;
    let rounds = if black_starts { 2 * k - 1 } else { 2 * k };
    debug_assert_eq!(rounds, t_bound(delta, x, y).expect("valid range"));

    for round in 1..=rounds {
        let white_active = (round % 2 == 1) != black_starts;
        let active_side = if white_active { Side::White } else { Side::Black };
        let (act, pas) = if white_active {
            (&mut white, &mut black)
        } else {
            (&mut black, &mut white)
        };
        // Sends are decided from the states at the start of the round, then
        // delivered together.
        let mut sent = Vec::new();
        for (v, st) in act.iter_mut().enumerate() {
            if st.terminated() {
                continue;
            }
            if let Some(&e) = st.r.iter().next() {
                st.r.remove(&e);
                st.m.insert(e);
                sent.push(Message {
                    round,
                    side: active_side,
                    node: v,
                    port: e,
                    kind: MessageKind::Accept,
                });
            } else {
                let chosen: Vec<usize> = st.f.iter().copied().take(y).collect();
                for p in chosen {
                    st.f.remove(&p);
                    st.s.insert(p);
                    sent.push(Message {
                        round,
                        side: active_side,
                        node: v,
                        port: p,
                        kind: MessageKind::Propose,
                    });
                }
            }
        }
        let done: Vec<bool> = pas.iter().map(NodeState::terminated).collect();
        for msg in &sent {
            let e = g.node_edges(active_side, msg.node)[msg.port];
            let (u, port) = g.across(active_side, e);
            if done[u] {
                continue;
            }
            let st = &mut pas[u];
            match msg.kind {
                MessageKind::Accept => {
                    st.s.remove(&port);
                    st.m.insert(port);
                }
                MessageKind::Propose => {
                    st.f.remove(&port);
                    st.r.insert(port);
                }
            }
        }
        transcript.messages.extend(sent);
    }
    transcript.rounds_used = rounds;

    // White nodes output: an unmatched white node holding proposals accepts
    // the lowest one without telling anybody.
    for (v, st) in white.iter_mut().enumerate() {
        if !st.terminated() {
            if let Some(&e) = st.r.iter().next() {
                st.r.remove(&e);
                st.m.insert(e);
                transcript.final_accepts.push((v, e));
            }
        }
    }

    let mut labels = vec![MatchLabel::X; g.edge_count()];
    for (v, st) in white.iter().enumerate() {
        for (port, &e) in g.node_edges(Side::White, v).iter().enumerate() {
            labels[e] = if st.terminated() {
                if st.m.contains(&port) {
                    MatchLabel::M
                } else {
                    MatchLabel::O
                }
            } else if black_starts || st.s.contains(&port) {
                MatchLabel::P
            } else {
                MatchLabel::X
            };
        }
    }
    Ok(ProposalRun {
        labeling: OutputLabeling { labels },
        transcript,
        white,
        black,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::graph::{complete_bipartite, gen_regular_bipartite};

    #[test]
    fn bmm_on_complete_graph() {
        let g = complete_bipartite(3);
        let run = run_proposal(&g, 0, 1).unwrap();
        assert_eq!(run.transcript.rounds_used, 5);
        for w in 0..3 {
            let m = g
                .node_edges(Side::White, w)
                .iter()
                .filter(|&&e| run.labeling.matched(e))
                .count();
            assert_eq!(m, 1);
        }
    }

    #[test]
    fn states_stay_disjoint_and_edges_carry_one_proposal() {
        let g = gen_regular_bipartite(200, 4, 3, false).unwrap();
        let run = run_proposal(&g, 1, 1).unwrap();
        assert_eq!(run.transcript.rounds_used, 6);
        assert!(run.white.iter().chain(&run.black).all(NodeState::is_disjoint));
        let mut proposals = BTreeSet::new();
        for m in run.transcript.messages.iter().filter(|m| m.kind == MessageKind::Propose) {
            let e = g.node_edges(m.side, m.node)[m.port];
            assert!(proposals.insert(e), "edge {e} carries two proposals");
        }
    }

    #[test]
    fn trivial_cases() {
        let g = complete_bipartite(3);
        let all = run_proposal(&g, 0, 3).unwrap();
        assert_eq!(all.transcript.rounds_used, 0);
        assert!(all.labeling.labels.iter().all(|&l| l == MatchLabel::M));
        let none = run_proposal(&g, 3, 1).unwrap();
        assert!(none.labeling.labels.iter().all(|&l| l == MatchLabel::X));
    }

    #[test]
    fn deterministic() {
        let g = gen_regular_bipartite(100, 5, 11, false).unwrap();
        let a = run_proposal(&g, 2, 2).unwrap();
        let b = run_proposal(&g, 2, 2).unwrap();
        assert_eq!(a.labeling, b.labeling);
        assert_eq!(a.transcript, b.transcript);
    }
}
