use std::collections::BTreeSet;

use super::graph::SimGraph;
use super::proposal::{MatchLabel, OutputLabeling};
use crate::error::{Error, Result};
use crate::family::make_phi;
use crate::problem::{contains, Label, Problem, Side, SingleConfiguration};
use crate::relax::first_violation;
use crate::zero_round::ZeroRoundVerdict;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingVerdict {
    /// Nodes with more than `y` matched edges.
    pub packing: Vec<(Side, usize)>,
    /// Unmatched nodes with fewer than `min(deg, Δ − x)` matched neighbors.
    pub covering: Vec<(Side, usize)>,
    /// Nodes whose labels violate the encoded problem (regular graphs only).
    pub encoding: Vec<(Side, usize)>,
}

impl MatchingVerdict {
    pub fn valid(&self) -> bool {
        self.packing.is_empty() && self.covering.is_empty() && self.encoding.is_empty()
    }
}

/// Checks that the `M` edges form an x-maximal y-matching, with Δ the
/// maximum degree of `g`. On Δ-regular graphs the labeling is also checked
/// against the encoded problem `Φ^W_Δ(x, y)`.
pub fn check_xy_matching(g: &SimGraph, out: &OutputLabeling, x: usize, y: usize) -> Result<MatchingVerdict> {
    if out.labels.len() != g.edge_count() {
        return Err(Error::Graph("labeling does not cover every edge".into()));
    }
    let delta = g.max_degree();
    let mut verdict = MatchingVerdict::default();
    let matched_count = |side: Side, v: usize| g.node_edges(side, v).iter().filter(|&&e| out.matched(e)).count();
    for side in [Side::White, Side::Black] {
        for v in 0..g.node_count(side) {
            let m = matched_count(side, v);
            if m > y {
                verdict.packing.push((side, v));
            }
            if m == 0 {
                let neighbors: BTreeSet<usize> = g.node_edges(side, v).iter().map(|&e| g.across(side, e).0).collect();
                let matched = neighbors
                    .iter()
                    .filter(|&&u| matched_count(side.opposite(), u) > 0)
                    .count();
                let need = g.degree(side, v).min(delta.saturating_sub(x));
                if matched < need {
                    verdict.covering.push((side, v));
                }
            }
        }
    }
    if delta >= 2 && g.is_regular(delta) && x <= delta && (1..=delta).contains(&y) {
        let phi = make_phi(delta, x, y)?;
        let labels = out.to_labels();
        for side in [Side::White, Side::Black] {
            for v in 0..g.node_count(side) {
                if !node_ok(&phi, g, side, v, &labels) {
                    verdict.encoding.push((side, v));
                }
            }
        }
    }
    Ok(verdict)
}

fn node_ok(p: &Problem, g: &SimGraph, side: Side, v: usize, labels: &[Label]) -> bool {
    g.node_edges(side, v)
        .iter()
        .map(|&e| p.index_of(labels[e].as_str()))
        .collect::<Option<Vec<usize>>>()
        .is_some_and(|idx| contains(p.constraint(side), &SingleConfiguration::new(idx)))
}

/// Every white node outputs `config[i]` on port `i`.
pub fn apply_white_configuration(g: &SimGraph, config: &[Label]) -> Result<Vec<Label>> {
    let mut labels: Vec<Option<Label>> = vec![None; g.edge_count()];
    for v in 0..g.node_count(Side::White) {
        let edges = g.node_edges(Side::White, v);
        if edges.len() != config.len() {
            return Err(Error::Graph(format!("white node {v} has degree {} ≠ Δ", edges.len())));
        }
        for (port, &e) in edges.iter().enumerate() {
            labels[e] = Some(config[port].clone());
        }
    }
    labels
        .into_iter()
        .collect::<Option<Vec<Label>>>()
        .ok_or_else(|| Error::Graph("edge without a white endpoint".into()))
}

/// Runs the 0-round white algorithm given by a witness: each white node
/// writes the witness configuration onto its ports in a fixed order.
pub fn run_zero_round_witness(p: &Problem, verdict: &ZeroRoundVerdict, g: &SimGraph) -> Result<Vec<Label>> {
    let witness = verdict.witness.as_ref().ok_or(Error::NoWitness)?;
    if !g.is_regular(p.delta()) {
        return Err(Error::Graph(format!("graph is not {}-regular", p.delta())));
    }
    let config: Vec<Label> = witness
        .config
        .labels()
        .iter()
        .map(|&l| p.label(l as usize).clone())
        .collect();
    apply_white_configuration(g, &config)
}

/// Whether a labeling satisfies both constraints of `p` at every node of
/// degree Δ.
pub fn labeling_valid(p: &Problem, g: &SimGraph, labels: &[Label]) -> bool {
    first_violation(p, g, labels, 0).is_none()
}

/// Matched-neighbor counts of unmatched nodes must reach `min(deg, bound)`.
pub fn unmatched_guarantee(g: &SimGraph, out: &OutputLabeling, bound: usize) -> bool {
    let matched = |side: Side, v: usize| g.node_edges(side, v).iter().any(|&e| out.labels[e] == MatchLabel::M);
    [Side::White, Side::Black].into_iter().all(|side| {
        (0..g.node_count(side)).all(|v| {
            matched(side, v) || {
                let n = g
                    .node_edges(side, v)
                    .iter()
                    .filter(|&&e| matched(side.opposite(), g.across(side, e).0))
                    .count();
                n >= g.degree(side, v).min(bound)
            }
        })
    })
}
