//! Label strength, diagrams and the relaxation operations.
//!
//! `L` is at least as strong as `K` for a constraint when replacing one `K`
//! by `L` in any allowed configuration gives an allowed configuration.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{
    contains, expand_counts, render_group, CondensedConfiguration, Constraint, Group, Label, NamedConfiguration,
    Problem, Side, SingleConfiguration, Term, DEFAULT_EXPANSION_CAP,
};
use crate::re::{substitute, RawStepResult};
use crate::sim::SimGraph;

/// `m[k][l]`: label `l` is at least as strong as label `k`.
pub(crate) fn strength_matrix(configs: &HashSet<Vec<u8>>, n: usize) -> Vec<Vec<bool>> {
    let mut m = vec![vec![true; n]; n];
    for c in configs {
        for k in (0..n).filter(|&k| c[k] > 0) {
            for l in 0..n {
                if l == k || !m[k][l] {
                    continue;
                }
                let mut d = c.clone();
                d[k] -= 1;
                d[l] += 1;
                if !configs.contains(&d) {
                    m[k][l] = false;
                }
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrengthPreorder {
    pub side: Side,
    pub labels: Vec<Label>,
    /// `at_least[k][l]`: `l` is at least as strong as `k`.
    at_least: Vec<Vec<bool>>,
    /// Set when the constraint was too large to expand and the relation was
    /// derived slot-wise; it may then miss some pairs but never adds one.
    pub conservative: bool,
}

impl StrengthPreorder {
    pub fn at_least_as_strong(&self, k: usize, l: usize) -> bool {
        self.at_least[k][l]
    }

    pub fn stronger(&self, k: usize, l: usize) -> bool {
        self.at_least[k][l] && !self.at_least[l][k]
    }

    pub fn equally_strong(&self, k: usize, l: usize) -> bool {
        self.at_least[k][l] && self.at_least[l][k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l.as_str() == name)
    }

    /// Pairs `(K, L)` with `K ≤ L`, by name.
    pub fn pairs(&self) -> Vec<(Label, Label)> {
        let n = self.labels.len();
        let mut out = Vec::new();
        for k in 0..n {
            for l in 0..n {
                if self.at_least[k][l] {
                    out.push((self.labels[k].clone(), self.labels[l].clone()));
                }
            }
        }
        out
    }
}

/// The strength preorder of the constraint of `side`.
pub fn strength_order(p: &Problem, side: Side) -> Result<StrengthPreorder> {
    strength_order_with_cap(p, side, DEFAULT_EXPANSION_CAP)
}

pub fn strength_order_with_cap(p: &Problem, side: Side, cap: usize) -> Result<StrengthPreorder> {
    let n = p.alphabet().len();
    let c = p.constraint(side);
    let (at_least, conservative) = match expand_counts(c, n, cap) {
        Ok(configs) => (strength_matrix(&configs, n), false),
        Err(Error::ExpansionBudget(_)) => (slotwise_strength(c, n), true),
        Err(e) => return Err(e),
    };
    Ok(StrengthPreorder {
        side,
        labels: p.alphabet().to_vec(),
        at_least,
        conservative,
    })
}

/// Sufficient condition: `L` is admitted by every group that admits `K`, so
/// a replacement never leaves its condensed configuration.
fn slotwise_strength(c: &Constraint, n: usize) -> Vec<Vec<bool>> {
    let mut m = vec![vec![true; n]; n];
    for cfg in c.configs() {
        for t in cfg.terms() {
            for k in t.group.members() {
                for (l, ok) in m[k].iter_mut().enumerate() {
                    if !t.group.contains(l) {
                        *ok = false;
                    }
                }
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub side: Side,
    pub labels: Vec<Label>,
    /// Arrows `K -> L`, by label index.
    pub arrows: BTreeSet<(usize, usize)>,
    pub conservative: bool,
}

impl Diagram {
    pub fn has_arrow(&self, from: &str, to: &str) -> bool {
        let idx = |s: &str| self.labels.iter().position(|l| l.as_str() == s);
        match (idx(from), idx(to)) {
            (Some(k), Some(l)) => self.arrows.contains(&(k, l)),
            _ => false,
        }
    }

    pub fn named_arrows(&self) -> Vec<(Label, Label)> {
        self.arrows
            .iter()
            .map(|&(k, l)| (self.labels[k].clone(), self.labels[l].clone()))
            .collect()
    }

    /// One `K -> L` line per arrow.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, l) in self.named_arrows() {
            let _ = writeln!(out, "{k} -> {l}");
        }
        out
    }
}

pub fn diagram(p: &Problem, side: Side) -> Result<Diagram> {
    Ok(diagram_of(&strength_order(p, side)?))
}

/// Arrows for equally strong pairs and for covering pairs of the strict order.
pub fn diagram_of(order: &StrengthPreorder) -> Diagram {
    let n = order.labels.len();
    let mut arrows = BTreeSet::new();
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let covering = order.stronger(k, l)
                && !(0..n).any(|m| order.stronger(k, m) && order.stronger(m, l));
            if order.equally_strong(k, l) || covering {
                arrows.insert((k, l));
            }
        }
    }
    Diagram {
        side: order.side,
        labels: order.labels.clone(),
        arrows,
        conservative: order.conservative,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxKind {
    Merge,
    ReplaceEverywhere,
    SetExtension,
    AddConfigurations,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxationMap {
    pub assignment: BTreeMap<Label, Label>,
    /// The constraint that is rewritten.
    pub side: Side,
    pub kind: RelaxKind,
}

impl RelaxationMap {
    pub fn merge(side: Side, pairs: &[(&str, &str)]) -> Result<RelaxationMap> {
        let assignment = pairs
            .iter()
            .map(|(a, b)| Ok((Label::new(*a)?, Label::new(*b)?)))
            .collect::<Result<_>>()?;
        Ok(RelaxationMap {
            assignment,
            side,
            kind: RelaxKind::Merge,
        })
    }

    pub fn apply(&self, label: &Label) -> Label {
        self.assignment.get(label).cloned().unwrap_or_else(|| label.clone())
    }
}

/// Replaces labels `K` by `L` in the constraint of `m.side`, each merge
/// justified by `L` being at least as strong as `K` on the opposite side.
/// Labels that disappear from the rewritten side are then pruned from the
/// opposite side.
pub fn merge_labels(p: &Problem, m: &RelaxationMap) -> Result<Problem> {
    let order = strength_order(p, m.side.opposite())?;
    for (k, l) in &m.assignment {
        let ki = p.index_of(k.as_str()).ok_or_else(|| Error::UnknownLabel(k.to_string()))?;
        let li = p.index_of(l.as_str()).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
        if !order.at_least_as_strong(ki, li) {
            return Err(Error::UnjustifiedMerge {
                side: m.side,
                from: k.to_string(),
                to: l.to_string(),
            });
        }
    }
    merge_labels_unchecked(p, m)
}

/// The rewrite of [`merge_labels`] without the justification check.
pub fn merge_labels_unchecked(p: &Problem, m: &RelaxationMap) -> Result<Problem> {
    for l in m.assignment.values() {
        if p.index_of(l.as_str()).is_none() {
            return Err(Error::UnknownLabel(l.to_string()));
        }
    }
    p.map_labels(Some(m.side), |l| m.apply(l))?
        .prune_unusable(m.side.opposite())
}

/// Replaces `k` by `l` in both constraints. Always a relaxation.
pub fn replace_everywhere(p: &Problem, k: &str, l: &str) -> Result<Problem> {
    for name in [k, l] {
        if p.index_of(name).is_none() {
            return Err(Error::UnknownLabel(name.to_string()));
        }
    }
    p.map_labels(None, |x| if x.as_str() == k { Label::new(l).expect("valid") } else { x.clone() })
}

/// Adds configurations to one side.
pub fn add_configurations(p: &Problem, side: Side, cfgs: &[NamedConfiguration]) -> Result<Problem> {
    p.with_configurations(side, cfgs)
}

/// A configuration of sets of source labels, each term a set and its
/// multiplicity: `[MPOX] M [POX]^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetConfiguration {
    pub terms: Vec<(Group, usize)>,
}

impl SetConfiguration {
    pub fn new(terms: impl IntoIterator<Item = (Group, usize)>) -> SetConfiguration {
        let mut merged: BTreeMap<Group, usize> = BTreeMap::new();
        for (g, m) in terms {
            if m > 0 {
                *merged.entry(g).or_insert(0) += m;
            }
        }
        SetConfiguration {
            terms: merged.into_iter().collect(),
        }
    }

    /// Parses the configuration syntax, reading each bracket as one set of
    /// labels of `source`.
    pub fn parse(text: &str, source: &Problem) -> Result<SetConfiguration> {
        let named = crate::problem::parse_named_configuration(text)?;
        let mut terms = Vec::new();
        for (names, m) in named.terms() {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            terms.push((source.group_of(&refs)?, *m));
        }
        Ok(SetConfiguration::new(terms))
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.1).sum()
    }

    pub fn slots(&self) -> Vec<Group> {
        self.terms
            .iter()
            .flat_map(|&(g, m)| std::iter::repeat_n(g, m))
            .collect()
    }

    pub fn render(&self, source: &Problem) -> String {
        self.terms
            .iter()
            .map(|&(g, m)| {
                let labels = source.labels_of(g);
                let mut s = render_group(&labels);
                if labels.len() == 1 {
                    s = format!("[{s}]");
                }
                if m > 1 {
                    s = format!("{s}^{m}");
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Finds an assignment of the slots of `cfg` to the slots of `target` with
/// each set contained in its image. Returns, for each slot of `cfg`, the
/// target set it extends to.
pub fn extend_into(cfg: &[Group], target: &SetConfiguration) -> Option<Vec<Group>> {
    if cfg.len() != target.degree() {
        return None;
    }
    let mut order: Vec<usize> = (0..cfg.len()).collect();
    // Sets with few possible images first.
    order.sort_by_key(|&i| target.terms.iter().filter(|t| cfg[i].is_subset_of(t.0)).count());
    let mut capacity: Vec<usize> = target.terms.iter().map(|t| t.1).collect();
    let mut image = vec![Group::EMPTY; cfg.len()];
    if embed(cfg, &order, 0, target, &mut capacity, &mut image) {
        Some(image)
    } else {
        None
    }
}

fn embed(
    cfg: &[Group],
    order: &[usize],
    i: usize,
    target: &SetConfiguration,
    capacity: &mut [usize],
    image: &mut [Group],
) -> bool {
    if i == order.len() {
        return true;
    }
    let slot = order[i];
    for (t, &(g, _)) in target.terms.iter().enumerate() {
        if capacity[t] == 0 || !cfg[slot].is_subset_of(g) {
            continue;
        }
        capacity[t] -= 1;
        image[slot] = g;
        if embed(cfg, order, i + 1, target, capacity, image) {
            return true;
        }
        capacity[t] += 1;
    }
    false
}

/// Relaxes the universal side of a step result to the given target
/// configurations: every computed configuration must extend into a target
/// by enlarging its sets. The existential side is recomputed over the target
/// sets and the sets are renamed; sets without an entry in `renaming` are
/// named by their members.
pub fn relax_to_targets(
    r: &RawStepResult,
    targets: &[SetConfiguration],
    renaming: &BTreeMap<Group, Label>,
) -> Result<Problem> {
    let universal = r.side;
    let result = &r.result;
    for cfg in result.constraint(universal).configs() {
        for single in singles_of_setlabels(cfg) {
            let sets: Vec<Group> = single
                .iter()
                .map(|&i| r.set_of(result.label(i)).expect("result label is a set"))
                .collect();
            if !targets.iter().any(|t| extend_into(&sets, t).is_some()) {
                let shown: Vec<String> = single.iter().map(|&i| result.label(i).to_string()).collect();
                return Err(Error::NotExtendable {
                    config: shown.join(" "),
                });
            }
        }
    }
    build_from_sets(&r.source, universal, targets, renaming)
}

/// Problem whose `universal` side is `targets` and whose other side is the
/// substitution of the source's other side over the target sets.
pub(crate) fn build_from_sets(
    source: &Problem,
    universal: Side,
    targets: &[SetConfiguration],
    renaming: &BTreeMap<Group, Label>,
) -> Result<Problem> {
    let used: BTreeSet<Group> = targets.iter().flat_map(|t| t.terms.iter().map(|x| x.0)).collect();
    let used: Vec<Group> = used.into_iter().collect();
    if used.iter().any(|g| g.is_empty()) {
        return Err(Error::Range("target sets must be nonempty".into()));
    }
    let mut names = Vec::with_capacity(used.len());
    for &g in &used {
        let name = match renaming.get(&g) {
            Some(l) => l.clone(),
            None => default_set_name(source, g)?,
        };
        names.push(name);
    }
    let distinct: BTreeSet<&Label> = names.iter().collect();
    if distinct.len() != names.len() {
        return Err(Error::RenamingNotInjective("two target sets receive the same name".into()));
    }
    let index_of = |g: Group| used.iter().position(|&u| u == g).expect("used set");
    let u = Constraint::new(targets.iter().map(|t| {
        CondensedConfiguration::new(
            t.terms
                .iter()
                .map(|&(g, m)| Term::new(Group::singleton(index_of(g)), m)),
        )
    }));
    let e = substitute(source.constraint(universal.opposite()), &used);
    let (white, black) = match universal {
        Side::White => (u, e),
        Side::Black => (e, u),
    };
    Problem::new(source.delta(), names, white, black)
}

/// Name of a set of source labels: the member names concatenated, joined by
/// `_` when some name is longer than one character.
pub fn default_set_name(source: &Problem, g: Group) -> Result<Label> {
    let labels = source.labels_of(g);
    let sep = if labels.iter().all(|l| l.is_short()) { "" } else { "_" };
    Label::new(labels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(sep))
}

/// Slot lists (label indices) of every single configuration of `cfg`.
fn singles_of_setlabels(cfg: &CondensedConfiguration) -> Vec<Vec<usize>> {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    let slots = cfg.slots();
    let mut cur = Vec::with_capacity(slots.len());
    fn rec(slots: &[Group], i: usize, cur: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if i == slots.len() {
            let mut s = cur.clone();
            s.sort_unstable();
            out.insert(s);
            return;
        }
        for l in slots[i].members() {
            cur.push(l);
            rec(slots, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(&slots, 0, &mut cur, &mut out);
    out.into_iter().collect()
}

/// A labeled graph used to property-test a relaxation: one label per edge.
#[derive(Clone, Debug)]
pub struct LabeledSample {
    pub graph: SimGraph,
    pub labels: Vec<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub sample: usize,
    pub side: Side,
    pub node: usize,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleVerdict {
    Passed,
    /// A sample is not a valid output of the source problem.
    InvalidSample(Violation),
    /// The mapped output violates the relaxed problem.
    Failed(Violation),
}

/// Applies `m` edge-wise to each sample (a valid output of `p`) and checks
/// the result against `q` at every node of degree Δ.
pub fn check_relaxation_on_samples(
    p: &Problem,
    q: &Problem,
    m: &RelaxationMap,
    samples: &[LabeledSample],
) -> SampleVerdict {
    for (si, s) in samples.iter().enumerate() {
        if let Some(v) = first_violation(p, &s.graph, &s.labels, si) {
            return SampleVerdict::InvalidSample(v);
        }
        let mapped: Vec<Label> = s.labels.iter().map(|l| m.apply(l)).collect();
        if let Some(v) = first_violation(q, &s.graph, &mapped, si) {
            return SampleVerdict::Failed(v);
        }
    }
    SampleVerdict::Passed
}

/// The first node of degree Δ whose incident labels violate `p`.
pub fn first_violation(p: &Problem, g: &SimGraph, labels: &[Label], sample: usize) -> Option<Violation> {
    for side in [Side::White, Side::Black] {
        for node in 0..g.node_count(side) {
            let edges = g.node_edges(side, node);
            if edges.len() != p.delta() {
                continue;
            }
            let ok = edges
                .iter()
                .map(|&e| p.index_of(labels[e].as_str()))
                .collect::<Option<Vec<usize>>>()
                .is_some_and(|idx| contains(p.constraint(side), &SingleConfiguration::new(idx)));
            if !ok {
                return Some(Violation {
                    sample,
                    side,
                    node,
                    edges: edges.to_vec(),
                });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{parse_problem, render_problem};
    use crate::re::re_black;

    const BMM: &str = "delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n";

    #[test]
    fn bmm_black_strength() {
        let p = parse_problem(BMM).unwrap();
        let o = strength_order(&p, Side::Black).unwrap();
        let (m, oi, pi) = (p.index_of("M").unwrap(), p.index_of("O").unwrap(), p.index_of("P").unwrap());
        assert!(o.stronger(pi, oi));
        assert!(!o.at_least_as_strong(oi, pi));
        assert!(!o.at_least_as_strong(m, oi));
    }

    #[test]
    fn equal_strength_gives_two_arrows() {
        let p = parse_problem("delta: 2\nwhite:\nA B\nblack:\n[AB]^2\n").unwrap();
        let d = diagram(&p, Side::Black).unwrap();
        assert_eq!(d.render(), "A -> B\nB -> A\n");
    }

    #[test]
    fn merge_requires_justification() {
        let p = parse_problem(BMM).unwrap();
        let bad = RelaxationMap::merge(Side::White, &[("O", "P")]).unwrap();
        assert!(matches!(merge_labels(&p, &bad), Err(Error::UnjustifiedMerge { .. })));
        let good = RelaxationMap::merge(Side::White, &[("P", "O")]).unwrap();
        let q = merge_labels(&p, &good).unwrap();
        assert_eq!(render_problem(&q), "delta: 3\nwhite:\nM O^2\nO^3\nblack:\nM O^2\nO^3\n");
    }

    #[test]
    fn replace_shrinks_alphabet() {
        let p = parse_problem(BMM).unwrap();
        let q = replace_everywhere(&p, "P", "O").unwrap();
        assert_eq!(q.alphabet().len(), 2);
        assert_eq!(replace_everywhere(&p, "P", "P").unwrap(), p);
    }

    #[test]
    fn own_universal_side_as_targets_is_identity() {
        let p = parse_problem("delta: 3\nwhite:\nB [AB]^2\nblack:\nA [AB]^2\n").unwrap();
        let r = re_black(&p).unwrap();
        let targets: Vec<SetConfiguration> = r
            .result
            .black()
            .configs()
            .iter()
            .map(|c| SetConfiguration::new(c.terms().iter().map(|t| {
                let l = r.result.label(t.group.members().next().unwrap());
                (r.set_of(l).unwrap(), t.mult)
            })))
            .collect();
        let q = relax_to_targets(&r, &targets, &BTreeMap::new()).unwrap();
        assert_eq!(q, r.result);
    }

    #[test]
    fn extension_is_a_multiset_embedding() {
        let a = Group::from_indices([0]);
        let ab = Group::from_indices([0, 1]);
        let b = Group::from_indices([1]);
        let t = SetConfiguration::new([(ab, 1), (a, 1)]);
        assert!(extend_into(&[a, b], &t).is_some());
        assert!(extend_into(&[b, b], &t).is_none());
    }
}
