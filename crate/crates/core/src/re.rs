//! One round elimination step.
//!
//! For `RE_B` the black side is *universal*: the new black constraint holds
//! the maximal Δ-multisets of nonempty label sets such that every way of
//! picking one label per set gives a configuration of the old black
//! constraint. The white side is *existential*: a multiset of sets is allowed
//! when some pick lies in the old white constraint. `RE_W` swaps the roles.
//!
//! Maximal configurations only ever contain sets that are closed upward
//! under the strength preorder of the universal constraint, so the search
//! only considers those.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{
    expand_counts, render_with_sets, CondensedConfiguration, Constraint, Group, Label, Problem, Side, Term,
    DEFAULT_EXPANSION_CAP,
};
use crate::relax::strength_matrix;

/// Resource guards for a step. Exceeding one is an error, never a silent
/// truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReLimits {
    pub max_delta: usize,
    pub max_labels: usize,
    /// Search nodes visited by the universal enumeration.
    pub max_nodes: u64,
}

impl Default for ReLimits {
    fn default() -> Self {
        ReLimits {
            max_delta: 10,
            max_labels: 6,
            max_nodes: 200_000_000,
        }
    }
}

/// Packed nibble counts allow Δ ≤ 15 and at most 16 labels.
const PACK_MAX_DELTA: usize = 15;
const PACK_MAX_LABELS: usize = 16;

#[derive(Clone, Debug)]
pub struct RawStepResult {
    pub source: Problem,
    /// The universal side of the step (`Black` for `RE_B`).
    pub side: Side,
    /// The step result, over one fresh label per set.
    pub result: Problem,
    /// The source labels each result label stands for.
    pub sets: BTreeMap<Label, Group>,
}

impl RawStepResult {
    pub fn set_of(&self, label: &Label) -> Option<Group> {
        self.sets.get(label).copied()
    }

    pub fn label_of(&self, set: Group) -> Option<&Label> {
        self.sets.iter().find(|(_, &g)| g == set).map(|(l, _)| l)
    }

    pub fn provenance(&self) -> BTreeMap<Label, Vec<Label>> {
        self.sets
            .iter()
            .map(|(l, g)| (l.clone(), self.source.labels_of(*g).into_iter().cloned().collect()))
            .collect()
    }

    pub fn render(&self) -> String {
        render_with_sets(&self.result, &self.provenance())
    }
}

pub fn re_black(p: &Problem) -> Result<RawStepResult> {
    re_step(p, Side::Black, &ReLimits::default())
}

pub fn re_white(p: &Problem) -> Result<RawStepResult> {
    re_step(p, Side::White, &ReLimits::default())
}

/// Runs a step whose universal side is `side`.
pub fn re_step(p: &Problem, side: Side, limits: &ReLimits) -> Result<RawStepResult> {
    check_limits(p, limits)?;
    let n = p.alphabet().len();
    let universal = Universal::new(p.constraint(side), n)?;
    let configs = universal.maximal_configs(p.delta(), limits.max_nodes)?;
    build_result(p, side, &configs)
}

fn check_limits(p: &Problem, limits: &ReLimits) -> Result<()> {
    let max_delta = limits.max_delta.min(PACK_MAX_DELTA);
    if p.delta() > max_delta {
        return Err(Error::DeltaLimit {
            delta: p.delta(),
            limit: max_delta,
        });
    }
    let max_labels = limits.max_labels.min(PACK_MAX_LABELS);
    if p.alphabet().len() > max_labels {
        return Err(Error::AlphabetLimit {
            size: p.alphabet().len(),
            limit: max_labels,
        });
    }
    Ok(())
}

/// Assembles the result problem from the maximal universal configurations.
fn build_result(p: &Problem, side: Side, configs: &[Vec<Group>]) -> Result<RawStepResult> {
    let used: BTreeSet<Group> = configs.iter().flatten().copied().collect();
    let used: Vec<Group> = used.into_iter().collect();
    let names = set_names(p, &used)?;
    let index_of = |g: Group| used.iter().position(|&u| u == g).expect("set is used");

    let universal = Constraint::new(configs.iter().map(|cfg| {
        CondensedConfiguration::new(cfg.iter().map(|&g| Term::new(Group::singleton(index_of(g)), 1)))
    }));
    let existential = substitute(p.constraint(side.opposite()), &used);

    let (white, black) = match side {
        Side::Black => (existential, universal),
        Side::White => (universal, existential),
    };
    let result = Problem::new(p.delta(), names.clone(), white, black)?;
    let sets = names.into_iter().zip(used).collect();
    Ok(RawStepResult {
        source: p.clone(),
        side,
        result,
        sets,
    })
}

/// Existential side: each group `G` becomes the disjunction of the sets
/// meeting `G`. Groups with no such set void their configuration.
pub(crate) fn substitute(c: &Constraint, sets: &[Group]) -> Constraint {
    c.map_groups(|g| Group::from_indices((0..sets.len()).filter(|&i| sets[i].intersects(g))))
}

/// Names a set by its members: `AB` for single-character members, `A1_B`
/// otherwise, falling back to `S<i>` on collision.
fn set_names(p: &Problem, sets: &[Group]) -> Result<Vec<Label>> {
    let mut names: Vec<String> = sets
        .iter()
        .map(|&g| {
            let labels = p.labels_of(g);
            let sep = if labels.iter().all(|l| l.is_short()) { "" } else { "_" };
            labels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(sep)
        })
        .collect();
    let distinct: BTreeSet<&String> = names.iter().collect();
    if distinct.len() != names.len() {
        names = (0..sets.len()).map(|i| format!("S{i}")).collect();
    }
    names.into_iter().map(Label::new).collect()
}

fn unit(label: usize) -> u64 {
    1u64 << (4 * label)
}

fn pack(counts: &[u8]) -> u64 {
    counts
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << (4 * i)))
}

/// All multisets obtained by picking one label from each set.
fn picks(sets: &[Group]) -> Vec<u64> {
    let mut cur = vec![0u64];
    for &s in sets {
        let mut next: Vec<u64> = cur
            .iter()
            .flat_map(|&p| s.members().map(move |l| p + unit(l)))
            .collect();
        next.sort_unstable();
        next.dedup();
        cur = next;
    }
    cur
}

/// The universal constraint in packed form, with all its sub-multisets.
pub(crate) struct Universal {
    n: usize,
    members: HashSet<u64>,
    prefixes: HashSet<u64>,
    candidates: Vec<Group>,
}

impl Universal {
    pub(crate) fn new(c: &Constraint, n: usize) -> Result<Universal> {
        let counts = expand_counts(c, n, DEFAULT_EXPANSION_CAP)?;
        let members: HashSet<u64> = counts.iter().map(|k| pack(k)).collect();
        let mut prefixes = HashSet::new();
        for k in &counts {
            sub_multisets(k, 0, 0, &mut prefixes);
        }
        let stronger = strength_matrix(&counts, n);
        let candidates = upward_closed_sets(&stronger, n);
        Ok(Universal {
            n,
            members,
            prefixes,
            candidates,
        })
    }

    pub(crate) fn is_universal(&self, cfg: &[Group]) -> bool {
        picks(cfg).iter().all(|p| self.members.contains(p))
    }

    /// No single label can be added to any set without breaking universality.
    pub(crate) fn is_maximal(&self, cfg: &[Group]) -> bool {
        let full = Group::full(self.n);
        let mut seen = BTreeSet::new();
        for (i, &s) in cfg.iter().enumerate() {
            if !seen.insert(s) {
                continue;
            }
            let others: Vec<Group> = cfg
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &g)| g)
                .collect();
            let rest = picks(&others);
            for l in full.members().filter(|&l| !s.contains(l)) {
                if rest.iter().all(|q| self.members.contains(&(q + unit(l)))) {
                    return false;
                }
            }
        }
        true
    }

    /// Non-decreasing sequences (by candidate index) of Δ candidate sets that
    /// are universal, filtered to the maximal ones.
    pub(crate) fn maximal_configs(&self, delta: usize, max_nodes: u64) -> Result<Vec<Vec<Group>>> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(delta);
        let mut nodes = 0u64;
        self.dfs(delta, 0, &[0u64], &mut stack, &mut out, &mut nodes, max_nodes)?;
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        delta: usize,
        from: usize,
        partial: &[u64],
        stack: &mut Vec<Group>,
        out: &mut Vec<Vec<Group>>,
        nodes: &mut u64,
        max_nodes: u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > max_nodes {
            return Err(Error::EnumerationBudget(max_nodes));
        }
        if stack.len() == delta {
            if self.is_maximal(stack) {
                out.push(stack.clone());
            }
            return Ok(());
        }
        for c in from..self.candidates.len() {
            let set = self.candidates[c];
            let mut next: Vec<u64> = Vec::with_capacity(partial.len() * set.len());
            let mut ok = true;
            'outer: for &p in partial {
                for l in set.members() {
                    let q = p + unit(l);
                    if !self.prefixes.contains(&q) {
                        ok = false;
                        break 'outer;
                    }
                    next.push(q);
                }
            }
            if !ok {
                continue;
            }
            next.sort_unstable();
            next.dedup();
            stack.push(set);
            let r = self.dfs(delta, c, &next, stack, out, nodes, max_nodes);
            stack.pop();
            r?;
        }
        Ok(())
    }
}

fn sub_multisets(counts: &[u8], i: usize, acc: u64, out: &mut HashSet<u64>) {
    if i == counts.len() {
        out.insert(acc);
        return;
    }
    for k in 0..=counts[i] {
        sub_multisets(counts, i + 1, acc | ((k as u64) << (4 * i)), out);
    }
}

/// Nonempty sets `S` with `K ∈ S` and `L ≥ K` implying `L ∈ S`, larger first.
fn upward_closed_sets(stronger: &[Vec<bool>], n: usize) -> Vec<Group> {
    let mut out: Vec<Group> = (1u64..(1u64 << n))
        .map(Group::from_bits)
        .filter(|g| {
            g.members()
                .all(|k| (0..n).all(|l| !stronger[k][l] || g.contains(l)))
        })
        .collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    out
}

/// Public wrapper: whether a multiset of sets (given by source-label groups)
/// passes the universal test of `side`.
pub fn is_universal(cfg: &[Group], p: &Problem, side: Side) -> Result<bool> {
    Ok(Universal::new(p.constraint(side), p.alphabet().len())?.is_universal(cfg))
}

/// Whether a universal multiset of sets is maximal for `side`.
pub fn is_maximal(cfg: &[Group], p: &Problem, side: Side) -> Result<bool> {
    Ok(Universal::new(p.constraint(side), p.alphabet().len())?.is_maximal(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{equal_up_to_renaming, parse_problem};

    fn sinkless(delta: usize) -> Problem {
        parse_problem(&format!(
            "delta: {delta}\nwhite:\nB [AB]^{d}\nblack:\nA [AB]^{d}\n",
            d = delta - 1
        ))
        .unwrap()
    }

    #[test]
    fn sinkless_orientation_black_step() {
        let r = re_black(&sinkless(3)).unwrap();
        assert_eq!(
            r.render(),
            "delta: 3\nwhite:\nAB [A AB]^2\nblack:\nA AB^2\nsets:\nA = [A]\nAB = [AB]\n"
        );
    }

    /// Closes a single-configuration set under replacing a label by one
    /// that is at most as strong for the other side.
    fn weaken_closure(configs: &HashSet<Vec<u8>>, other: &HashSet<Vec<u8>>, n: usize) -> BTreeSet<Vec<u8>> {
        let stronger = strength_matrix(other, n);
        let mut out: BTreeSet<Vec<u8>> = configs.iter().cloned().collect();
        let mut frontier: Vec<Vec<u8>> = out.iter().cloned().collect();
        while let Some(c) = frontier.pop() {
            for l in (0..n).filter(|&l| c[l] > 0) {
                for k in (0..n).filter(|&k| k != l && stronger[k][l]) {
                    let mut d = c.clone();
                    d[l] -= 1;
                    d[k] += 1;
                    if out.insert(d.clone()) {
                        frontier.push(d);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn sinkless_orientation_returns_after_two_steps() {
        for delta in 3..=5 {
            let p = sinkless(delta);
            let one = re_black(&p).unwrap().result;
            assert_eq!(one.alphabet().len(), 2);
            let two = re_white(&one).unwrap().result;
            // The universal side keeps only maximal configurations, so the
            // problem comes back up to configurations dominated for the
            // other side.
            let map = [("A_AB", "A"), ("AB", "B")]
                .into_iter()
                .map(|(a, b)| (Label::new(a).unwrap(), Label::new(b).unwrap()))
                .collect();
            let two = two.rename(&map).unwrap();
            assert_eq!(two.alphabet(), p.alphabet());
            let n = 2;
            let e = |q: &Problem, s: Side| expand_counts(q.constraint(s), n, DEFAULT_EXPANSION_CAP).unwrap();
            assert_eq!(e(&two, Side::Black), e(&p, Side::Black));
            let closed = weaken_closure(&e(&two, Side::White), &e(&two, Side::Black), n);
            let want: BTreeSet<Vec<u8>> = e(&p, Side::White).into_iter().collect();
            assert_eq!(closed, want);
            assert!(equal_up_to_renaming(&two, &p).unwrap().is_none());
        }
    }

    #[test]
    fn all_words_give_the_full_set() {
        let p = parse_problem("delta: 3\nwhite:\nA^3\nblack:\n[AB]^3\n").unwrap();
        let r = re_black(&p).unwrap();
        assert_eq!(r.result.black().len(), 1);
        assert_eq!(r.result.black().configs()[0].terms(), &[Term::new(Group::singleton(0), 3)]);
        assert_eq!(r.set_of(r.result.label(0)), Some(Group::full(2)));
    }

    #[test]
    fn maximality_examples() {
        let p = sinkless(3);
        let a = Group::singleton(0);
        let ab = Group::full(2);
        assert!(is_universal(&[a, ab, ab], &p, Side::Black).unwrap());
        assert!(is_maximal(&[a, ab, ab], &p, Side::Black).unwrap());
        assert!(is_universal(&[a, a, ab], &p, Side::Black).unwrap());
        assert!(!is_maximal(&[a, a, ab], &p, Side::Black).unwrap());
    }

    #[test]
    fn limits_are_enforced() {
        let p = sinkless(3);
        let tight = ReLimits {
            max_delta: 2,
            ..ReLimits::default()
        };
        assert!(matches!(re_step(&p, Side::Black, &tight), Err(Error::DeltaLimit { .. })));
        let tiny = ReLimits {
            max_nodes: 2,
            ..ReLimits::default()
        };
        assert!(matches!(re_step(&p, Side::Black, &tiny), Err(Error::EnumerationBudget(2))));
    }
}
