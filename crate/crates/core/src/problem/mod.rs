//! Locally checkable problems on 2-colored Δ-regular graphs.
//!
//! A [`Problem`] is a degree Δ, an alphabet of [`Label`]s and two
//! [`Constraint`]s, one per node color. Constraints are lists of
//! [`CondensedConfiguration`]s: multisets of disjunction [`Group`]s with
//! multiplicities summing to Δ. Everything is kept in a canonical form
//! (labels sorted by name, groups sorted by member list, configurations
//! sorted and deduplicated) so that rendering is deterministic.
//!
//! Condensation is syntax only. Two problems are semantically equal when
//! their constraints expand to the same sets of [`SingleConfiguration`]s;
//! see [`Problem::equivalent`].

mod expand;
mod rename;
mod text;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expand::{contains, expand, expand_with_cap, DEFAULT_EXPANSION_CAP};
pub(crate) use expand::expand_counts;
pub use rename::{canonical_key, equal_up_to_renaming, MAX_RENAMING_LABELS};
pub use text::{parse_named_configuration, parse_problem, parse_problem_with_sets, render_group, render_problem, render_with_sets};

/// Hard limit imposed by the bitmask representation of [`Group`].
pub const MAX_LABELS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    White,
    Black,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::White => Side::Black,
            Side::Black => Side::White,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::White => "white",
            Side::Black => "black",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" | "w" => Ok(Side::White),
            "black" | "b" => Ok(Side::Black),
            other => Err(Error::Range(format!("unknown side `{other}`"))),
        }
    }
}

/// An output label. Names consist of ASCII letters, digits and `_`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Label> {
        let name = name.into();
        let valid = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            Ok(Label(name))
        } else {
            Err(Error::InvalidLabel(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Single-character labels may be written inside brackets without spaces.
    pub fn is_short(&self) -> bool {
        self.0.len() == 1
    }
}

impl TryFrom<String> for Label {
    type Error = Error;
    fn try_from(s: String) -> Result<Label> {
        Label::new(s)
    }
}

impl From<Label> for String {
    fn from(l: Label) -> String {
        l.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of label indices, used both for disjunctions inside a configuration
/// and for the set-labels produced by a round elimination step.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Group(u64);

impl Group {
    pub const EMPTY: Group = Group(0);

    pub fn from_bits(bits: u64) -> Group {
        Group(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(index: usize) -> Group {
        debug_assert!(index < MAX_LABELS);
        Group(1u64 << index)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Group {
        indices
            .into_iter()
            .fold(Group::EMPTY, |g, i| g.with(i))
    }

    /// The group of the first `n` labels.
    pub fn full(n: usize) -> Group {
        if n >= 64 {
            Group(u64::MAX)
        } else {
            Group((1u64 << n) - 1)
        }
    }

    pub fn with(self, index: usize) -> Group {
        Group(self.0 | (1u64 << index))
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 & (1u64 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Group) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Group) -> Group {
        Group(self.0 | other.0)
    }

    pub fn intersection(self, other: Group) -> Group {
        Group(self.0 & other.0)
    }

    pub fn intersects(self, other: Group) -> bool {
        self.0 & other.0 != 0
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl Ord for Group {
    /// Smaller groups first, then lexicographic on the ascending member
    /// lists, so singletons print before disjunctions (`B [AB]^2`).
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.members().cmp(other.members()))
    }
}

impl PartialOrd for Group {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub group: Group,
    pub mult: usize,
}

impl Term {
    pub fn new(group: Group, mult: usize) -> Term {
        Term { group, mult }
    }
}

/// A regular-expression-like description of a set of single configurations,
/// e.g. `M [OP]^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CondensedConfiguration {
    terms: Vec<Term>,
}

impl CondensedConfiguration {
    /// Builds the canonical form: zero multiplicities dropped, equal groups
    /// merged, terms sorted.
    pub fn new(terms: impl IntoIterator<Item = Term>) -> CondensedConfiguration {
        let mut merged: BTreeMap<Group, usize> = BTreeMap::new();
        for t in terms {
            if t.mult > 0 {
                *merged.entry(t.group).or_insert(0) += t.mult;
            }
        }
        CondensedConfiguration {
            terms: merged
                .into_iter()
                .map(|(group, mult)| Term { group, mult })
                .collect(),
        }
    }

    /// A configuration where every slot is a single label.
    pub fn from_single(s: &SingleConfiguration) -> CondensedConfiguration {
        CondensedConfiguration::new(s.labels().iter().map(|&l| Term::new(Group::singleton(l as usize), 1)))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.mult).sum()
    }

    pub fn labels(&self) -> Group {
        self.terms
            .iter()
            .fold(Group::EMPTY, |g, t| g.union(t.group))
    }

    /// True when some group is empty, i.e. the configuration describes nothing.
    pub fn is_void(&self) -> bool {
        self.terms.iter().any(|t| t.group.is_empty())
    }

    /// Slot-by-slot list of groups (each group repeated `mult` times).
    pub fn slots(&self) -> Vec<Group> {
        self.terms
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.group, t.mult))
            .collect()
    }
}

/// A set of condensed configurations for one node color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Constraint {
    configs: Vec<CondensedConfiguration>,
}

impl Constraint {
    pub fn new(configs: impl IntoIterator<Item = CondensedConfiguration>) -> Constraint {
        let set: BTreeSet<CondensedConfiguration> = configs.into_iter().filter(|c| !c.is_void()).collect();
        Constraint {
            configs: set.into_iter().collect(),
        }
    }

    pub fn configs(&self) -> &[CondensedConfiguration] {
        &self.configs
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn labels(&self) -> Group {
        self.configs
            .iter()
            .fold(Group::EMPTY, |g, c| g.union(c.labels()))
    }

    pub(crate) fn map_groups(&self, f: impl Fn(Group) -> Group) -> Constraint {
        Constraint::new(self.configs.iter().map(|c| {
            CondensedConfiguration::new(c.terms.iter().map(|t| Term::new(f(t.group), t.mult)))
        }))
    }
}

/// A multiset of exactly Δ labels, stored as sorted label indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SingleConfiguration(Vec<u8>);

impl SingleConfiguration {
    pub fn new(mut labels: Vec<usize>) -> SingleConfiguration {
        labels.sort_unstable();
        SingleConfiguration(labels.into_iter().map(|l| l as u8).collect())
    }

    pub(crate) fn from_counts(counts: &[u8]) -> SingleConfiguration {
        let mut v = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            v.extend(std::iter::repeat_n(i as u8, c as usize));
        }
        SingleConfiguration(v)
    }

    pub fn labels(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn counts(&self, n: usize) -> Vec<u8> {
        let mut c = vec![0u8; n];
        for &l in &self.0 {
            c[l as usize] += 1;
        }
        c
    }

    pub fn support(&self) -> Group {
        Group::from_indices(self.0.iter().map(|&l| l as usize))
    }

    pub fn count_of(&self, label: usize) -> usize {
        self.0.iter().filter(|&&l| l as usize == label).count()
    }
}

/// A condensed configuration spelled with label names, used to build and
/// transform problems independently of label indices.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NamedConfiguration {
    terms: Vec<(Vec<String>, usize)>,
}

impl NamedConfiguration {
    pub fn new() -> NamedConfiguration {
        NamedConfiguration::default()
    }

    /// Appends a disjunction of `names` repeated `mult` times.
    pub fn term<S: AsRef<str>>(mut self, names: &[S], mult: usize) -> NamedConfiguration {
        self.terms
            .push((names.iter().map(|s| s.as_ref().to_string()).collect(), mult));
        self
    }

    pub fn terms(&self) -> &[(Vec<String>, usize)] {
        &self.terms
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    delta: usize,
    alphabet: Vec<Label>,
    white: Constraint,
    black: Constraint,
}

impl Problem {
    /// Builds a canonical problem. Groups in `white` and `black` index into
    /// `alphabet`; labels that no configuration uses are dropped.
    pub fn new(delta: usize, alphabet: Vec<Label>, white: Constraint, black: Constraint) -> Result<Problem> {
        if delta < 2 {
            return Err(Error::DeltaTooSmall(delta));
        }
        if alphabet.len() > MAX_LABELS {
            return Err(Error::AlphabetLimit {
                size: alphabet.len(),
                limit: MAX_LABELS,
            });
        }
        let distinct: BTreeSet<&Label> = alphabet.iter().collect();
        if distinct.len() != alphabet.len() {
            return Err(Error::Range("duplicate label in alphabet".into()));
        }
        let full = Group::full(alphabet.len());
        for c in white.configs().iter().chain(black.configs()) {
            if c.degree() != delta {
                return Err(Error::DegreeMismatch {
                    expected: delta,
                    got: c.degree(),
                });
            }
            if !c.labels().is_subset_of(full) {
                return Err(Error::Range("group refers to a label outside the alphabet".into()));
            }
        }

        let used = white.labels().union(black.labels());
        let mut kept: Vec<(usize, &Label)> = used.members().map(|i| (i, &alphabet[i])).collect();
        kept.sort_by(|a, b| a.1.cmp(b.1));
        let mut remap = vec![usize::MAX; alphabet.len()];
        for (new, (old, _)) in kept.iter().enumerate() {
            remap[*old] = new;
        }
        let remap_group = |g: Group| Group::from_indices(g.members().map(|i| remap[i]));
        let new_alphabet: Vec<Label> = kept.iter().map(|(_, l)| (*l).clone()).collect();
        Ok(Problem {
            delta,
            alphabet: new_alphabet,
            white: white.map_groups(remap_group),
            black: black.map_groups(remap_group),
        })
    }

    pub fn from_named(
        delta: usize,
        white: &[NamedConfiguration],
        black: &[NamedConfiguration],
    ) -> Result<Problem> {
        let mut names: BTreeSet<String> = BTreeSet::new();
        for c in white.iter().chain(black) {
            for (group, mult) in &c.terms {
                if *mult > 0 {
                    names.extend(group.iter().cloned());
                }
            }
        }
        let alphabet: Vec<Label> = names.into_iter().map(Label::new).collect::<Result<_>>()?;
        let index: BTreeMap<&str, usize> = alphabet
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let convert = |cs: &[NamedConfiguration]| -> Constraint {
            Constraint::new(cs.iter().map(|c| {
                CondensedConfiguration::new(c.terms.iter().map(|(g, m)| {
                    Term::new(
                        Group::from_indices(g.iter().filter_map(|n| index.get(n.as_str()).copied())),
                        *m,
                    )
                }))
            }))
        };
        let (w, b) = (convert(white), convert(black));
        for c in white.iter().chain(black) {
            let degree: usize = c.terms.iter().map(|t| t.1).sum();
            if degree != delta {
                return Err(Error::DegreeMismatch {
                    expected: delta,
                    got: degree,
                });
            }
        }
        Problem::new(delta, alphabet, w, b)
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn alphabet(&self) -> &[Label] {
        &self.alphabet
    }

    pub fn white(&self) -> &Constraint {
        &self.white
    }

    pub fn black(&self) -> &Constraint {
        &self.black
    }

    pub fn constraint(&self, side: Side) -> &Constraint {
        match side {
            Side::White => &self.white,
            Side::Black => &self.black,
        }
    }

    pub fn label(&self, index: usize) -> &Label {
        &self.alphabet[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.alphabet
            .binary_search_by(|l| l.as_str().cmp(name))
            .ok()
    }

    pub fn group_of(&self, names: &[&str]) -> Result<Group> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| Error::UnknownLabel(n.to_string())))
            .collect::<Result<Vec<_>>>()
            .map(Group::from_indices)
    }

    pub fn labels_of(&self, group: Group) -> Vec<&Label> {
        group.members().map(|i| &self.alphabet[i]).collect()
    }

    pub fn single(&self, names: &[&str]) -> Result<SingleConfiguration> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| Error::UnknownLabel(n.to_string())))
            .collect::<Result<Vec<_>>>()
            .map(SingleConfiguration::new)
    }

    pub fn named(&self, side: Side) -> Vec<NamedConfiguration> {
        self.constraint(side)
            .configs()
            .iter()
            .map(|c| NamedConfiguration {
                terms: c
                    .terms()
                    .iter()
                    .map(|t| {
                        (
                            t.group
                                .members()
                                .map(|i| self.alphabet[i].0.clone())
                                .collect(),
                            t.mult,
                        )
                    })
                    .collect(),
            })
            .collect()
    }

    /// Exchanges the white and black constraints.
    pub fn swap_sides(&self) -> Problem {
        Problem {
            delta: self.delta,
            alphabet: self.alphabet.clone(),
            white: self.black.clone(),
            black: self.white.clone(),
        }
    }

    /// Rewrites label names on one or both sides. Groups that collapse merge.
    pub fn map_labels(&self, side: Option<Side>, f: impl Fn(&Label) -> Label) -> Result<Problem> {
        let map_side = |s: Side| -> Vec<NamedConfiguration> {
            let named = self.named(s);
            if side.is_some_and(|only| only != s) {
                return named;
            }
            named
                .into_iter()
                .map(|c| NamedConfiguration {
                    terms: c
                        .terms
                        .into_iter()
                        .map(|(g, m)| {
                            let mapped: BTreeSet<String> = g
                                .into_iter()
                                .map(|n| f(&Label(n)).0)
                                .collect();
                            (mapped.into_iter().collect(), m)
                        })
                        .collect(),
                })
                .collect()
        };
        Problem::from_named(self.delta, &map_side(Side::White), &map_side(Side::Black))
    }

    /// Applies an injective renaming; unmapped labels keep their names.
    pub fn rename(&self, map: &BTreeMap<Label, Label>) -> Result<Problem> {
        let mut images = BTreeSet::new();
        for l in &self.alphabet {
            let img = map.get(l).unwrap_or(l);
            if !images.insert(img.clone()) {
                return Err(Error::RenamingNotInjective(format!("`{img}` is the image of two labels")));
            }
        }
        self.map_labels(None, |l| map.get(l).cloned().unwrap_or_else(|| l.clone()))
    }

    /// Removes, from the constraint of `side`, every label that never occurs
    /// on the opposite side. No correct solution can use such a label.
    pub fn prune_unusable(&self, side: Side) -> Result<Problem> {
        let present = self.constraint(side.opposite()).labels();
        let pruned = self.constraint(side).map_groups(|g| g.intersection(present));
        let (white, black) = match side {
            Side::White => (pruned, self.black.clone()),
            Side::Black => (self.white.clone(), pruned),
        };
        Problem::new(self.delta, self.alphabet.clone(), white, black)
    }

    /// Adds condensed configurations (given by name) to one side.
    pub fn with_configurations(&self, side: Side, extra: &[NamedConfiguration]) -> Result<Problem> {
        for c in extra {
            for (g, m) in &c.terms {
                if *m == 0 {
                    continue;
                }
                for n in g {
                    if self.index_of(n).is_none() {
                        return Err(Error::UnknownLabel(n.clone()));
                    }
                }
            }
        }
        let mut white = self.named(Side::White);
        let mut black = self.named(Side::Black);
        match side {
            Side::White => white.extend_from_slice(extra),
            Side::Black => black.extend_from_slice(extra),
        }
        Problem::from_named(self.delta, &white, &black)
    }

    /// Semantic equality: both constraints expand to the same single
    /// configurations over the same alphabet.
    pub fn equivalent(&self, other: &Problem) -> Result<bool> {
        if self.delta != other.delta || self.alphabet != other.alphabet {
            return Ok(false);
        }
        if self == other {
            return Ok(true);
        }
        Ok(expand(&self.white)? == expand(&other.white)? && expand(&self.black)? == expand(&other.black)?)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_problem(self))
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Problem> {
        parse_problem(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bmm() -> Problem {
        parse_problem("delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n").unwrap()
    }

    #[test]
    fn group_order_is_size_then_members() {
        let a = Group::from_indices([0, 2]);
        let b = Group::from_indices([1]);
        let c = Group::from_indices([0]);
        assert!(c < b);
        assert!(b < a);
        assert!(a < Group::from_indices([1, 2]));
        assert_eq!(Group::from_indices([3, 1]).members().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn condensed_merges_equal_groups() {
        let g = Group::singleton(1);
        let c = CondensedConfiguration::new([Term::new(g, 1), Term::new(Group::singleton(0), 1), Term::new(g, 1)]);
        assert_eq!(c.terms(), &[Term::new(Group::singleton(0), 1), Term::new(g, 2)]);
        assert_eq!(c.degree(), 3);
    }

    #[test]
    fn swap_is_involution() {
        let p = bmm();
        assert_eq!(p.swap_sides().swap_sides(), p);
        assert_ne!(p.swap_sides(), p);
    }

    #[test]
    fn rename_rejects_collisions() {
        let p = bmm();
        let mut m = BTreeMap::new();
        m.insert(Label::new("M").unwrap(), Label::new("O").unwrap());
        assert!(matches!(p.rename(&m), Err(Error::RenamingNotInjective(_))));
    }

    #[test]
    fn unused_labels_are_dropped() {
        let alphabet = vec![Label::new("Q").unwrap(), Label::new("A").unwrap()];
        let c = Constraint::new([CondensedConfiguration::new([Term::new(Group::singleton(1), 2)])]);
        let p = Problem::new(2, alphabet, c.clone(), c).unwrap();
        assert_eq!(p.alphabet(), &[Label::new("A").unwrap()]);
    }

    #[test]
    fn prune_removes_labels_missing_on_the_other_side() {
        let p = parse_problem("delta: 2\nwhite:\nA^2\nblack:\n[AB]^2\n").unwrap();
        let q = p.prune_unusable(Side::Black).unwrap();
        assert_eq!(render_problem(&q), "delta: 2\nwhite:\nA^2\nblack:\nA^2\n");
    }

    #[test]
    fn labels_validate() {
        assert!(Label::new("").is_err());
        assert!(Label::new("a-b").is_err());
        assert!(Label::new("Ab_3").is_ok());
    }
}
