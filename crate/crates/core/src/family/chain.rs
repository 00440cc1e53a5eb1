use std::collections::{BTreeMap, BTreeSet};

use super::{chain_expected, FamilyMember};
use crate::error::{Error, Result};
use crate::problem::{expand, Group, Label, NamedConfiguration, Problem, Side};
use crate::re::{re_step, RawStepResult, ReLimits};
use crate::relax::{default_set_name, relax_to_targets, SetConfiguration};
use crate::zero_round::zero_round;

/// How a chain problem is obtained from the step result of its
/// predecessor: enlarge every universal configuration into one of
/// `targets`, recompute the other side, add `extra` configurations to the
/// other side (named by the default set names), then rename.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Relaxation {
    /// Configurations of sets of the predecessor's labels.
    pub targets: Vec<SetConfiguration>,
    pub extra: Vec<NamedConfiguration>,
    pub renaming: BTreeMap<Label, Label>,
}

#[derive(Clone, Debug)]
pub struct ChainStep {
    /// Universal side of the step; also the side the new problem is
    /// checked for.
    pub side: Side,
    pub relaxation: Relaxation,
    pub problem: Problem,
    pub member: Option<FamilyMember>,
    pub verified: bool,
}

/// `Π_0` followed by one problem per step. Each problem is at least one
/// round easier, for its side, than its predecessor.
#[derive(Clone, Debug)]
pub struct Chain {
    pub start: Problem,
    pub start_side: Side,
    pub start_member: Option<FamilyMember>,
    pub steps: Vec<ChainStep>,
    /// Rounds certified: the number of problems when the last one is not
    /// 0-round solvable for its side, else 0.
    pub claimed_bound: usize,
    /// Index of an earlier problem equal, up to renaming, to the last one.
    pub fixed_point: Option<usize>,
    /// False when a search stopped on a budget.
    pub complete: bool,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn problem(&self, i: usize) -> &Problem {
        if i == 0 {
            &self.start
        } else {
            &self.steps[i - 1].problem
        }
    }

    pub fn side(&self, i: usize) -> Side {
        if i == 0 {
            self.start_side
        } else {
            self.steps[i - 1].side
        }
    }

    pub fn tail(&self) -> (&Problem, Side) {
        let i = self.len() - 1;
        (self.problem(i), self.side(i))
    }
}

/// Runs the step of universal side `side` on `source` and applies `relax`.
pub fn apply_step(source: &Problem, side: Side, relax: &Relaxation, limits: &ReLimits) -> Result<(RawStepResult, Problem)> {
    let r = re_step(source, side, limits)?;
    let mut q = relax_to_targets(&r, &relax.targets, &BTreeMap::new())?;
    if !relax.extra.is_empty() {
        q = q.with_configurations(side.opposite(), &relax.extra)?;
    }
    let q = q.rename(&relax.renaming)?;
    Ok((r, q))
}

fn set(p: &Problem, letters: &str) -> Result<Group> {
    let names: Vec<String> = letters.chars().map(String::from).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    p.group_of(&refs)
}

fn target(p: &Problem, terms: &[(&str, usize)]) -> Result<SetConfiguration> {
    let mut out = Vec::new();
    for &(letters, m) in terms {
        out.push((set(p, letters)?, m));
    }
    Ok(SetConfiguration::new(out))
}

fn renaming(p: &Problem, pairs: &[(&str, &str)]) -> Result<BTreeMap<Label, Label>> {
    let mut map = BTreeMap::new();
    for &(from, to) in pairs {
        map.insert(default_set_name(p, set(p, from)?)?, Label::new(to)?);
    }
    Ok(map)
}

/// The targets, additions and renaming that turn the step result of `from`
/// into `to`, as in the family lemmas.
fn recipe(delta: usize, from: FamilyMember, p: &Problem) -> Result<Relaxation> {
    match from {
        FamilyMember::Phi { y, .. } => Ok(Relaxation {
            targets: vec![
                target(p, &[("MPOX", y - 1), ("M", 1), ("POX", delta - y)])?,
                target(p, &[("MPOX", y), ("OX", delta - y)])?,
            ],
            extra: vec![],
            renaming: renaming(p, &[("M", "M"), ("OX", "P"), ("POX", "O"), ("MPOX", "X")])?,
        }),
        FamilyMember::PhiPrime { x, y } => {
            let name = |letters: &str| -> Result<String> { Ok(default_set_name(p, set(p, letters)?)?.to_string()) };
            let all = [name("X")?, name("MX")?, name("OX")?, name("POX")?, name("MPOX")?];
            let upper = [name("OX")?, name("POX")?, name("MPOX")?];
            let extra = NamedConfiguration::new()
                .term(&all, y)
                .term(&[name("MPOX")?], 1)
                .term(&upper, delta - y - 1);
            Ok(Relaxation {
                targets: vec![
                    target(p, &[("MPOX", y - 1), ("MX", 1), ("POX", delta - y)])?,
                    target(p, &[("MPOX", y), ("POX", x), ("OX", delta - y - x)])?,
                    target(p, &[("MPOX", y), ("X", 1), ("POX", delta - y - 1)])?,
                ],
                extra: vec![extra],
                renaming: renaming(p, &[("X", "Z"), ("OX", "P"), ("POX", "O"), ("MX", "M"), ("MPOX", "X")])?,
            })
        }
        FamilyMember::Psi { a, c, .. } => {
            let d = (c + a).min(delta - a);
            Ok(Relaxation {
                targets: vec![
                    target(p, &[("MZPOX", a - 1), ("MX", 1), ("POX", delta - a)])?,
                    target(p, &[("MZPOX", a), ("POX", d), ("OX", delta - a - d)])?,
                    target(p, &[("MZPOX", a), ("X", 1), ("POX", delta - a - 1)])?,
                ],
                extra: vec![],
                renaming: renaming(p, &[("X", "Z"), ("OX", "P"), ("POX", "O"), ("MX", "M"), ("MZPOX", "X")])?,
            })
        }
    }
}

fn role(i: usize) -> Side {
    if i.is_multiple_of(2) {
        Side::White
    } else {
        Side::Black
    }
}

/// Builds and checks the lower-bound chain for x-maximal y-matching: every
/// step is recomputed, relaxed as prescribed and compared with the
/// expected family member, and the last problem must not be 0-round
/// solvable for its side.
pub fn verify_chain(delta: usize, x: usize, y: usize) -> Result<Chain> {
    let members = chain_expected(delta, x, y)?;
    let limits = ReLimits::default();
    if members.is_empty() {
        let start = FamilyMember::Phi { x, y };
        let p = start.build(delta)?;
        if !zero_round(&p, Side::White)?.solvable {
            return Err(Error::ChainMismatch {
                step: 0,
                detail: "bound is 0 but the problem is not 0-round solvable".into(),
            });
        }
        return Ok(Chain {
            start: p,
            start_side: Side::White,
            start_member: Some(start),
            steps: vec![],
            claimed_bound: 0,
            fixed_point: None,
            complete: true,
        });
    }

    let start = members[0].build(delta)?;
    let mut steps = Vec::with_capacity(members.len() - 1);
    let mut prev = start.clone();
    for i in 1..members.len() {
        let relax = recipe(delta, members[i - 1], &prev)?;
        let side = role(i);
        let (_, got) = apply_step(&prev, side, &relax, &limits).map_err(|e| Error::ChainMismatch {
            step: i,
            detail: e.to_string(),
        })?;
        let want = members[i].build(delta)?;
        if !got.equivalent(&want)? {
            return Err(Error::ChainMismatch {
                step: i,
                detail: format!("expected {}: {}", members[i], difference(&got, &want)?),
            });
        }
        steps.push(ChainStep {
            side,
            relaxation: relax,
            problem: want.clone(),
            member: Some(members[i]),
            verified: true,
        });
        prev = want;
    }

    let last = members.len() - 1;
    if let FamilyMember::Psi { b, c, .. } = members[last] {
        if b + 1 + y > delta || c + 1 + y > delta {
            return Err(Error::ChainMismatch {
                step: last,
                detail: format!("tail parameters b = {b}, c = {c} exceed Δ − 1 − y"),
            });
        }
    }
    if zero_round(&prev, role(last))?.solvable {
        return Err(Error::ChainMismatch {
            step: last,
            detail: format!("{} is 0-round solvable", members[last]),
        });
    }
    Ok(Chain {
        start,
        start_side: Side::White,
        start_member: Some(members[0]),
        steps,
        claimed_bound: members.len(),
        fixed_point: None,
        complete: true,
    })
}

/// Human-readable difference of two problems.
pub(crate) fn difference(got: &Problem, want: &Problem) -> Result<String> {
    let names = |p: &Problem| p.alphabet().iter().map(Label::to_string).collect::<Vec<_>>().join(" ");
    if got.delta() != want.delta() || got.alphabet() != want.alphabet() {
        return Ok(format!("labels differ: got [{}], expected [{}]", names(got), names(want)));
    }
    let mut parts = Vec::new();
    for side in [Side::White, Side::Black] {
        let g = expand(got.constraint(side))?;
        let w = expand(want.constraint(side))?;
        let show = |set: BTreeSet<_>| -> String {
            set.into_iter()
                .take(3)
                .map(|s: crate::problem::SingleConfiguration| {
                    s.labels().iter().map(|&l| got.label(l as usize).as_str()).collect::<Vec<_>>().join(" ")
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        let extra: BTreeSet<_> = g.difference(&w).cloned().collect();
        let missing: BTreeSet<_> = w.difference(&g).cloned().collect();
        if !extra.is_empty() {
            parts.push(format!("{side} has unexpected {}", show(extra)));
        }
        if !missing.is_empty() {
            parts.push(format!("{side} lacks {}", show(missing)));
        }
    }
    Ok(parts.join("; "))
}
