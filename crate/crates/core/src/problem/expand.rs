use std::collections::{BTreeSet, HashSet};

use super::{CondensedConfiguration, Constraint, SingleConfiguration};
use crate::error::{Error, Result};

pub const DEFAULT_EXPANSION_CAP: usize = 10_000_000;

pub fn expand(c: &Constraint) -> Result<BTreeSet<SingleConfiguration>> {
    expand_with_cap(c, DEFAULT_EXPANSION_CAP)
}

pub fn expand_with_cap(c: &Constraint, cap: usize) -> Result<BTreeSet<SingleConfiguration>> {
    let n = c.labels().members().last().map_or(0, |m| m + 1);
    let counts = expand_counts(c, n, cap)?;
    Ok(counts.iter().map(|k| SingleConfiguration::from_counts(k)).collect())
}

/// Count vectors (length `n`) of every single configuration described by `c`.
pub(crate) fn expand_counts(c: &Constraint, n: usize, cap: usize) -> Result<HashSet<Vec<u8>>> {
    let mut out = HashSet::new();
    let mut visits = 0usize;
    for cfg in c.configs() {
        let mut counts = vec![0u8; n];
        let slots: Vec<Vec<usize>> = cfg
            .terms()
            .iter()
            .map(|t| t.group.members().collect())
            .collect();
        let mults: Vec<usize> = cfg.terms().iter().map(|t| t.mult).collect();
        fill(&slots, &mults, 0, &mut counts, &mut out, &mut visits, cap)?;
    }
    Ok(out)
}

fn fill(
    groups: &[Vec<usize>],
    mults: &[usize],
    term: usize,
    counts: &mut Vec<u8>,
    out: &mut HashSet<Vec<u8>>,
    visits: &mut usize,
    cap: usize,
) -> Result<()> {
    if term == groups.len() {
        *visits += 1;
        if *visits > cap {
            return Err(Error::ExpansionBudget(cap));
        }
        if !out.contains(counts.as_slice()) {
            if out.len() >= cap {
                return Err(Error::ExpansionBudget(cap));
            }
            out.insert(counts.clone());
        }
        return Ok(());
    }
    distribute(groups, mults, term, &groups[term], 0, mults[term], counts, out, visits, cap)
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    groups: &[Vec<usize>],
    mults: &[usize],
    term: usize,
    members: &[usize],
    start: usize,
    remaining: usize,
    counts: &mut Vec<u8>,
    out: &mut HashSet<Vec<u8>>,
    visits: &mut usize,
    cap: usize,
) -> Result<()> {
    if remaining == 0 {
        return fill(groups, mults, term + 1, counts, out, visits, cap);
    }
    if start == members.len() {
        return Ok(());
    }
    let last = start + 1 == members.len();
    let label = members[start];
    let low = if last { remaining } else { 0 };
    for k in (low..=remaining).rev() {
        counts[label] += k as u8;
        let r = distribute(groups, mults, term, members, start + 1, remaining - k, counts, out, visits, cap);
        counts[label] -= k as u8;
        r?;
    }
    Ok(())
}

impl CondensedConfiguration {
    /// Exact membership test: is there an assignment of the labels of `s` to
    /// the slots of this configuration?
    pub fn contains(&self, s: &SingleConfiguration) -> bool {
        if s.len() != self.degree() {
            return false;
        }
        let mut labels: Vec<(usize, usize)> = Vec::new();
        for &l in s.labels() {
            match labels.last_mut() {
                Some((last, c)) if *last == l as usize => *c += 1,
                _ => labels.push((l as usize, 1)),
            }
        }
        // Labels covered by fewer terms first: fail fast.
        labels.sort_by_key(|&(l, _)| self.terms().iter().filter(|t| t.group.contains(l)).count());
        if labels
            .iter()
            .any(|&(l, _)| !self.terms().iter().any(|t| t.group.contains(l)))
        {
            return false;
        }
        let mut capacity: Vec<usize> = self.terms().iter().map(|t| t.mult).collect();
        let mut needs: Vec<usize> = labels.iter().map(|l| l.1).collect();
        assign(self, &labels, &mut needs, 0, 0, &mut capacity)
    }
}

fn assign(
    cfg: &CondensedConfiguration,
    labels: &[(usize, usize)],
    needs: &mut [usize],
    index: usize,
    term: usize,
    capacity: &mut [usize],
) -> bool {
    if index == labels.len() {
        return true;
    }
    let label = labels[index].0;
    let need = needs[index];
    if need == 0 {
        return assign(cfg, labels, needs, index + 1, 0, capacity);
    }
    let terms = cfg.terms();
    let available: usize = (term..terms.len())
        .filter(|&t| terms[t].group.contains(label))
        .map(|t| capacity[t])
        .sum();
    if available < need {
        return false;
    }
    for t in term..terms.len() {
        if !terms[t].group.contains(label) || capacity[t] == 0 {
            continue;
        }
        for k in (1..=capacity[t].min(need)).rev() {
            capacity[t] -= k;
            needs[index] -= k;
            let ok = if needs[index] == 0 {
                assign(cfg, labels, needs, index + 1, 0, capacity)
            } else {
                assign(cfg, labels, needs, index, t + 1, capacity)
            };
            capacity[t] += k;
            needs[index] += k;
            if ok {
                return true;
            }
        }
    }
    false
}

/// True iff `s` is described by some configuration of `c`.
pub fn contains(c: &Constraint, s: &SingleConfiguration) -> bool {
    c.configs().iter().any(|cfg| cfg.contains(s))
}

#[cfg(test)]
mod tests {
    use super::super::{parse_problem, Problem};
    use super::*;

    fn singles(p: &Problem, c: &Constraint) -> Vec<String> {
        expand(c)
            .unwrap()
            .iter()
            .map(|s| {
                s.labels()
                    .iter()
                    .map(|&l| p.label(l as usize).as_str())
                    .collect::<Vec<_>>()
                    .join("")
            })
            .collect()
    }

    #[test]
    fn no_disjunctions() {
        let p = parse_problem("delta: 3\nwhite:\nM O^2\nblack:\n[MO]^3\n").unwrap();
        assert_eq!(singles(&p, p.white()), vec!["MOO"]);
    }

    #[test]
    fn full_enumeration() {
        let p = parse_problem("delta: 2\nwhite:\n[AB]^2\nblack:\n[AB]^2\n").unwrap();
        assert_eq!(singles(&p, p.white()), vec!["AA", "AB", "BB"]);
    }

    #[test]
    fn bmm_membership() {
        let p = parse_problem("delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n").unwrap();
        assert!(contains(p.black(), &p.single(&["M", "P", "O"]).unwrap()));
        assert!(!contains(p.black(), &p.single(&["P", "P", "P"]).unwrap()));
        assert!(!contains(p.black(), &p.single(&["M", "M", "O"]).unwrap()));
    }

    #[test]
    fn cap_is_enforced() {
        let p = parse_problem("delta: 4\nwhite:\n[ABCD]^4\nblack:\nA^4\n").unwrap();
        assert_eq!(expand(p.white()).unwrap().len(), 35);
        assert!(matches!(expand_with_cap(p.white(), 10), Err(Error::ExpansionBudget(10))));
    }
}
