//! Deterministic 0-round solvability in the port-numbering model.
//!
//! With no information, every white node outputs the same configuration `C`
//! in the same port order. A black node can see any Δ-multiset over the
//! labels of `C`, so `C` works iff all of those are black configurations.

use std::collections::{BTreeMap, HashSet};


use crate::bounds::LogProb;
use crate::error::{Error, Result};
use crate::problem::{contains, expand_counts, Group, Problem, Side, SingleConfiguration, DEFAULT_EXPANSION_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub config: SingleConfiguration,
    pub support: Group,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroRoundVerdict {
    /// The deciding side.
    pub side: Side,
    pub solvable: bool,
    pub witness: Option<Witness>,
    /// For each support of a configuration of the deciding side that fails,
    /// the first multiset over it missing from the other side.
    pub failing: BTreeMap<Group, SingleConfiguration>,
}

impl ZeroRoundVerdict {
    /// The failing support listed first, with its violating multiset.
    pub fn first_failure(&self) -> Option<(Group, &SingleConfiguration)> {
        self.failing.iter().next().map(|(g, s)| (*g, s))
    }
}

pub fn zero_round_white(p: &Problem) -> Result<ZeroRoundVerdict> {
    zero_round(p, Side::White)
}

pub fn zero_round_black(p: &Problem) -> Result<ZeroRoundVerdict> {
    zero_round(p, Side::Black)
}

pub fn zero_round(p: &Problem, side: Side) -> Result<ZeroRoundVerdict> {
    let n = p.alphabet().len();
    let own = expand_counts(p.constraint(side), n, DEFAULT_EXPANSION_CAP)?;
    let other = expand_counts(p.constraint(side.opposite()), n, DEFAULT_EXPANSION_CAP)?;
    let mut own: Vec<SingleConfiguration> = own.iter().map(|c| SingleConfiguration::from_counts(c)).collect();
    own.sort();

    // Universality is monotone in the support: cache both outcomes.
    let mut good: HashSet<Group> = HashSet::new();
    let mut failing: BTreeMap<Group, SingleConfiguration> = BTreeMap::new();
    let mut witness = None;
    for c in &own {
        let support = c.support();
        if good.contains(&support) {
            witness.get_or_insert(Witness {
                config: c.clone(),
                support,
            });
            continue;
        }
        if failing.contains_key(&support) {
            continue;
        }
        match first_missing(support, p.delta(), n, &other) {
            None => {
                good.insert(support);
                witness.get_or_insert(Witness {
                    config: c.clone(),
                    support,
                });
            }
            Some(bad) => {
                failing.insert(support, bad);
            }
        }
    }
    Ok(ZeroRoundVerdict {
        side,
        solvable: witness.is_some(),
        witness,
        failing,
    })
}

/// The first Δ-multiset over `support` (in sorted order) absent from `allowed`.
fn first_missing(support: Group, delta: usize, n: usize, allowed: &HashSet<Vec<u8>>) -> Option<SingleConfiguration> {
    let labels: Vec<usize> = support.members().collect();
    let mut cur = Vec::with_capacity(delta);
    fn rec(
        labels: &[usize],
        from: usize,
        delta: usize,
        n: usize,
        cur: &mut Vec<usize>,
        allowed: &HashSet<Vec<u8>>,
    ) -> Option<SingleConfiguration> {
        if cur.len() == delta {
            let s = SingleConfiguration::new(cur.clone());
            return if allowed.contains(&s.counts(n)) { None } else { Some(s) };
        }
        for i in from..labels.len() {
            cur.push(labels[i]);
            let r = rec(labels, i, delta, n, cur, allowed);
            cur.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }
    rec(&labels, 0, delta, n, &mut cur, allowed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedFloor {
    /// Number of single white configurations.
    pub k: usize,
    /// `1 / (kΔ)^Δ`.
    pub floor: LogProb,
    /// `1 / Δ^{2Δ}`, the floor used for the family problems.
    pub family_floor: LogProb,
}

/// Lower bound on the local failure probability of any randomized 0-round
/// white algorithm for a problem that is not deterministically solvable.
pub fn randomized_floor(p: &Problem) -> Result<RandomizedFloor> {
    if zero_round_white(p)?.solvable {
        return Err(Error::Solvable);
    }
    let n = p.alphabet().len();
    let k = expand_counts(p.white(), n, DEFAULT_EXPANSION_CAP)?.len();
    let delta = p.delta() as u32;
    Ok(RandomizedFloor {
        k,
        floor: LogProb::inverse_power(k as u128 * delta as u128, delta),
        family_floor: LogProb::inverse_power(delta as u128, 2 * delta),
    })
}

/// Exhaustive check by total enumeration: try every assignment of labels to
/// white ports that forms a white configuration, against every tuple of
/// white ports a black node can see. Only for tiny instances.
pub fn brute_force_oracle(p: &Problem) -> Result<ZeroRoundVerdict> {
    let n = p.alphabet().len();
    let delta = p.delta();
    if n > 3 || delta > 3 {
        return Err(Error::AlphabetLimit { size: n.max(delta), limit: 3 });
    }
    let mut failing = BTreeMap::new();
    let mut witness = None;
    let mut assignment = vec![0usize; delta];
    'assign: loop {
        let config = SingleConfiguration::new(assignment.clone());
        if contains(p.white(), &config) {
            let mut ports = vec![0usize; delta];
            let mut bad = None;
            loop {
                let seen = SingleConfiguration::new(ports.iter().map(|&j| assignment[j]).collect());
                if !contains(p.black(), &seen) {
                    bad = Some(seen);
                    break;
                }
                if !next_tuple(&mut ports, delta) {
                    break;
                }
            }
            match bad {
                None => {
                    witness = Some(Witness {
                        support: config.support(),
                        config,
                    });
                    break 'assign;
                }
                Some(b) => {
                    failing.entry(config.support()).or_insert(b);
                }
            }
        }
        if !next_tuple(&mut assignment, n) {
            break;
        }
    }
    Ok(ZeroRoundVerdict {
        side: Side::White,
        solvable: witness.is_some(),
        witness,
        failing,
    })
}

/// Advances a base-`radix` counter; false after the last tuple.
fn next_tuple(t: &mut [usize], radix: usize) -> bool {
    for d in t.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}
