use std::collections::{BTreeMap, HashSet};

use super::{expand_counts, Label, Problem, DEFAULT_EXPANSION_CAP};
use crate::error::{Error, Result};

/// Alphabet size above which the renaming search refuses to run.
pub const MAX_RENAMING_LABELS: usize = 8;

struct Expanded {
    white: HashSet<Vec<u8>>,
    black: HashSet<Vec<u8>>,
}

fn expanded(p: &Problem) -> Result<Expanded> {
    let n = p.alphabet().len();
    Ok(Expanded {
        white: expand_counts(p.white(), n, DEFAULT_EXPANSION_CAP)?,
        black: expand_counts(p.black(), n, DEFAULT_EXPANSION_CAP)?,
    })
}

/// Per-label invariant: for each side, the sorted list of multiplicities of
/// the label over all single configurations.
fn signatures(e: &Expanded, n: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    (0..n)
        .map(|l| {
            let mut w: Vec<u8> = e.white.iter().map(|c| c[l]).collect();
            let mut b: Vec<u8> = e.black.iter().map(|c| c[l]).collect();
            w.sort_unstable();
            b.sort_unstable();
            (w, b)
        })
        .collect()
}

fn permuted(set: &HashSet<Vec<u8>>, map: &[usize]) -> HashSet<Vec<u8>> {
    set.iter()
        .map(|c| {
            let mut out = vec![0u8; c.len()];
            for (i, &k) in c.iter().enumerate() {
                out[map[i]] = k;
            }
            out
        })
        .collect()
}

/// Looks for a bijection from the labels of `p` to the labels of `q` under
/// which both constraints expand to the same single configurations.
/// Labels keep their own name whenever that is consistent.
pub fn equal_up_to_renaming(p: &Problem, q: &Problem) -> Result<Option<BTreeMap<Label, Label>>> {
    let n = p.alphabet().len();
    for size in [n, q.alphabet().len()] {
        if size > MAX_RENAMING_LABELS {
            return Err(Error::AlphabetLimit {
                size,
                limit: MAX_RENAMING_LABELS,
            });
        }
    }
    if p.delta() != q.delta() || n != q.alphabet().len() {
        return Ok(None);
    }
    let (ep, eq) = (expanded(p)?, expanded(q)?);
    if ep.white.len() != eq.white.len() || ep.black.len() != eq.black.len() {
        return Ok(None);
    }
    let (sp, sq) = (signatures(&ep, n), signatures(&eq, n));
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut c: Vec<usize> = (0..n).filter(|&j| sp[i] == sq[j]).collect();
            c.sort_by_key(|&j| q.alphabet()[j] != p.alphabet()[i]);
            c
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return Ok(None);
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if search(0, &candidates, &mut map, &mut used, &ep, &eq) {
        Ok(Some(
            (0..n)
                .map(|i| (p.alphabet()[i].clone(), q.alphabet()[map[i]].clone()))
                .collect(),
        ))
    } else {
        Ok(None)
    }
}

fn search(
    i: usize,
    candidates: &[Vec<usize>],
    map: &mut [usize],
    used: &mut [bool],
    ep: &Expanded,
    eq: &Expanded,
) -> bool {
    if i == map.len() {
        return permuted(&ep.white, map) == eq.white && permuted(&ep.black, map) == eq.black;
    }
    for &j in &candidates[i] {
        if used[j] {
            continue;
        }
        used[j] = true;
        map[i] = j;
        if search(i + 1, candidates, map, used, ep, eq) {
            return true;
        }
        used[j] = false;
    }
    false
}

/// A key equal for two problems iff they are equal up to renaming. Labels
/// are ordered by their invariants and only labels with equal invariants
/// are permuted.
pub fn canonical_key(p: &Problem) -> Result<Vec<u8>> {
    let n = p.alphabet().len();
    if n > MAX_RENAMING_LABELS {
        return Err(Error::AlphabetLimit {
            size: n,
            limit: MAX_RENAMING_LABELS,
        });
    }
    let e = expanded(p)?;
    let sig = signatures(&e, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sig[a].cmp(&sig[b]));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &l in &order {
        match classes.last_mut() {
            Some(c) if sig[c[0]] == sig[l] => c.push(l),
            _ => classes.push(vec![l]),
        }
    }
    let mut best: Option<Vec<u8>> = None;
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    assign(&classes, 0, 0, 0, &mut map, &mut used, &e, p.delta(), &mut best);
    Ok(best.expect("at least one ordering"))
}

#[allow(clippy::too_many_arguments)]
fn assign(
    classes: &[Vec<usize>],
    class: usize,
    within: usize,
    next_pos: usize,
    map: &mut [usize],
    used: &mut [bool],
    e: &Expanded,
    delta: usize,
    best: &mut Option<Vec<u8>>,
) {
    if class == classes.len() {
        let key = encode(e, map, delta);
        if best.as_ref().is_none_or(|b| key < *b) {
            *best = Some(key);
        }
        return;
    }
    let members = &classes[class];
    if within == members.len() {
        assign(classes, class + 1, 0, next_pos, map, used, e, delta, best);
        return;
    }
    for &l in members {
        if used[l] {
            continue;
        }
        used[l] = true;
        map[l] = next_pos;
        assign(classes, class, within + 1, next_pos + 1, map, used, e, delta, best);
        used[l] = false;
    }
}

fn encode(e: &Expanded, map: &[usize], delta: usize) -> Vec<u8> {
    let mut out = vec![delta as u8, map.len() as u8];
    for set in [&e.white, &e.black] {
        let mut v: Vec<Vec<u8>> = permuted(set, map).into_iter().collect();
        v.sort_unstable();
        out.extend((v.len() as u32).to_le_bytes());
        for c in v {
            out.extend(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse_problem;
    use super::*;

    const BMM: &str = "delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n";

    #[test]
    fn reflexive_identity() {
        let p = parse_problem(BMM).unwrap();
        let m = equal_up_to_renaming(&p, &p).unwrap().unwrap();
        assert!(m.iter().all(|(a, b)| a == b));
    }

    #[test]
    fn finds_constructed_renaming() {
        let p = parse_problem(BMM).unwrap();
        let q = parse_problem("delta: 3\nwhite:\nQ O^2\nP^3\nblack:\nQ [OP]^2\nO^3\n").unwrap();
        let m = equal_up_to_renaming(&q, &p).unwrap().unwrap();
        let l = |s: &str| Label::new(s).unwrap();
        assert_eq!(m[&l("Q")], l("M"));
        assert_eq!(m[&l("O")], l("O"));
        assert_eq!(m[&l("P")], l("P"));
    }

    #[test]
    fn condensation_is_syntax() {
        let p = parse_problem("delta: 2\nwhite:\n[AB]^2\nblack:\nA^2\n").unwrap();
        let q = parse_problem("delta: 2\nwhite:\nA^2\nA B\nB^2\nblack:\nA^2\n").unwrap();
        assert!(equal_up_to_renaming(&p, &q).unwrap().is_some());
    }

    #[test]
    fn distinguishes_sides() {
        let p = parse_problem(BMM).unwrap();
        assert!(equal_up_to_renaming(&p, &p.swap_sides()).unwrap().is_none());
    }
}
