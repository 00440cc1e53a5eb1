//! The matching problem family: the encoded x-maximal y-matching problem Φ,
//! the intermediate problem Φ′, the three-parameter family Ψ, the round
//! bound T_Δ(x, y), and lower-bound chains.

mod chain;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{NamedConfiguration, Problem, Side};

pub(crate) use chain::difference;
pub use chain::{apply_step, verify_chain, Chain, ChainStep, Relaxation};
pub use search::{auto_bound, auto_bound_observed, Observer, Ranking, SearchConfig, SearchOutcome};

fn cfg(terms: &[(&str, usize)]) -> NamedConfiguration {
    terms.iter().fold(NamedConfiguration::new(), |c, &(letters, m)| {
        let names: Vec<String> = letters.chars().map(String::from).collect();
        c.term(&names, m)
    })
}

fn check_phi(delta: usize, x: usize, y: usize) -> Result<()> {
    if delta < 2 {
        return Err(Error::DeltaTooSmall(delta));
    }
    if x > delta || y == 0 || y > delta {
        return Err(Error::Range(format!("need 0 ≤ x ≤ Δ and 1 ≤ y ≤ Δ, got Δ = {delta}, x = {x}, y = {y}")));
    }
    Ok(())
}

/// `Φ^W_Δ(x, y)`, the encoded bipartite x-maximal y-matching problem.
pub fn make_phi(delta: usize, x: usize, y: usize) -> Result<Problem> {
    check_phi(delta, x, y)?;
    let white = [
        cfg(&[("MOX", y - 1), ("M", 1), ("OX", delta - y)]),
        cfg(&[("PX", x), ("P", delta - x)]),
    ];
    let black = [
        cfg(&[("MPOX", y - 1), ("M", 1), ("POX", delta - y)]),
        cfg(&[("OX", x), ("O", delta - x)]),
    ];
    Problem::from_named(delta, &white, &black)
}

/// `Φ′(x, y)`, the intermediate problem between Φ and Ψ.
pub fn make_phi_prime(delta: usize, x: usize, y: usize) -> Result<Problem> {
    check_phi(delta, x, y)?;
    let black = [
        cfg(&[("X", y - 1), ("M", 1), ("O", delta - y)]),
        cfg(&[("X", y), ("P", delta - y)]),
    ];
    let white = [
        cfg(&[("MPOX", y - 1), ("MX", 1), ("POX", delta - y)]),
        cfg(&[("POX", x), ("OX", delta - x)]),
    ];
    Problem::from_named(delta, &white, &black)
}

/// `Ψ^W_Δ(a, b, c)`, or `Ψ^B_Δ(a, b, c)` with the sides exchanged.
pub fn make_psi(delta: usize, a: usize, b: usize, c: usize, side: Side) -> Result<Problem> {
    if delta < 2 {
        return Err(Error::DeltaTooSmall(delta));
    }
    if a == 0 || a >= delta || a + b > delta || a + c > delta {
        return Err(Error::Range(format!(
            "need 1 ≤ a ≤ Δ − 1, a + b ≤ Δ and a + c ≤ Δ, got Δ = {delta}, a = {a}, b = {b}, c = {c}"
        )));
    }
    let plain = [
        cfg(&[("X", a - 1), ("M", 1), ("O", delta - a)]),
        cfg(&[("X", a), ("O", b), ("P", delta - a - b)]),
        cfg(&[("X", a), ("Z", 1), ("O", delta - a - 1)]),
    ];
    let sets = [
        cfg(&[("MZPOX", a - 1), ("MX", 1), ("POX", delta - a)]),
        cfg(&[("MZPOX", a), ("POX", c), ("OX", delta - a - c)]),
        cfg(&[("MZPOX", a), ("X", 1), ("POX", delta - a - 1)]),
    ];
    match side {
        Side::White => Problem::from_named(delta, &plain, &sets),
        Side::Black => Problem::from_named(delta, &sets, &plain),
    }
}

/// `T_Δ(x, y)`: `2⌈(Δ−x)/y⌉` when `⌈Δ/y⌉ > ⌈(Δ−x)/y⌉` and one less
/// otherwise. For `y = Δ` the problem is trivial and the bound is 0.
pub fn t_bound(delta: usize, x: usize, y: usize) -> Result<usize> {
    check_phi(delta, x, y)?;
    if y == delta {
        return Ok(0);
    }
    let k = (delta - x).div_ceil(y);
    if k == 0 {
        return Ok(0);
    }
    Ok(if delta.div_ceil(y) > k { 2 * k } else { 2 * k - 1 })
}

/// A named member of the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyMember {
    Phi { x: usize, y: usize },
    PhiPrime { x: usize, y: usize },
    Psi { side: Side, a: usize, b: usize, c: usize },
}

impl FamilyMember {
    pub fn build(self, delta: usize) -> Result<Problem> {
        match self {
            FamilyMember::Phi { x, y } => make_phi(delta, x, y),
            FamilyMember::PhiPrime { x, y } => make_phi_prime(delta, x, y),
            FamilyMember::Psi { side, a, b, c } => make_psi(delta, a, b, c, side),
        }
    }
}

impl fmt::Display for FamilyMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilyMember::Phi { x, y } => write!(f, "Phi^W({x},{y})"),
            FamilyMember::PhiPrime { x, y } => write!(f, "Phi'({x},{y})"),
            FamilyMember::Psi { side, a, b, c } => {
                let s = if side == Side::White { 'W' } else { 'B' };
                write!(f, "Psi^{s}({a},{b},{c})")
            }
        }
    }
}

/// The problem sequence `Π_0, …, Π_{T−1}` of the lower bound for
/// x-maximal y-matching. Empty when `T = 0`.
pub fn chain_expected(delta: usize, x: usize, y: usize) -> Result<Vec<FamilyMember>> {
    let t = t_bound(delta, x, y)?;
    let mut out = Vec::with_capacity(t);
    if t == 0 {
        return Ok(out);
    }
    out.push(FamilyMember::Phi { x, y });
    out.push(FamilyMember::PhiPrime { x, y });
    let (mut side, mut a, mut b, mut c) = (Side::White, y, x, 0);
    while out.len() < t {
        out.push(FamilyMember::Psi { side, a, b, c });
        let d = (c + a).min(delta - a);
        (side, a, b, c) = (side.opposite(), a, d, b);
    }
    out.truncate(t);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::render_problem;

    #[test]
    fn phi_display() {
        let p = make_phi(3, 0, 1).unwrap();
        assert_eq!(render_problem(&p), "delta: 3\nwhite:\nM [OX]^2\nP^3\nblack:\nM [OPX]^2\nO^3\n");
        let full = make_phi(3, 3, 1).unwrap();
        assert!(render_problem(&full).contains("\n[PX]^3\n"));
        assert_eq!(make_phi(3, 1, 2).unwrap().swap_sides().white(), make_phi(3, 1, 2).unwrap().black());
    }

    #[test]
    fn psi_display() {
        let p = make_psi(3, 1, 0, 0, Side::White).unwrap();
        let text = render_problem(&p);
        assert!(text.starts_with("delta: 3\nwhite:\nM O^2\nO X Z\nP^2 X\nblack:\n"), "{text}");
        assert!(text.contains("[MX]"));
        let edge = make_psi(4, 3, 0, 0, Side::White).unwrap();
        assert!(render_problem(&edge).contains("\nX^3 Z\n"));
        assert!(make_psi(3, 0, 0, 0, Side::White).is_err());
        assert!(make_psi(3, 2, 2, 0, Side::White).is_err());
    }

    #[test]
    fn t_bound_instances() {
        assert_eq!(t_bound(3, 0, 1).unwrap(), 5);
        assert_eq!(t_bound(4, 1, 1).unwrap(), 6);
        assert_eq!(t_bound(4, 0, 2).unwrap(), 3);
        assert_eq!(t_bound(4, 1, 2).unwrap(), 3);
        assert_eq!(t_bound(5, 0, 1).unwrap(), 9);
        assert_eq!(t_bound(4, 4, 1).unwrap(), 0);
        assert_eq!(t_bound(4, 0, 4).unwrap(), 0);
        assert!(t_bound(4, 5, 1).is_err());
    }

    #[test]
    fn bmm_sequence() {
        use FamilyMember::*;
        let seq = chain_expected(3, 0, 1).unwrap();
        assert_eq!(
            seq,
            vec![
                Phi { x: 0, y: 1 },
                PhiPrime { x: 0, y: 1 },
                Psi { side: Side::White, a: 1, b: 0, c: 0 },
                Psi { side: Side::Black, a: 1, b: 1, c: 0 },
                Psi { side: Side::White, a: 1, b: 1, c: 1 },
            ]
        );
        assert!(chain_expected(3, 3, 1).unwrap().is_empty());
    }
}
