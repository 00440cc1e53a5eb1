//! Failure-probability calculators for lifting lower bounds to randomized
//! algorithms. Probabilities are carried as `−log₂ p`.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::t_bound;

/// Default constant for the multi-step bound.
pub const DEFAULT_K: f64 = 11.0;
/// Label count of the family problems.
pub const DEFAULT_SIGMA: usize = 5;

/// A probability `2^{−e}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "neg_log2", rename_all = "lowercase")]
pub enum LogProb {
    /// Integer exponent, kept exactly.
    Exact(u128),
    Approx(f64),
    /// Exponent too large to represent; the probability is below anything
    /// representable.
    Overflow,
}

impl LogProb {
    pub const ONE: LogProb = LogProb::Exact(0);
    pub const ZERO: LogProb = LogProb::Overflow;

    pub fn from_neg_log2(e: f64) -> LogProb {
        if e.is_nan() || e <= 0.0 {
            LogProb::ONE
        } else if e.is_infinite() {
            LogProb::Overflow
        } else if e.fract() == 0.0 && e < 2f64.powi(53) {
            LogProb::Exact(e as u128)
        } else {
            LogProb::Approx(e)
        }
    }

    pub fn from_prob(p: f64) -> Result<LogProb> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Range(format!("probability {p} outside [0, 1]")));
        }
        Ok(if p == 0.0 {
            LogProb::Overflow
        } else {
            LogProb::from_neg_log2(-p.log2())
        })
    }

    /// `1 / base^exp`, exact when `base` is a power of two.
    pub fn inverse_power(base: u128, exp: u32) -> LogProb {
        if base == 0 {
            return LogProb::Overflow;
        }
        if base.is_power_of_two() {
            let bits = base.trailing_zeros() as u128;
            return match bits.checked_mul(exp as u128) {
                Some(e) => LogProb::Exact(e),
                None => LogProb::Overflow,
            };
        }
        LogProb::from_neg_log2(exp as f64 * (base as f64).log2())
    }

    pub fn neg_log2(self) -> f64 {
        match self {
            LogProb::Exact(e) => e as f64,
            LogProb::Approx(e) => e,
            LogProb::Overflow => f64::INFINITY,
        }
    }

    pub fn exact(self) -> Option<u128> {
        match self {
            LogProb::Exact(e) => Some(e),
            _ => None,
        }
    }

    /// The probability as a float; underflows to 0 for tiny values.
    pub fn prob(self) -> f64 {
        (-self.neg_log2()).exp2()
    }

    pub fn is_zero(self) -> bool {
        self == LogProb::Overflow
    }

    /// Compares probabilities (not exponents).
    pub fn cmp_prob(self, other: LogProb) -> Ordering {
        match (self, other) {
            (LogProb::Exact(a), LogProb::Exact(b)) => b.cmp(&a),
            _ => other.neg_log2().total_cmp(&self.neg_log2()),
        }
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogProb::Exact(0) => write!(f, "1"),
            LogProb::Exact(e) => write!(f, "2^-{e}"),
            LogProb::Approx(e) => write!(f, "2^-{e:.6}"),
            LogProb::Overflow => write!(f, "2^-inf"),
        }
    }
}

/// `log₂(2^a + 2^b)` without leaving the log domain.
fn log2_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

/// Failure probability after one elimination step from a problem over
/// `sigma` labels: `2^{1/(Δ+1)} (Δσ)^{Δ/(Δ+1)} p^{1/(Δ+1)} + p`, capped at 1.
pub fn single_step(p: LogProb, delta: usize, sigma: usize) -> LogProb {
    if p.is_zero() {
        return LogProb::ZERO;
    }
    let d = delta as f64;
    let e = p.neg_log2();
    let first = (1.0 + d * (d * sigma as f64).log2() - e) / (d + 1.0);
    LogProb::from_neg_log2(-log2_sum(first, -e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiStep {
    /// The `j`-fold recursion of [`single_step`].
    pub recursion: LogProb,
    /// `(KΔ)² p^{1/(Δ+1)^j}`, not capped (`neg_log2` may be negative).
    pub closed_form_neg_log2: f64,
}

impl MultiStep {
    pub fn closed_form(&self) -> LogProb {
        LogProb::from_neg_log2(self.closed_form_neg_log2)
    }

    pub fn dominated(&self) -> bool {
        self.recursion.neg_log2() >= self.closed_form_neg_log2
    }
}

/// Failure probability after `j` steps. Returns the recursion, with the
/// closed form alongside.
pub fn multi_step(p: LogProb, delta: usize, j: usize, k: f64, sigma: usize) -> MultiStep {
    let mut cur = p;
    for _ in 0..j {
        cur = single_step(cur, delta, sigma);
    }
    let d = delta as f64;
    let closed = if j == 0 {
        p.neg_log2()
    } else {
        p.neg_log2() / (d + 1.0).powi(j as i32) - 2.0 * (k * d).log2()
    };
    MultiStep {
        recursion: cur,
        closed_form_neg_log2: closed,
    }
}

/// Lower bound on the failure probability of any white algorithm running in
/// fewer than `T` rounds: `2^{−Δ^{2T+1}}`.
pub fn failure_floor(delta: usize, t: usize) -> Result<LogProb> {
    if t == 0 {
        return Err(Error::Range("failure floor needs T ≥ 1".into()));
    }
    let exp = 2 * t + 1;
    let exact = u32::try_from(exp)
        .ok()
        .and_then(|e| (delta as u128).checked_pow(e));
    Ok(match exact {
        Some(e) => LogProb::Exact(e),
        None => LogProb::from_neg_log2((delta as f64).powf(exp as f64)),
    })
}

/// The same floor derived through the steps: `((KΔ)² Δ^{2Δ})^{(Δ+1)^{T−1}}`
/// in the denominator. Bounded by [`failure_floor`] for Δ large enough.
pub fn failure_floor_derived(delta: usize, t: usize, k: f64) -> Result<LogProb> {
    if t == 0 {
        return Err(Error::Range("failure floor needs T ≥ 1".into()));
    }
    let d = delta as f64;
    let base = 2.0 * (k * d).log2() + 2.0 * d * d.log2();
    Ok(LogProb::from_neg_log2(base * (d + 1.0).powf((t - 1) as f64)))
}

/// `log₂ n` given either as an integer or as `2^E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NodeCount {
    pub log2: f64,
}

impl NodeCount {
    pub fn new(n: u128) -> NodeCount {
        NodeCount { log2: (n as f64).log2() }
    }

    pub fn pow2(exponent: f64) -> NodeCount {
        NodeCount { log2: exponent }
    }
}

impl std::str::FromStr for NodeCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<NodeCount> {
        let s = s.trim();
        let bad = || Error::Range(format!("bad node count {s:?}; use an integer or 2^E"));
        if let Some(e) = s.strip_prefix("2^") {
            let e: f64 = e.trim_matches(|c| c == '{' || c == '}').parse().map_err(|_| bad())?;
            if e.is_nan() || e <= 0.0 || !e.is_finite() {
                return Err(bad());
            }
            Ok(NodeCount::pow2(e))
        } else {
            let n: u128 = s.parse().map_err(|_| bad())?;
            if n < 2 {
                return Err(bad());
            }
            Ok(NodeCount::new(n))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeVerdict {
    Applies,
    ExemptTooLarge,
    ExemptSmall,
}

impl fmt::Display for RegimeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeVerdict::Applies => "bound applies",
            RegimeVerdict::ExemptTooLarge => "exempt: T too large",
            RegimeVerdict::ExemptSmall => "exempt: T <= delta^(1/k)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RandomizedRegime {
    pub t: usize,
    /// `(1/(3k)) · log log n / log log log n`, logs base 2.
    pub threshold: f64,
    /// `Δ^{1/k}`.
    pub delta_root: f64,
    pub verdict: RegimeVerdict,
    /// Whether `2^{−Δ^{2T+1}} ≥ 1/n`. Always true for T = 0.
    pub floor_at_least_inverse_n: bool,
}

fn check_regime_args(n: NodeCount, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Range("k must be at least 1".into()));
    }
    if n.log2.is_nan() || n.log2 <= 0.0 {
        return Err(Error::Range("n must be at least 2".into()));
    }
    Ok(())
}

/// The exemption clauses of the randomized lower bound. The threshold is
/// taken as 0 when `log log log n ≤ 0` (tiny n), where nothing applies.
pub fn randomized_regime(n: NodeCount, delta: usize, x: usize, y: usize, k: usize) -> Result<RandomizedRegime> {
    check_regime_args(n, k)?;
    let t = t_bound(delta, x, y)?;
    let ll = n.log2.log2();
    let lll = ll.log2();
    let threshold = if lll > 0.0 { ll / lll / (3.0 * k as f64) } else { 0.0 };
    let delta_root = (delta as f64).powf(1.0 / k as f64);
    let tf = t as f64;
    let verdict = if tf >= threshold {
        RegimeVerdict::ExemptTooLarge
    } else if tf <= delta_root {
        RegimeVerdict::ExemptSmall
    } else {
        RegimeVerdict::Applies
    };
    let floor_at_least_inverse_n = t == 0 || failure_floor(delta, t)?.neg_log2() <= n.log2;
    Ok(RandomizedRegime {
        t,
        threshold,
        delta_root,
        verdict,
        floor_at_least_inverse_n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterministicRegime {
    pub t: usize,
    /// `(1/k) · log n / log log n`, logs base 2; 0 when `log log n ≤ 0`.
    pub log_term: f64,
    /// `min(T, log_term)`, the bound up to a constant factor.
    pub bound: f64,
    pub delta_root: f64,
    pub exempt: bool,
}

pub fn deterministic_regime(n: NodeCount, delta: usize, x: usize, y: usize, k: usize) -> Result<DeterministicRegime> {
    check_regime_args(n, k)?;
    let t = t_bound(delta, x, y)?;
    let ll = n.log2.log2();
    let log_term = if ll > 0.0 { n.log2 / ll / k as f64 } else { 0.0 };
    let delta_root = (delta as f64).powf(1.0 / k as f64);
    Ok(DeterministicRegime {
        t,
        log_term,
        bound: (t as f64).min(log_term),
        delta_root,
        exempt: t as f64 <= delta_root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_edges() {
        assert_eq!(single_step(LogProb::ZERO, 3, 5), LogProb::ZERO);
        assert_eq!(single_step(LogProb::ONE, 3, 5), LogProb::ONE);
        let got = single_step(LogProb::Exact(40), 3, 5).neg_log2();
        let direct = -(2f64.powf(0.25) * 15f64.powf(0.75) * 2f64.powi(-10) + 2f64.powi(-40)).log2();
        assert!((got - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn multi_step_instances() {
        let p = LogProb::Exact(1000);
        assert_eq!(multi_step(p, 3, 0, DEFAULT_K, 5).recursion, p);
        let m = multi_step(p, 3, 2, DEFAULT_K, 5);
        assert!((m.closed_form_neg_log2 - (1000.0 / 16.0 - 2.0 * 33f64.log2())).abs() < 1e-12);
        assert!(m.dominated());
    }

    #[test]
    fn floors() {
        assert_eq!(failure_floor(3, 5).unwrap(), LogProb::Exact(177147));
        assert_eq!(failure_floor(2, 1).unwrap(), LogProb::Exact(8));
        assert!(failure_floor(3, 0).is_err());
        assert!(matches!(failure_floor(1000, 40).unwrap(), LogProb::Approx(_) | LogProb::Overflow));
    }

    #[test]
    fn node_count_parsing() {
        assert_eq!("1024".parse::<NodeCount>().unwrap().log2, 10.0);
        assert_eq!("2^{100}".parse::<NodeCount>().unwrap().log2, 100.0);
        assert!("1".parse::<NodeCount>().is_err());
        assert!("2^x".parse::<NodeCount>().is_err());
    }

    #[test]
    fn regimes() {
        let r = randomized_regime(NodeCount::pow2(1e300), 3, 0, 1, 1).unwrap();
        assert_eq!(r.verdict, RegimeVerdict::Applies);
        let r = randomized_regime(NodeCount::pow2(64.0), 3, 0, 3, 1).unwrap();
        assert_eq!(r.t, 0);
        assert_ne!(r.verdict, RegimeVerdict::Applies);
        let d = deterministic_regime(NodeCount::pow2(16.0), 1000, 0, 1, 1).unwrap();
        assert_eq!(d.bound, d.log_term);
    }
}
