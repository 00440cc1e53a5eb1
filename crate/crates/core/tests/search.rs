use roundelim_core::cert::{verify_certificate, Certificate};
use roundelim_core::family::{auto_bound, auto_bound_observed, make_phi, Ranking, SearchConfig};
use roundelim_core::problem::parse_problem;
use roundelim_core::re::ReLimits;

#[test]
fn bmm_reaches_the_family_bound() {
    let p = make_phi(3, 0, 1).unwrap();
    for ranking in [Ranking::FewerLabelsThenLarger, Ranking::FewerLabelsThenSmaller] {
        let cfg = SearchConfig {
            ranking,
            ..SearchConfig::default()
        };
        let out = auto_bound(&p, &cfg).unwrap();
        assert!(out.chain.complete);
        assert!(out.chain.claimed_bound >= 5, "{ranking:?}: {}", out.chain.claimed_bound);
        let cert = Certificate::from_chain(&out.chain);
        let report = verify_certificate(&cert, &ReLimits::default()).unwrap();
        assert_eq!(report.bound, out.chain.claimed_bound);
    }
}

#[test]
fn solvable_start_gives_zero() {
    let p = make_phi(3, 3, 1).unwrap();
    let out = auto_bound(&p, &SearchConfig::default()).unwrap();
    assert_eq!(out.chain.claimed_bound, 0);
    assert!(out.chain.steps.is_empty());
    let report = verify_certificate(&Certificate::from_chain(&out.chain), &ReLimits::default()).unwrap();
    assert_eq!(report.bound, 0);
}

#[test]
fn sinkless_orientation_closes_on_itself() {
    let p = parse_problem("delta: 3\nwhite:\nB [AB]^2\nblack:\nA [AB]^2\n").unwrap();
    let out = auto_bound(&p, &SearchConfig::default()).unwrap();
    assert!(out.chain.fixed_point.is_some(), "bound {}", out.chain.claimed_bound);
    let report = verify_certificate(&Certificate::from_chain(&out.chain), &ReLimits::default()).unwrap();
    assert_eq!(report.fixed_point, out.chain.fixed_point);
}

#[test]
fn observer_can_cancel() {
    let p = make_phi(3, 0, 1).unwrap();
    let mut seen = 0;
    let mut stop = |steps: u64| {
        seen = steps;
        steps < 3
    };
    let out = auto_bound_observed(&p, &SearchConfig::default(), &mut stop).unwrap();
    assert!(out.cancelled);
    assert!(!out.chain.complete);
    assert_eq!(seen, 3);
    assert_eq!(out.re_steps, 3);
}

#[test]
fn step_budget_marks_incomplete() {
    let p = make_phi(3, 0, 1).unwrap();
    let cfg = SearchConfig {
        max_re_steps: 2,
        ..SearchConfig::default()
    };
    let out = auto_bound(&p, &cfg).unwrap();
    assert!(!out.chain.complete);
    assert!(!out.cancelled);
}
