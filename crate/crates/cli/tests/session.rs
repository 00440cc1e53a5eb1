use roundelim_cli::session::{Action, Session};
use roundelim_core::cert::Certificate;
use roundelim_core::family::verify_chain;
use roundelim_core::problem::parse_problem;
use roundelim_core::re::ReLimits;

#[test]
fn chain_steps_replay_as_session_actions() {
    let limits = ReLimits::default();
    let chain = verify_chain(4, 1, 1).unwrap();
    let cert = Certificate::from_chain(&chain);
    let mut s = Session::new("chain", chain.start.clone());
    for (i, step) in cert.steps.iter().enumerate() {
        let action = Action::RelaxToTargets {
            side: step.side,
            targets: step.targets.clone(),
            extra: step.extra.clone(),
            renaming: step.renaming.clone(),
        };
        s.apply(action, &limits).unwrap();
        let want = parse_problem(&step.problem).unwrap();
        assert!(s.current().equivalent(&want).unwrap(), "step {}", i + 1);
    }
    assert_eq!(s.entries().len(), chain.len());
    assert_eq!(s.replay(&limits).unwrap(), None);

    // Undo back to the start and branch: the old tail is dropped.
    while s.undo() {}
    s.apply(Action::ReBlack { keep_set_names: false }, &limits).unwrap();
    assert_eq!(s.entries().len(), 2);
    assert_eq!(s.replay(&limits).unwrap(), None);
}

#[test]
fn add_configs_and_replace() {
    let limits = ReLimits::default();
    let p = parse_problem("delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n").unwrap();
    let mut s = Session::new("s", p);
    s.apply(
        Action::AddConfigs {
            side: roundelim_core::problem::Side::Black,
            configs: vec!["P^3".into()],
        },
        &limits,
    )
    .unwrap();
    assert!(roundelim_cli::ops::zero_round_text(s.current(), roundelim_core::problem::Side::White)
        .unwrap()
        .contains("solvable: true"));
    s.apply(
        Action::Replace {
            from: "O".into(),
            to: "P".into(),
        },
        &limits,
    )
    .unwrap();
    assert!(s.current().index_of("O").is_none());
    assert!(s
        .apply(
            Action::Replace {
                from: "Q".into(),
                to: "P".into()
            },
            &limits
        )
        .is_err());
    assert_eq!(s.replay(&limits).unwrap(), None);
}
