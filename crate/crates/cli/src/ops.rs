//! Operations shared by the command line and the service, so both render
//! identical text for the same request.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use roundelim_core::problem::{render_problem, render_with_sets, Label, Problem, Side};
use roundelim_core::re::{re_step, ReLimits};
use roundelim_core::relax::diagram;
use roundelim_core::zero_round::{randomized_floor, zero_round, ZeroRoundVerdict};
use roundelim_core::Error;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Exit statuses of the command line.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const VERIFICATION: i32 = 5;
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_budget() {
        return exit::BUDGET;
    }
    match e {
        Error::ChainMismatch { .. } | Error::Certificate(_) => exit::VERIFICATION,
        Error::Generation(_) => exit::OTHER,
        _ => exit::INPUT,
    }
}

/// Stable machine-readable code for an engine error.
pub fn error_code(e: &Error) -> &'static str {
    if e.is_budget() {
        return "budget_exceeded";
    }
    match e {
        Error::Syntax { .. } | Error::ExponentSum { .. } | Error::EmptyConstraint(_) | Error::DeltaTooSmall(_) => {
            "parse_error"
        }
        Error::UnknownLabel(_) | Error::InvalidLabel(_) => "unknown_label",
        Error::UnjustifiedMerge { .. } => "unjustified_merge",
        Error::NotExtendable { .. } => "not_extendable",
        Error::ChainMismatch { .. } | Error::Certificate(_) => "verification_failed",
        _ => "invalid_input",
    }
}

/// Hex SHA-256 of the canonical rendering.
pub fn problem_hash(p: &Problem) -> String {
    hex::encode(Sha256::digest(render_problem(p).as_bytes()))
}

/// Renames labels to `A`, `B`, … in alphabet order.
pub fn short_names(p: &Problem) -> BTreeMap<Label, Label> {
    p.alphabet()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let name = if i < 26 {
                ((b'A' + i as u8) as char).to_string()
            } else {
                format!("L{i}")
            };
            (l.clone(), Label::new(name).expect("valid name"))
        })
        .collect()
}

pub struct Speedup {
    pub problem: Problem,
    /// Source labels behind each label of `problem`.
    pub sets: BTreeMap<Label, Vec<Label>>,
}

impl Speedup {
    pub fn render(&self) -> String {
        render_with_sets(&self.problem, &self.sets)
    }
}

/// One elimination step, renamed to short labels unless `keep_set_names`.
pub fn speedup(p: &Problem, side: Side, keep_set_names: bool, limits: &ReLimits) -> Result<Speedup, Error> {
    let r = re_step(p, side, limits)?;
    let sets = r.provenance();
    if keep_set_names {
        return Ok(Speedup { problem: r.result, sets });
    }
    let map = short_names(&r.result);
    let problem = r.result.rename(&map)?;
    let sets = sets.into_iter().map(|(l, m)| (map[&l].clone(), m)).collect();
    Ok(Speedup { problem, sets })
}

pub fn diagram_text(p: &Problem, side: Side) -> Result<String, Error> {
    Ok(diagram(p, side)?.render())
}

pub fn diagram_json(p: &Problem, side: Side) -> Result<Value, Error> {
    let d = diagram(p, side)?;
    let arrows: Vec<[String; 2]> = d.named_arrows().into_iter().map(|(k, l)| [k.to_string(), l.to_string()]).collect();
    Ok(json!({
        "side": side.as_str(),
        "labels": d.labels.iter().map(Label::to_string).collect::<Vec<_>>(),
        "arrows": arrows,
        "conservative": d.conservative,
        "text": d.render(),
    }))
}

fn names(p: &Problem, labels: &[u8]) -> Vec<String> {
    labels.iter().map(|&l| p.label(l as usize).to_string()).collect()
}

fn support_names(p: &Problem, g: roundelim_core::problem::Group) -> Vec<String> {
    p.labels_of(g).into_iter().map(Label::to_string).collect()
}

pub fn zero_round_text(p: &Problem, side: Side) -> Result<String, Error> {
    let v = zero_round(p, side)?;
    let mut out = String::new();
    let _ = writeln!(out, "side: {side}");
    let _ = writeln!(out, "solvable: {}", v.solvable);
    if let Some(w) = &v.witness {
        let _ = writeln!(out, "witness: {}", names(p, w.config.labels()).join(" "));
    } else if let Some((g, missing)) = v.first_failure() {
        let _ = writeln!(
            out,
            "failing support: [{}] misses {}",
            support_names(p, g).join(" "),
            names(p, missing.labels()).join(" ")
        );
        if side == Side::White {
            if let Ok(f) = randomized_floor(p) {
                let _ = writeln!(out, "randomized floor: {} (k = {})", f.floor, f.k);
            }
        }
    }
    Ok(out)
}

pub fn zero_round_json(p: &Problem, side: Side) -> Result<Value, Error> {
    let v: ZeroRoundVerdict = zero_round(p, side)?;
    let failing: Vec<Value> = v
        .failing
        .iter()
        .map(|(g, m)| json!({ "support": support_names(p, *g), "missing": names(p, m.labels()) }))
        .collect();
    Ok(json!({
        "side": side.as_str(),
        "solvable": v.solvable,
        "witness": v.witness.as_ref().map(|w| names(p, w.config.labels())),
        "failing": failing,
        "text": zero_round_text(p, side)?,
    }))
}
