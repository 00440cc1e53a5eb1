//! Chain certificates: a JSON record of every problem of a chain with the
//! relaxation that produced it, re-checkable from scratch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{apply_step, Chain, Relaxation};
use crate::problem::{
    equal_up_to_renaming, parse_named_configuration, parse_problem, render_problem, Label, NamedConfiguration,
    Problem, Side,
};
use crate::re::ReLimits;
use crate::relax::SetConfiguration;
use crate::zero_round::zero_round;

pub const FORMAT: &str = "roundelim-chain/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertStep {
    /// Universal side of the step.
    pub side: Side,
    /// Target configurations over the labels of the previous problem.
    pub targets: Vec<String>,
    /// Configurations added to the other side, over default set names.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<String>,
    #[serde(default)]
    pub renaming: BTreeMap<String, String>,
    pub problem: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub format: String,
    pub start: String,
    pub start_side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_family: Option<String>,
    pub steps: Vec<CertStep>,
    pub claimed_bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertReport {
    pub steps_checked: usize,
    pub bound: usize,
    /// The chain closes on an earlier problem, so no finite bound follows
    /// from it alone.
    pub fixed_point: Option<usize>,
}

fn render_named(c: &NamedConfiguration) -> String {
    c.terms()
        .iter()
        .filter(|(_, m)| *m > 0)
        .map(|(names, m)| {
            let short = names.iter().all(|n| n.chars().count() == 1);
            let mut s = if names.len() == 1 {
                names[0].clone()
            } else if short {
                format!("[{}]", names.concat())
            } else {
                format!("[{}]", names.join(" "))
            };
            if *m > 1 {
                s.push_str(&format!("^{m}"));
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl Certificate {
    pub fn from_chain(chain: &Chain) -> Certificate {
        let mut prev = &chain.start;
        let mut steps = Vec::with_capacity(chain.steps.len());
        for s in &chain.steps {
            steps.push(CertStep {
                side: s.side,
                targets: s.relaxation.targets.iter().map(|t| t.render(prev)).collect(),
                extra: s.relaxation.extra.iter().map(render_named).collect(),
                renaming: s
                    .relaxation
                    .renaming
                    .iter()
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .collect(),
                problem: render_problem(&s.problem),
                family: s.member.map(|m| m.to_string()),
            });
            prev = &s.problem;
        }
        Certificate {
            format: FORMAT.to_string(),
            start: render_problem(&chain.start),
            start_side: chain.start_side,
            start_family: chain.start_member.map(|m| m.to_string()),
            steps,
            claimed_bound: chain.claimed_bound,
            fixed_point: chain.fixed_point,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let c: Certificate = serde_json::from_str(text)?;
        if c.format != FORMAT {
            return Err(Error::Certificate(format!("unknown format `{}`", c.format)));
        }
        Ok(c)
    }
}

fn step_error(step: usize, e: Error) -> Error {
    Error::Certificate(format!("step {step}: {e}"))
}

/// Re-runs every step, compares with the recorded problems and checks the
/// last problem. Returns the certified bound.
pub fn verify_certificate(cert: &Certificate, limits: &ReLimits) -> Result<CertReport> {
    let start = parse_problem(&cert.start).map_err(|e| step_error(0, e))?;
    let mut problems = vec![(start, cert.start_side)];
    for (i, s) in cert.steps.iter().enumerate() {
        let n = i + 1;
        let (prev, prev_side) = problems.last().expect("nonempty").clone();
        if s.side != prev_side.opposite() {
            return Err(step_error(n, Error::Range("sides must alternate".into())));
        }
        let targets = s
            .targets
            .iter()
            .map(|t| SetConfiguration::parse(t, &prev))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| step_error(n, e))?;
        let extra = s
            .extra
            .iter()
            .map(|t| parse_named_configuration(t))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| step_error(n, e))?;
        let renaming = s
            .renaming
            .iter()
            .map(|(a, b)| Ok((Label::new(a.as_str())?, Label::new(b.as_str())?)))
            .collect::<Result<BTreeMap<_, _>>>()
            .map_err(|e| step_error(n, e))?;
        let relax = Relaxation {
            targets,
            extra,
            renaming,
        };
        let (_, got) = apply_step(&prev, s.side, &relax, limits).map_err(|e| step_error(n, e))?;
        let listed = parse_problem(&s.problem).map_err(|e| step_error(n, e))?;
        if !got.equivalent(&listed)? {
            return Err(step_error(
                n,
                Error::Certificate(format!(
                    "recorded problem differs: {}",
                    crate::family::difference(&got, &listed)?
                )),
            ));
        }
        problems.push((listed, s.side));
    }

    let (tail, tail_side) = problems.last().expect("nonempty").clone();
    if zero_round(&tail, tail_side)?.solvable {
        if cert.claimed_bound != 0 || !cert.steps.is_empty() {
            return Err(Error::Certificate(format!("the last problem is 0-round solvable for {tail_side}")));
        }
        return Ok(CertReport {
            steps_checked: 0,
            bound: 0,
            fixed_point: None,
        });
    }
    if let Some(j) = cert.fixed_point {
        let (earlier, side) = problems
            .get(j)
            .filter(|_| j + 1 < problems.len())
            .ok_or_else(|| Error::Certificate(format!("fixed point index {j} out of range")))?;
        if *side != tail_side || equal_up_to_renaming(earlier, &tail)?.is_none() {
            return Err(Error::Certificate(format!("the last problem does not repeat problem {j}")));
        }
    }
    let bound = problems.len();
    if cert.claimed_bound != bound {
        return Err(Error::Certificate(format!(
            "claimed bound {} but the chain certifies {bound}",
            cert.claimed_bound
        )));
    }
    Ok(CertReport {
        steps_checked: cert.steps.len(),
        bound,
        fixed_point: cert.fixed_point,
    })
}

/// Parses and verifies a certificate file.
pub fn verify_certificate_text(text: &str, limits: &ReLimits) -> Result<CertReport> {
    verify_certificate(&Certificate::from_json(text)?, limits)
}

/// Rebuilds the problems of a certificate without checking the steps.
pub fn problems_of(cert: &Certificate) -> Result<Vec<(Problem, Side)>> {
    let mut out = vec![(parse_problem(&cert.start)?, cert.start_side)];
    for s in &cert.steps {
        out.push((parse_problem(&s.problem)?, s.side));
    }
    Ok(out)
}
