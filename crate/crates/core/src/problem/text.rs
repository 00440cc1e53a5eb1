//! The problem file format.
//!
//! ```text
//! # bipartite maximal matching
//! delta: 3
//! white:
//! M O^2
//! P^3
//! black:
//! M [OP]^2
//! O^3
//! ```
//!
//! A bracket of single-character labels needs no spaces (`[OP]`); longer
//! names are whitespace separated (`[A1 A2]`). An optional `labels:` line
//! pins the alphabet, and an optional `sets:` section records, for results of
//! a round elimination step, which source labels each new label stands for.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Label, NamedConfiguration, Problem, Side};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    White,
    Black,
    Sets,
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    parse_problem_with_sets(text).map(|(p, _)| p)
}

/// Parses a problem together with its optional `sets:` provenance section.
pub fn parse_problem_with_sets(text: &str) -> Result<(Problem, BTreeMap<Label, Vec<Label>>)> {
    let mut delta: Option<usize> = None;
    let mut declared: Option<(usize, BTreeSet<String>)> = None;
    let mut white: Vec<(usize, NamedConfiguration)> = Vec::new();
    let mut black: Vec<(usize, NamedConfiguration)> = Vec::new();
    let mut sets = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut section = Section::None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = match line.split_once(':') {
            Some((k, r)) => (k.trim().to_ascii_lowercase(), r.trim()),
            None => (String::new(), line),
        };
        let body = match key.as_str() {
            "delta" => {
                let d = rest
                    .parse::<usize>()
                    .map_err(|_| Error::syntax(line_no, format!("invalid delta `{rest}`")))?;
                if delta.replace(d).is_some() {
                    return Err(Error::syntax(line_no, "duplicate `delta:` line"));
                }
                continue;
            }
            "labels" => {
                let names: BTreeSet<String> = rest.split_whitespace().map(str::to_string).collect();
                for n in &names {
                    Label::new(n.clone())?;
                }
                declared = Some((line_no, names));
                continue;
            }
            "white" | "black" | "sets" => {
                if !seen.insert(key.clone()) {
                    return Err(Error::syntax(line_no, format!("duplicate `{key}:` section")));
                }
                section = match key.as_str() {
                    "white" => Section::White,
                    "black" => Section::Black,
                    _ => Section::Sets,
                };
                if rest.is_empty() {
                    continue;
                }
                rest
            }
            "" => line,
            other => return Err(Error::syntax(line_no, format!("unknown header `{other}:`"))),
        };
        match section {
            Section::None => {
                return Err(Error::syntax(line_no, "configuration outside of a `white:` or `black:` section"))
            }
            Section::White => white.push((line_no, parse_configuration(body, line_no)?)),
            Section::Black => black.push((line_no, parse_configuration(body, line_no)?)),
            Section::Sets => {
                let (name, members) = body
                    .split_once('=')
                    .ok_or_else(|| Error::syntax(line_no, "expected `NAME = [members]`"))?;
                let label = Label::new(name.trim())?;
                let cfg = parse_configuration(members.trim(), line_no)?;
                let [(group, 1)] = cfg.terms() else {
                    return Err(Error::syntax(line_no, "expected a single bracketed member list"));
                };
                let members = group.iter().cloned().map(Label::new).collect::<Result<Vec<_>>>()?;
                sets.insert(label, members);
            }
        }
    }

    let delta = delta.ok_or_else(|| Error::syntax(0, "missing `delta:` line"))?;
    if delta < 2 {
        return Err(Error::DeltaTooSmall(delta));
    }
    if !seen.contains("white") || white.is_empty() {
        return Err(Error::EmptyConstraint(Side::White));
    }
    if !seen.contains("black") || black.is_empty() {
        return Err(Error::EmptyConstraint(Side::Black));
    }
    for (line, cfg) in white.iter().chain(&black) {
        let sum: usize = cfg.terms().iter().map(|t| t.1).sum();
        if sum != delta {
            return Err(Error::ExponentSum {
                line: *line,
                config: config_source(text, *line),
                sum,
                delta,
            });
        }
        if let Some((_, names)) = &declared {
            for (group, _) in cfg.terms() {
                if let Some(unknown) = group.iter().find(|n| !names.contains(*n)) {
                    return Err(Error::UnknownLabel(unknown.clone()));
                }
            }
        }
    }
    let white: Vec<NamedConfiguration> = white.into_iter().map(|(_, c)| c).collect();
    let black: Vec<NamedConfiguration> = black.into_iter().map(|(_, c)| c).collect();
    let problem = Problem::from_named(delta, &white, &black)?;
    Ok((problem, sets))
}

fn config_source(text: &str, line: usize) -> String {
    let raw = text.lines().nth(line - 1).unwrap_or("").trim();
    match raw.split_once(':') {
        Some((_, rest)) => rest.trim().to_string(),
        None => raw.to_string(),
    }
}

/// Parses one configuration line into label-name groups.
pub fn parse_named_configuration(text: &str) -> Result<NamedConfiguration> {
    parse_configuration(text.trim(), 1)
}

fn parse_configuration(body: &str, line: usize) -> Result<NamedConfiguration> {
    let chars: Vec<char> = body.chars().collect();
    let mut pos = 0;
    let mut cfg = NamedConfiguration::new();
    let is_name = |c: char| c.is_ascii_alphanumeric() || c == '_';
    while pos < chars.len() {
        let c = chars[pos];
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let names: Vec<String> = if c == '[' {
            let close = chars[pos..]
                .iter()
                .position(|&c| c == ']')
                .map(|off| pos + off)
                .ok_or_else(|| Error::syntax(line, "unterminated `[`"))?;
            let inner: String = chars[pos + 1..close].iter().collect();
            pos = close + 1;
            let inner = inner.trim();
            if inner.is_empty() {
                return Err(Error::syntax(line, "empty disjunction `[]`"));
            }
            let names: Vec<String> = if inner.contains(char::is_whitespace) {
                inner.split_whitespace().map(str::to_string).collect()
            } else {
                inner.chars().map(String::from).collect()
            };
            for n in &names {
                Label::new(n.clone()).map_err(|_| Error::syntax(line, format!("invalid label `{n}`")))?;
            }
            names
        } else if is_name(c) {
            let start = pos;
            while pos < chars.len() && is_name(chars[pos]) {
                pos += 1;
            }
            vec![chars[start..pos].iter().collect()]
        } else {
            return Err(Error::syntax(line, format!("unexpected character `{c}`")));
        };
        let mut mult = 1;
        if pos < chars.len() && chars[pos] == '^' {
            pos += 1;
            let braced = pos < chars.len() && chars[pos] == '{';
            if braced {
                pos += 1;
            }
            let start = pos;
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                pos += 1;
            }
            let digits: String = chars[start..pos].iter().collect();
            mult = digits
                .parse()
                .map_err(|_| Error::syntax(line, "expected an integer exponent after `^`"))?;
            if braced {
                if pos >= chars.len() || chars[pos] != '}' {
                    return Err(Error::syntax(line, "unterminated `^{`"));
                }
                pos += 1;
            }
        }
        cfg = cfg.term(&names, mult);
    }
    if cfg.terms().is_empty() {
        return Err(Error::syntax(line, "empty configuration"));
    }
    Ok(cfg)
}

/// Renders a group: bare for singletons, `[AB]` for single-character
/// members, `[A1 A2]` otherwise.
pub fn render_group(labels: &[&Label]) -> String {
    if labels.len() == 1 {
        return labels[0].to_string();
    }
    let sep = if labels.iter().all(|l| l.is_short()) { "" } else { " " };
    let inner: Vec<&str> = labels.iter().map(|l| l.as_str()).collect();
    format!("[{}]", inner.join(sep))
}

fn render_constraint(p: &Problem, side: Side, out: &mut String) {
    for c in p.constraint(side).configs() {
        let terms: Vec<String> = c
            .terms()
            .iter()
            .map(|t| {
                let g = render_group(&p.labels_of(t.group));
                if t.mult == 1 {
                    g
                } else {
                    format!("{g}^{}", t.mult)
                }
            })
            .collect();
        out.push_str(&terms.join(" "));
        out.push('\n');
    }
}

pub fn render_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "delta: {}", p.delta());
    out.push_str("white:\n");
    render_constraint(p, Side::White, &mut out);
    out.push_str("black:\n");
    render_constraint(p, Side::Black, &mut out);
    out
}

/// Renders a problem followed by a `sets:` section. Members are always
/// bracketed so that a singleton set stays distinguishable from a label.
pub fn render_with_sets(p: &Problem, sets: &BTreeMap<Label, Vec<Label>>) -> String {
    let mut out = render_problem(p);
    if sets.is_empty() {
        return out;
    }
    out.push_str("sets:\n");
    for (name, members) in sets {
        let refs: Vec<&Label> = members.iter().collect();
        let mut g = render_group(&refs);
        if refs.len() == 1 {
            g = format!("[{g}]");
        }
        let _ = writeln!(out, "{name} = {g}");
    }
    out
}
