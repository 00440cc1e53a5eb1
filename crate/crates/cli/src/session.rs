//! Interactive sessions: a problem history with undo and redo, where every
//! entry records the action that produced it.

use std::collections::BTreeMap;

use roundelim_core::family::{apply_step, Relaxation};
use roundelim_core::problem::{parse_named_configuration, parse_problem, render_problem, Label, Problem, Side};
use roundelim_core::re::ReLimits;
use roundelim_core::relax::{add_configurations, merge_labels, replace_everywhere, RelaxationMap, SetConfiguration};
use roundelim_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::ops::{problem_hash, speedup};

pub const SNAPSHOT_FORMAT: &str = "roundelim-session/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    ReBlack {
        #[serde(default)]
        keep_set_names: bool,
    },
    ReWhite {
        #[serde(default)]
        keep_set_names: bool,
    },
    /// Replace `from` by `to` on `side`, checked against the diagram of the
    /// other side.
    Merge { side: Side, pairs: Vec<(String, String)> },
    Replace { from: String, to: String },
    /// A step with universal side `side`, relaxed to `targets` (written over
    /// the current labels), then `extra` and `renaming` applied.
    RelaxToTargets {
        side: Side,
        targets: Vec<String>,
        #[serde(default)]
        extra: Vec<String>,
        #[serde(default)]
        renaming: BTreeMap<String, String>,
    },
    AddConfigs { side: Side, configs: Vec<String> },
    Rename { map: BTreeMap<String, String> },
}

fn labels(map: &BTreeMap<String, String>) -> Result<BTreeMap<Label, Label>> {
    map.iter()
        .map(|(a, b)| Ok((Label::new(a.as_str())?, Label::new(b.as_str())?)))
        .collect()
}

impl Action {
    pub fn apply(&self, p: &Problem, limits: &ReLimits) -> Result<Problem> {
        match self {
            Action::ReBlack { keep_set_names } => Ok(speedup(p, Side::Black, *keep_set_names, limits)?.problem),
            Action::ReWhite { keep_set_names } => Ok(speedup(p, Side::White, *keep_set_names, limits)?.problem),
            Action::Merge { side, pairs } => {
                let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                merge_labels(p, &RelaxationMap::merge(*side, &refs)?)
            }
            Action::Replace { from, to } => replace_everywhere(p, from, to),
            Action::RelaxToTargets {
                side,
                targets,
                extra,
                renaming,
            } => {
                let relax = Relaxation {
                    targets: targets
                        .iter()
                        .map(|t| SetConfiguration::parse(t, p))
                        .collect::<Result<_>>()?,
                    extra: extra.iter().map(|t| parse_named_configuration(t)).collect::<Result<_>>()?,
                    renaming: labels(renaming)?,
                };
                Ok(apply_step(p, *side, &relax, limits)?.1)
            }
            Action::AddConfigs { side, configs } => {
                let cfgs = configs
                    .iter()
                    .map(|t| parse_named_configuration(t))
                    .collect::<Result<Vec<_>>>()?;
                add_configurations(p, *side, &cfgs)
            }
            Action::Rename { map } => p.rename(&labels(map)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    #[serde(flatten)]
    pub action: Action,
    /// Hash of the resulting problem.
    pub hash: String,
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub problem: Problem,
    pub hash: String,
    /// None for the loaded problem.
    pub record: Option<ActionRecord>,
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: String,
    entries: Vec<Entry>,
    cursor: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SessionView {
    pub id: String,
    pub problem: String,
    pub hash: String,
    pub cursor: usize,
    pub history_len: usize,
    pub can_undo: bool,
    pub can_redo: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub index: usize,
    pub problem: String,
    pub hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub id: String,
    pub cursor: usize,
    pub history: Vec<HistoryEntry>,
}

impl Session {
    pub fn new(id: impl Into<String>, problem: Problem) -> Session {
        let hash = problem_hash(&problem);
        Session {
            id: id.into(),
            entries: vec![Entry {
                problem,
                hash,
                record: None,
            }],
            cursor: 0,
        }
    }

    pub fn current(&self) -> &Problem {
        &self.entries[self.cursor].problem
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Applies `action` to the current problem, dropping any redo tail.
    pub fn apply(&mut self, action: Action, limits: &ReLimits) -> Result<&Entry> {
        let problem = action.apply(self.current(), limits)?;
        let hash = problem_hash(&problem);
        self.entries.truncate(self.cursor + 1);
        self.entries.push(Entry {
            problem,
            hash: hash.clone(),
            record: Some(ActionRecord { action, hash }),
        });
        self.cursor += 1;
        Ok(&self.entries[self.cursor])
    }

    pub fn undo(&mut self) -> bool {
        if self.cursor == 0 {
            return false;
        }
        self.cursor -= 1;
        true
    }

    pub fn redo(&mut self) -> bool {
        if self.cursor + 1 >= self.entries.len() {
            return false;
        }
        self.cursor += 1;
        true
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id.clone(),
            problem: render_problem(self.current()),
            hash: self.entries[self.cursor].hash.clone(),
            cursor: self.cursor,
            history_len: self.entries.len(),
            can_undo: self.cursor > 0,
            can_redo: self.cursor + 1 < self.entries.len(),
        }
    }

    pub fn history(&self) -> Vec<HistoryEntry> {
        self.entries
            .iter()
            .enumerate()
            .map(|(index, e)| HistoryEntry {
                index,
                problem: render_problem(&e.problem),
                hash: e.hash.clone(),
                action: e.record.clone(),
            })
            .collect()
    }

    /// Re-executes every recorded action from the loaded problem and
    /// reports the first entry whose hash differs.
    pub fn replay(&self, limits: &ReLimits) -> Result<Option<usize>> {
        let mut p = self.entries[0].problem.clone();
        for (i, e) in self.entries.iter().enumerate().skip(1) {
            let record = e.record.as_ref().expect("later entries carry a record");
            p = record.action.apply(&p, limits)?;
            if problem_hash(&p) != record.hash {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            id: self.id.clone(),
            cursor: self.cursor,
            history: self.history(),
        }
    }

    /// Rebuilds a session by replaying a snapshot; fails if a hash differs.
    pub fn from_snapshot(s: &Snapshot, limits: &ReLimits) -> Result<Session> {
        if s.format != SNAPSHOT_FORMAT {
            return Err(Error::Certificate(format!("unknown snapshot format `{}`", s.format)));
        }
        let first = s
            .history
            .first()
            .ok_or_else(|| Error::Certificate("empty snapshot history".into()))?;
        let mut session = Session::new(s.id.clone(), parse_problem(&first.problem)?);
        for h in &s.history[1..] {
            let record = h
                .action
                .as_ref()
                .ok_or_else(|| Error::Certificate(format!("entry {} has no action", h.index)))?;
            let e = session.apply(record.action.clone(), limits)?;
            if e.hash != record.hash {
                return Err(Error::Certificate(format!("entry {} does not replay", h.index)));
            }
        }
        if s.cursor >= session.entries.len() {
            return Err(Error::Certificate("cursor out of range".into()));
        }
        session.cursor = s.cursor;
        Ok(session)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BMM: &str = "delta: 3\nwhite:\nM O^2\nP^3\nblack:\nM [OP]^2\nO^3\n";

    #[test]
    fn undo_redo_and_replay() {
        let limits = ReLimits::default();
        let mut s = Session::new("s", parse_problem(BMM).unwrap());
        let h0 = s.view().hash;
        s.apply(Action::ReBlack { keep_set_names: false }, &limits).unwrap();
        let h1 = s.view().hash;
        assert_ne!(h0, h1);
        assert!(s.undo());
        assert_eq!(s.view().hash, h0);
        assert!(s.redo());
        assert_eq!(s.view().hash, h1);
        assert!(!s.redo());
        assert_eq!(s.replay(&limits).unwrap(), None);

        let back = Session::from_snapshot(&s.snapshot(), &limits).unwrap();
        assert_eq!(back.view().hash, h1);
        let json = serde_json::to_string(&s.snapshot()).unwrap();
        assert!(json.contains("\"kind\":\"re_black\""));
    }

    #[test]
    fn new_action_drops_the_redo_tail() {
        let limits = ReLimits::default();
        let mut s = Session::new("s", parse_problem(BMM).unwrap());
        s.apply(Action::ReBlack { keep_set_names: true }, &limits).unwrap();
        s.undo();
        s.apply(
            Action::Rename {
                map: [("M".to_string(), "Q".to_string())].into_iter().collect(),
            },
            &limits,
        )
        .unwrap();
        assert_eq!(s.entries().len(), 2);
        assert!(s.current().index_of("Q").is_some());
    }
}
