//! Bounded automatic round elimination: after every step the result is
//! relaxed to at most `max_labels` labels by sending each set to a superset
//! from a small pool, and the search looks for the longest chain whose last
//! problem is still not 0-round solvable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::chain::{Chain, ChainStep, Relaxation};
use crate::error::{Error, Result};
use crate::problem::{canonical_key, expand_counts, Group, Label, Problem, Side, DEFAULT_EXPANSION_CAP};
use crate::re::{re_step, RawStepResult, ReLimits};
use crate::relax::{relax_to_targets, SetConfiguration};
use crate::zero_round::zero_round;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ranking {
    /// Fewer labels first, then more single configurations.
    FewerLabelsThenLarger,
    /// Fewer labels first, then fewer single configurations.
    FewerLabelsThenSmaller,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub max_labels: usize,
    pub max_steps: usize,
    /// Candidates explored below each problem.
    pub beam: usize,
    /// Add pairwise unions of result sets to the pool.
    pub unions: bool,
    /// Largest pool the subset enumeration accepts.
    pub max_pool: usize,
    pub ranking: Ranking,
    /// Total round elimination steps the search may run.
    pub max_re_steps: u64,
    pub limits: ReLimits,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            max_labels: 5,
            max_steps: 8,
            beam: 6,
            unions: true,
            max_pool: 24,
            ranking: Ranking::FewerLabelsThenLarger,
            max_re_steps: 5_000,
            limits: ReLimits {
                max_nodes: 20_000_000,
                ..ReLimits::default()
            },
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub chain: Chain,
    pub re_steps: u64,
    pub candidates: u64,
    /// The observer asked to stop.
    pub cancelled: bool,
}

/// Called after every round elimination step with the steps done so far;
/// returning false stops the search.
pub type Observer<'a> = &'a mut dyn FnMut(u64) -> bool;

#[derive(Clone)]
struct Candidate {
    relaxation: Relaxation,
    problem: Problem,
    key: Vec<u8>,
}

#[derive(Clone, Default)]
struct Found {
    steps: Vec<ChainStep>,
    fixed_point: Option<usize>,
}

impl Found {
    fn better_than(&self, other: &Found) -> bool {
        match (self.fixed_point.is_some(), other.fixed_point.is_some()) {
            (true, false) => true,
            (false, true) => false,
            _ => self.steps.len() > other.steps.len(),
        }
    }
}

struct Searcher<'a, 'o> {
    cfg: &'a SearchConfig,
    observer: Option<Observer<'o>>,
    re_steps: u64,
    candidates: u64,
    exhausted: bool,
    cancelled: bool,
    memo: HashMap<(Problem, Side), Rc<Vec<Candidate>>>,
    solvable: HashMap<(Vec<u8>, Side), bool>,
}

/// Searches for a long chain starting at `p`, checked for the white side.
/// Stops early, flagging the chain incomplete, when the step budget runs
/// out.
pub fn auto_bound(p: &Problem, cfg: &SearchConfig) -> Result<SearchOutcome> {
    search(p, cfg, None)
}

/// [`auto_bound`] reporting progress to `observer`, which may cancel.
pub fn auto_bound_observed(p: &Problem, cfg: &SearchConfig, observer: Observer<'_>) -> Result<SearchOutcome> {
    search(p, cfg, Some(observer))
}

fn search(p: &Problem, cfg: &SearchConfig, observer: Option<Observer<'_>>) -> Result<SearchOutcome> {
    if cfg.max_labels < 2 {
        return Err(Error::Range("max_labels must be at least 2".into()));
    }
    let mut s = Searcher {
        cfg,
        observer,
        re_steps: 0,
        candidates: 0,
        exhausted: false,
        cancelled: false,
        memo: HashMap::new(),
        solvable: HashMap::new(),
    };
    let key = canonical_key(p)?;
    let start_solvable = s.is_solvable(p, &key, Side::White)?;
    let mut best = Found::default();
    if !start_solvable {
        for depth in 1..=cfg.max_steps {
            let mut path = vec![(key.clone(), Side::White)];
            let found = s.dfs(p, Side::White, depth, &mut path)?;
            let reached = found.steps.len() == depth || found.fixed_point.is_some();
            if found.better_than(&best) {
                best = found;
            }
            if !reached || best.fixed_point.is_some() || s.exhausted {
                break;
            }
        }
    }
    let claimed_bound = if start_solvable { 0 } else { best.steps.len() + 1 };
    Ok(SearchOutcome {
        chain: Chain {
            start: p.clone(),
            start_side: Side::White,
            start_member: None,
            steps: best.steps,
            claimed_bound,
            fixed_point: best.fixed_point,
            complete: !s.exhausted,
        },
        re_steps: s.re_steps,
        candidates: s.candidates,
        cancelled: s.cancelled,
    })
}

impl Searcher<'_, '_> {
    fn is_solvable(&mut self, p: &Problem, key: &[u8], side: Side) -> Result<bool> {
        if let Some(&v) = self.solvable.get(&(key.to_vec(), side)) {
            return Ok(v);
        }
        let v = zero_round(p, side)?.solvable;
        self.solvable.insert((key.to_vec(), side), v);
        Ok(v)
    }

    /// Longest continuation below `p` (not 0-round solvable for `side`)
    /// of at most `depth` steps.
    fn dfs(&mut self, p: &Problem, side: Side, depth: usize, path: &mut Vec<(Vec<u8>, Side)>) -> Result<Found> {
        let mut best = Found::default();
        if depth == 0 || self.exhausted {
            return Ok(best);
        }
        let next = side.opposite();
        let cands = match self.expand(p, next) {
            Ok(c) => c,
            Err(e) if e.is_budget() => return Ok(best),
            Err(e) => return Err(e),
        };
        let mut explored = 0;
        for c in cands.iter() {
            if explored == self.cfg.beam {
                break;
            }
            if self.is_solvable(&c.problem, &c.key, next)? {
                continue;
            }
            explored += 1;
            let step = ChainStep {
                side: next,
                relaxation: c.relaxation.clone(),
                problem: c.problem.clone(),
                member: None,
                verified: true,
            };
            if let Some(j) = path.iter().position(|(k, s)| *k == c.key && *s == next) {
                return Ok(Found {
                    steps: vec![step],
                    fixed_point: Some(j),
                });
            }
            path.push((c.key.clone(), next));
            let below = self.dfs(&c.problem, next, depth - 1, path)?;
            path.pop();
            let mut found = Found {
                steps: vec![step],
                fixed_point: below.fixed_point,
            };
            found.steps.extend(below.steps);
            if found.better_than(&best) {
                best = found;
            }
            if best.steps.len() == depth || best.fixed_point.is_some() {
                break;
            }
        }
        Ok(best)
    }

    fn expand(&mut self, p: &Problem, side: Side) -> Result<Rc<Vec<Candidate>>> {
        if let Some(c) = self.memo.get(&(p.clone(), side)) {
            return Ok(c.clone());
        }
        if self.re_steps >= self.cfg.max_re_steps {
            self.exhausted = true;
            return Ok(Rc::new(Vec::new()));
        }
        self.re_steps += 1;
        let r = re_step(p, side, &self.cfg.limits)?;
        if let Some(obs) = self.observer.as_mut() {
            if !obs(self.re_steps) {
                self.cancelled = true;
                self.exhausted = true;
            }
        }
        let cands = Rc::new(self.candidates_of(&r)?);
        self.candidates += cands.len() as u64;
        self.memo.insert((p.clone(), side), cands.clone());
        Ok(cands)
    }

    fn candidates_of(&self, r: &RawStepResult) -> Result<Vec<Candidate>> {
        let universal: Vec<Vec<Group>> = r
            .result
            .constraint(r.side)
            .configs()
            .iter()
            .map(|c| {
                c.slots()
                    .iter()
                    .map(|g| r.set_of(r.result.label(g.members().next().expect("singleton"))).expect("set"))
                    .collect()
            })
            .collect();
        let sets: Vec<Group> = r.sets.values().copied().collect::<BTreeSet<_>>().into_iter().collect();

        let mut maps: Vec<BTreeMap<Group, Group>> = Vec::new();
        if sets.len() <= self.cfg.max_labels {
            maps.push(sets.iter().map(|&g| (g, g)).collect());
        } else {
            let mut pool: BTreeSet<Group> = sets.iter().copied().collect();
            if self.cfg.unions {
                for (i, &a) in sets.iter().enumerate() {
                    for &b in &sets[i + 1..] {
                        pool.insert(a.union(b));
                    }
                }
            }
            let mut pool: Vec<Group> = pool.into_iter().collect();
            if pool.len() > self.cfg.max_pool {
                // Keep the result sets and the largest unions.
                pool.sort_by(|a, b| sets.contains(b).cmp(&sets.contains(a)).then(b.len().cmp(&a.len())));
                pool.truncate(self.cfg.max_pool.max(sets.len()));
            }
            pool.sort();
            let mut chosen = Vec::new();
            covers(&pool, &sets, self.cfg.max_labels, 0, &mut chosen, &mut maps);
        }

        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for map in maps {
            let targets: BTreeSet<SetConfiguration> = universal
                .iter()
                .map(|cfg| SetConfiguration::new(cfg.iter().map(|g| (map[g], 1))))
                .collect();
            let targets: Vec<SetConfiguration> = targets.into_iter().collect();
            let raw = match relax_to_targets(r, &targets, &BTreeMap::new()) {
                Ok(q) => q,
                Err(e) if e.is_budget() => continue,
                Err(e) => return Err(e),
            };
            let renaming = short_names(&raw)?;
            let problem = raw.rename(&renaming)?;
            let key = canonical_key(&problem)?;
            if !seen.insert(key.clone()) {
                continue;
            }
            out.push(Candidate {
                relaxation: Relaxation {
                    targets,
                    extra: vec![],
                    renaming,
                },
                problem,
                key,
            });
        }
        // The unrelaxed result, when admissible, stays first.
        let keep_first = usize::from(sets.len() <= self.cfg.max_labels).min(out.len());
        let mut scored = Vec::with_capacity(out.len());
        for c in out.drain(keep_first..) {
            let n = c.problem.alphabet().len();
            let size = expand_counts(c.problem.constraint(r.side), n, DEFAULT_EXPANSION_CAP)
                .map(|e| e.len())
                .unwrap_or(usize::MAX);
            scored.push((n, size, c));
        }
        match self.cfg.ranking {
            Ranking::FewerLabelsThenLarger => scored.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1))),
            Ranking::FewerLabelsThenSmaller => scored.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1))),
        }
        out.extend(scored.into_iter().map(|t| t.2));
        Ok(out)
    }
}

/// Subsets `U` of the pool (at most `limit` sets) such that every set has a
/// superset in `U` and every member of `U` is the image of some set when
/// each set goes to its smallest superset in `U`.
fn covers(
    pool: &[Group],
    sets: &[Group],
    limit: usize,
    from: usize,
    chosen: &mut Vec<Group>,
    out: &mut Vec<BTreeMap<Group, Group>>,
) {
    if !chosen.is_empty() && sets.iter().all(|s| chosen.iter().any(|c| s.is_subset_of(*c))) {
        let map: BTreeMap<Group, Group> = sets
            .iter()
            .map(|&s| {
                let img = chosen
                    .iter()
                    .copied()
                    .filter(|c| s.is_subset_of(*c))
                    .min()
                    .expect("covered");
                (s, img)
            })
            .collect();
        let images: BTreeSet<Group> = map.values().copied().collect();
        if images.len() == chosen.len() {
            out.push(map);
        }
        return;
    }
    if chosen.len() == limit {
        return;
    }
    for i in from..pool.len() {
        chosen.push(pool[i]);
        covers(pool, sets, limit, i + 1, chosen, out);
        chosen.pop();
    }
}

/// Renames the labels of a relaxed result to `A`, `B`, … in order.
fn short_names(raw: &Problem) -> Result<BTreeMap<Label, Label>> {
    let mut map = BTreeMap::new();
    for (i, l) in raw.alphabet().iter().enumerate() {
        let name = if i < 26 {
            ((b'A' + i as u8) as char).to_string()
        } else {
            format!("L{i}")
        };
        map.insert(l.clone(), Label::new(name)?);
    }
    Ok(map)
}
