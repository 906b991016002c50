//! The supervisor: turns the agents' proposals into one transition.
//!
//! Proposals are checked for executability, grouped into components that
//! share effect fluents, and every inconsistent component is resolved by
//! the priority filter followed by either the configured strategy or
//! round-robin negotiation. The surviving set is then checked against the
//! global constraints of the next time step.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coordination::{negotiate_round_robin, Negotiator, Settlement, Turn};
use crate::expr::{CmpOp, Constraint, Expr};
use crate::lang::{Mode, Strategy};
use crate::semantics::{
    desired_effects, executable, inertial_complete, solve_effects, ActionRef, Assignment, Cons, ConflictPolicy,
    FluentId, Problem, State,
};

/// Pools larger than this are arbitrated greedily instead of exactly.
const EXACT_SUBSET_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Reason {
    NotExecutable,
    Priority,
    Arbitration,
    Forego,
    RetryAfter(u32),
    NegotiationExhausted,
    Global,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::NotExecutable => write!(f, "not_executable"),
            Reason::Priority => write!(f, "priority"),
            Reason::Arbitration => write!(f, "arbitration"),
            Reason::Forego => write!(f, "forego"),
            Reason::RetryAfter(t) => write!(f, "retry_after {t}"),
            Reason::NegotiationExhausted => write!(f, "negotiation_exhausted"),
            Reason::Global => write!(f, "global"),
        }
    }
}

impl std::str::FromStr for Reason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "not_executable" => Reason::NotExecutable,
            "priority" => Reason::Priority,
            "arbitration" => Reason::Arbitration,
            "forego" => Reason::Forego,
            "negotiation_exhausted" => Reason::NegotiationExhausted,
            "global" => Reason::Global,
            _ => {
                let n = s.strip_prefix("retry_after ").ok_or_else(|| format!("unknown reason `{s}`"))?;
                Reason::RetryAfter(n.parse().map_err(|_| format!("bad retry delay in `{s}`"))?)
            }
        })
    }
}

impl From<Settlement> for Reason {
    fn from(s: Settlement) -> Self {
        match s {
            Settlement::Forego => Reason::Forego,
            Settlement::RetryAfter(t) => Reason::RetryAfter(t),
            Settlement::Exhausted => Reason::NegotiationExhausted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no action set satisfies the global constraints at time {time}")]
pub struct GlobalUnsatisfiable {
    pub time: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    /// Index of the state the step starts from.
    pub time: usize,
    pub proposals: Vec<(String, Vec<ActionRef>)>,
    pub enabled: Vec<ActionRef>,
    pub inhibited: Vec<(ActionRef, Reason)>,
    pub conflicts: Vec<Vec<ActionRef>>,
    pub turns: Vec<Turn>,
    pub next: State,
    /// `(fluent, old, new)` for every fluent that changed.
    pub diffs: Vec<(FluentId, i64, i64)>,
}

impl StepResult {
    /// The first reason one of `agent`'s actions was inhibited, if any.
    pub fn failure_of(&self, agent: &str) -> Option<Reason> {
        self.inhibited.iter().find(|(a, _)| a.agent == agent).map(|(_, r)| *r)
    }

    pub fn inhibited_of(&self, agent: &str) -> Vec<(ActionRef, Reason)> {
        self.inhibited.iter().filter(|(a, _)| a.agent == agent).cloned().collect()
    }
}

struct Candidate {
    action: ActionRef,
    effects: Cons,
    priority: u32,
    options: Vec<ConflictPolicy>,
}

pub struct Supervisor<'a> {
    problem: &'a Problem,
    strategy: Strategy,
    mode: Mode,
    rng: ChaCha8Rng,
}

impl<'a> Supervisor<'a> {
    pub fn new(problem: &'a Problem, strategy: Strategy, mode: Mode, seed: u64) -> Self {
        Supervisor { problem, strategy, mode, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn solve(&self, seq: &[State], c: &Cons) -> Option<Assignment> {
        solve_effects(&self.problem.sig, seq, c)
    }

    fn joint(cands: &[Candidate], set: &[usize]) -> Cons {
        Constraint::all(set.iter().map(|&k| cands[k].effects.clone()))
    }

    fn consistent(&self, seq: &[State], cands: &[Candidate], set: &[usize]) -> bool {
        self.solve(seq, &Self::joint(cands, set)).is_some()
    }

    /// Runs one step from the last state of `seq`.
    pub fn step(&mut self, seq: &[State], proposals: &[(String, Vec<ActionRef>)]) -> Result<StepResult, GlobalUnsatisfiable> {
        let time = seq.len() - 1;
        let mut inhibited = Vec::new();
        let mut cands = Vec::new();
        let mut seen = BTreeSet::new();
        let mut all: Vec<&ActionRef> = proposals.iter().flat_map(|(_, v)| v).collect();
        all.sort();
        for a in all {
            if !seen.insert(a.clone()) {
                continue;
            }
            let spec = match self.problem.spec(a) {
                Some(s) if executable(&s, seq) => s,
                _ => {
                    inhibited.push((a.clone(), Reason::NotExecutable));
                    continue;
                }
            };
            let agent = self.problem.agent(&a.agent).expect("spec implies agent");
            let options = match agent.action(&a.action) {
                Some(m) => m.on_conflict.clone(),
                None => vec![ConflictPolicy::Arbitrate],
            };
            cands.push(Candidate { action: a.clone(), effects: desired_effects(&spec, seq), priority: agent.priority, options });
        }

        let mut enabled = Vec::new();
        let mut conflicts = Vec::new();
        let mut turns = Vec::new();
        for comp in components(&cands) {
            if self.consistent(seq, &cands, &comp) {
                enabled.extend(comp);
                continue;
            }
            conflicts.push(comp.iter().map(|&k| cands[k].action.clone()).collect());
            let mut pool = comp;
            while !self.consistent(seq, &cands, &pool) {
                let levels: BTreeSet<u32> = pool.iter().map(|&k| cands[k].priority).collect();
                if levels.len() < 2 {
                    break;
                }
                let lowest = *levels.iter().next_back().unwrap();
                pool.retain(|&k| {
                    let keep = cands[k].priority != lowest;
                    if !keep {
                        inhibited.push((cands[k].action.clone(), Reason::Priority));
                    }
                    keep
                });
            }
            if self.mode == Mode::Negotiate && !self.consistent(seq, &cands, &pool) {
                let entries: Vec<Negotiator> = pool
                    .iter()
                    .map(|&k| Negotiator { action: cands[k].action.clone(), options: cands[k].options.clone() })
                    .collect();
                let res = negotiate_round_robin(&self.problem.sig, &entries, seq, |set| {
                    let idx: Vec<usize> = set.iter().map(|&j| pool[j]).collect();
                    self.consistent(seq, &cands, &idx)
                });
                for (j, s) in &res.dropped {
                    inhibited.push((cands[pool[*j]].action.clone(), (*s).into()));
                }
                turns.extend(res.turns);
                pool = res.survivors.iter().map(|&j| pool[j]).collect();
            }
            if self.consistent(seq, &cands, &pool) {
                enabled.extend(pool);
                continue;
            }
            let chosen = match self.strategy {
                Strategy::MaxSubset => self.max_subset(&pool, |s| self.consistent(seq, &cands, s)),
                Strategy::Random => self.random_single(seq, &cands, &pool),
            };
            for &k in &pool {
                if !chosen.contains(&k) {
                    inhibited.push((cands[k].action.clone(), Reason::Arbitration));
                }
            }
            enabled.extend(chosen);
        }
        enabled.sort();

        let (enabled, sigma) = self.enforce_globals(seq, &cands, enabled, &mut inhibited, &mut conflicts)?;
        let last = seq.last().unwrap();
        let next = inertial_complete(&sigma, last);
        let diffs = self.problem.sig.ids().filter(|&f| last[f] != next[f]).map(|f| (f, last[f], next[f])).collect();
        inhibited.sort();
        Ok(StepResult {
            time,
            proposals: proposals.to_vec(),
            enabled: enabled.into_iter().map(|k| cands[k].action.clone()).collect(),
            inhibited,
            conflicts,
            turns,
            next,
            diffs,
        })
    }

    /// The lexicographically first largest subset accepted by `ok`.
    fn max_subset(&self, pool: &[usize], ok: impl Fn(&[usize]) -> bool) -> Vec<usize> {
        if pool.len() > EXACT_SUBSET_LIMIT {
            log::warn!("arbitrating {} actions greedily", pool.len());
            let mut chosen = Vec::new();
            for &k in pool {
                chosen.push(k);
                if !ok(&chosen) {
                    chosen.pop();
                }
            }
            return chosen;
        }
        for size in (0..=pool.len()).rev() {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let set: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
                if ok(&set) {
                    return set;
                }
                if !next_combination(&mut idx, pool.len()) {
                    break;
                }
            }
        }
        Vec::new()
    }

    fn random_single(&mut self, seq: &[State], cands: &[Candidate], pool: &[usize]) -> Vec<usize> {
        let ok: Vec<usize> = pool.iter().copied().filter(|&k| self.consistent(seq, cands, &[k])).collect();
        if ok.is_empty() {
            return Vec::new();
        }
        vec![ok[self.rng.gen_range(0..ok.len())]]
    }

    /// Effects of `set` plus the globals due at the next time step, with
    /// global fluents outside the effects held fixed.
    fn with_globals(&self, t: usize, cands: &[Candidate], set: &[usize]) -> Cons {
        let eff = Self::joint(cands, set);
        let touched = eff.fluents();
        let globals: Vec<&Cons> = self.problem.globals.iter().filter(|g| g.applies_at(t)).map(|g| g.constraint()).collect();
        let mut frame_fluents = BTreeSet::new();
        for g in &globals {
            frame_fluents.extend(g.fluents().into_iter().filter(|f| !touched.contains(f)));
        }
        let frames = frame_fluents.into_iter().map(|f| Constraint::cmp(CmpOp::Eq, Expr::fluent(f), Expr::past(f, 1)));
        Constraint::all(std::iter::once(eff).chain(globals.into_iter().cloned()).chain(frames))
    }

    fn enforce_globals(
        &mut self,
        seq: &[State],
        cands: &[Candidate],
        enabled: Vec<usize>,
        inhibited: &mut Vec<(ActionRef, Reason)>,
        conflicts: &mut Vec<Vec<ActionRef>>,
    ) -> Result<(Vec<usize>, Assignment), GlobalUnsatisfiable> {
        let t = seq.len();
        if let Some(sigma) = self.solve(seq, &self.with_globals(t, cands, &enabled)) {
            return Ok((enabled, sigma));
        }
        conflicts.push(enabled.iter().map(|&k| cands[k].action.clone()).collect());
        let ok = |s: &[usize]| self.solve(seq, &self.with_globals(t, cands, s)).is_some();
        let chosen = match self.strategy {
            Strategy::MaxSubset => self.max_subset(&enabled, ok),
            Strategy::Random => {
                let mut order = enabled.clone();
                order.shuffle(&mut self.rng);
                let mut chosen = Vec::new();
                for k in order {
                    chosen.push(k);
                    if self.solve(seq, &self.with_globals(t, cands, &chosen)).is_none() {
                        chosen.pop();
                    }
                }
                chosen.sort();
                chosen
            }
        };
        let sigma = self.solve(seq, &self.with_globals(t, cands, &chosen)).ok_or(GlobalUnsatisfiable { time: t - 1 })?;
        for &k in &enabled {
            if !chosen.contains(&k) {
                inhibited.push((cands[k].action.clone(), Reason::Global));
            }
        }
        Ok((chosen, sigma))
    }
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Groups candidates that share a timeless effect fluent; each group is
/// sorted, groups are ordered by their first member.
fn components(cands: &[Candidate]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..cands.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut owner: std::collections::BTreeMap<FluentId, usize> = Default::default();
    for (k, c) in cands.iter().enumerate() {
        for f in c.effects.fluents() {
            match owner.get(&f) {
                Some(&o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, k));
                    parent[a.max(b)] = a.min(b);
                }
                None => {
                    owner.insert(f, k);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for k in 0..cands.len() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    groups.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_theory;
    use crate::semantics::collect_initial;

    fn problem(srcs: &[&str]) -> Problem {
        Problem::compile(&srcs.iter().map(|s| parse_theory(s).unwrap()).collect::<Vec<_>>()).unwrap()
    }

    fn conflict() -> Problem {
        problem(&[
            "agent a priority 0. fluent f valued 0..3. action act_a on_conflict retry_after 2. executable act_a if true. act_a causes f = 1. goal f = 1. initially f = 0.",
            "agent b priority 0. fluent f valued 0..3. action act_b on_conflict forego. executable act_b if true. act_b causes f = 2. goal f = 2.",
            "agent c priority 2. fluent f valued 0..3. action act_c on_failure retry_after 3. executable act_c if true. act_c causes f = 3. goal f = 3.",
        ])
    }

    fn proposals(names: &[(&str, &str)]) -> Vec<(String, Vec<ActionRef>)> {
        names.iter().map(|(a, x)| (a.to_string(), vec![ActionRef::new(*a, *x)])).collect()
    }

    fn all_three() -> Vec<(String, Vec<ActionRef>)> {
        proposals(&[("a", "act_a"), ("b", "act_b"), ("c", "act_c")])
    }

    #[test]
    fn supervisor_mode_filters_priority_then_picks_first() {
        let p = conflict();
        let init = collect_initial(&p).unwrap();
        let mut s = Supervisor::new(&p, Strategy::MaxSubset, Mode::Supervisor, 0);
        let r = s.step(&[init], &all_three()).unwrap();
        assert_eq!(r.enabled, vec![ActionRef::new("a", "act_a")]);
        assert_eq!(r.failure_of("c"), Some(Reason::Priority));
        assert_eq!(r.failure_of("b"), Some(Reason::Arbitration));
        assert_eq!(r.next, vec![1]);
        assert_eq!(r.diffs, vec![(0, 0, 1)]);
        assert_eq!(r.conflicts.len(), 1);
    }

    #[test]
    fn negotiate_mode_drops_both() {
        let p = conflict();
        let init = collect_initial(&p).unwrap();
        let mut s = Supervisor::new(&p, Strategy::MaxSubset, Mode::Negotiate, 0);
        let r = s.step(&[init], &all_three()).unwrap();
        assert!(r.enabled.is_empty());
        assert_eq!(r.failure_of("a"), Some(Reason::RetryAfter(2)));
        assert_eq!(r.failure_of("b"), Some(Reason::Forego));
        assert_eq!(r.failure_of("c"), Some(Reason::Priority));
        assert_eq!(r.turns.len(), 2);
        assert_eq!(r.next, vec![0]);
    }

    #[test]
    fn random_is_seeded() {
        let p = conflict();
        let init = collect_initial(&p).unwrap();
        let pick = |seed| {
            let mut s = Supervisor::new(&p, Strategy::Random, Mode::Supervisor, seed);
            let props = proposals(&[("a", "act_a"), ("b", "act_b")]);
            s.step(std::slice::from_ref(&init), &props).unwrap().enabled
        };
        for seed in 0..10 {
            assert_eq!(pick(seed), pick(seed));
            assert_eq!(pick(seed).len(), 1);
        }
        let distinct: BTreeSet<_> = (0..40).map(pick).collect();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn independent_actions_are_all_enabled() {
        let p = problem(&[
            "agent a. fluent x valued 0..3. action go. executable go if true. go causes x = 2.",
            "agent b. fluent y valued 0..3. action go. executable go if true. go causes y = 1.",
        ]);
        let init = collect_initial(&p).unwrap();
        let mut s = Supervisor::new(&p, Strategy::MaxSubset, Mode::Supervisor, 0);
        let r = s.step(&[init], &proposals(&[("a", "go"), ("b", "go")])).unwrap();
        assert_eq!(r.enabled.len(), 2);
        assert!(r.conflicts.is_empty());
        assert_eq!(r.next, vec![2, 1]);
    }

    #[test]
    fn global_drops_colliding_action() {
        let p = problem(&[
            "agent a. fluent x, y valued 0..3. action go. executable go if true. go causes x = 2. always x != y. initially x = 0 and y = 1.",
            "agent b. fluent x, y valued 0..3. action go. executable go if true. go causes y = 2.",
        ]);
        let init = collect_initial(&p).unwrap();
        let mut s = Supervisor::new(&p, Strategy::MaxSubset, Mode::Supervisor, 0);
        let r = s.step(std::slice::from_ref(&init), &proposals(&[("a", "go"), ("b", "go")])).unwrap();
        assert_eq!(r.enabled, vec![ActionRef::new("a", "go")]);
        assert_eq!(r.failure_of("b"), Some(Reason::Global));
        assert_eq!(r.next, vec![2, 1]);
        let r = s.step(&[init], &proposals(&[("b", "go")])).unwrap();
        assert!(r.enabled.is_empty() || r.next[0] != r.next[1]);
    }

    #[test]
    fn non_executable_is_inhibited() {
        let p = problem(&["agent a. fluent x valued 0..3. action go. executable go if x > 0. go causes x = 2."]);
        let init = collect_initial(&p).unwrap();
        let mut s = Supervisor::new(&p, Strategy::MaxSubset, Mode::Supervisor, 0);
        let r = s.step(&[init], &proposals(&[("a", "go"), ("a", "fly")])).unwrap();
        assert!(r.enabled.is_empty());
        assert_eq!(r.inhibited.len(), 2);
        assert!(r.inhibited.iter().all(|(_, why)| *why == Reason::NotExecutable));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn reasons_round_trip() {
        for r in [Reason::Priority, Reason::RetryAfter(3), Reason::Global, Reason::NegotiationExhausted] {
            assert_eq!(r.to_string().parse::<Reason>(), Ok(r));
        }
    }
}
