//! Bounded-horizon planning over one agent's theory.
//!
//! Other agents are assumed idle: fluents the agent does not change keep
//! their values. Plans are found by iterative deepening on the number of
//! planned steps; the remaining steps up to the horizon are empty.

use std::collections::HashSet;

use crate::expr::Constraint;
use crate::semantics::{
    apply_effects, desired_effects, executable, ActionRef, ActionSpec, AgentModel, Cons, Global, Law, Problem, State,
    Timeline,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    /// Search nodes expanded per planning call before giving up.
    pub node_budget: u64,
    /// Largest action set considered per step; `None` is unbounded.
    pub max_set_size: Option<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { node_budget: 200_000, max_set_size: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no plan exists within the horizon")]
    NoPlan,
    #[error("search budget exceeded")]
    BudgetExceeded,
}

/// A committed promise to make `wanted` true at time `due`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub requester: String,
    pub request: usize,
    pub wanted: Cons,
    pub due: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PlanInput<'a> {
    pub seq: &'a [State],
    /// Absolute horizon N.
    pub horizon: usize,
    /// Goals added by failure policies; checked at N with the theory's goals.
    pub extra_goals: &'a [Cons],
    pub obligations: &'a [Obligation],
    /// Allow steps that count on the agent's own requests being served.
    pub anticipate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub agent: String,
    /// Time index of the state the plan starts from.
    pub start: usize,
    pub steps: Vec<Vec<ActionRef>>,
    /// `states[k]` is the predicted state at time `start + k + 1`.
    pub states: Vec<State>,
}

const EXPECT_PREFIX: &str = "expect.";

impl Plan {
    /// Actions to propose at time `t` (empty past the end of the plan).
    /// Anticipated request fulfilments are not proposed.
    pub fn proposal_at(&self, t: usize) -> Vec<ActionRef> {
        t.checked_sub(self.start)
            .and_then(|k| self.steps.get(k))
            .map(|s| s.iter().filter(|a| !is_anticipation(a)).cloned().collect())
            .unwrap_or_default()
    }

    /// Predicted state at time `t`, if the plan covers it.
    pub fn predicted(&self, t: usize) -> Option<&State> {
        let k = t.checked_sub(self.start + 1)?;
        self.states.get(k).or(self.states.last())
    }

    /// Whether the plan counts on a request being served at step `t`.
    pub fn anticipates_at(&self, t: usize) -> bool {
        t.checked_sub(self.start).and_then(|k| self.steps.get(k)).is_some_and(|s| s.iter().any(is_anticipation))
    }
}

pub fn is_anticipation(a: &ActionRef) -> bool {
    a.action.starts_with(EXPECT_PREFIX)
}

pub struct Planner<'a> {
    problem: &'a Problem,
    agent: &'a AgentModel,
    config: PlannerConfig,
}

impl<'a> Planner<'a> {
    pub fn new(problem: &'a Problem, agent: &str, config: PlannerConfig) -> Self {
        let agent = problem.agent(agent).unwrap_or_else(|| panic!("unknown agent `{agent}`"));
        Planner { problem, agent, config }
    }

    /// Own actions, help actions for pending obligations, and (if asked)
    /// anticipated fulfilments of the agent's own requests.
    pub fn actions(&self, obligations: &[Obligation], now: usize, anticipate: bool) -> Vec<(ActionRef, ActionSpec)> {
        let mut out: Vec<(ActionRef, ActionSpec)> =
            self.agent.actions.iter().map(|a| (ActionRef::new(&self.agent.name, &a.name), a.into())).collect();
        let mut seen = HashSet::new();
        for ob in obligations.iter().filter(|o| o.due > now) {
            if !seen.insert((ob.requester.clone(), ob.request)) {
                continue;
            }
            let Some(requester) = self.problem.agent(&ob.requester) else { continue };
            let Some(request) = requester.requests.get(ob.request) else { continue };
            for (h, help) in self.agent.helps.iter().enumerate() {
                if self.problem.can_help(self.agent, requester, request, help) {
                    out.push((
                        ActionRef::help(&self.agent.name, &ob.requester, ob.request, h),
                        self.problem.help_spec(request, help),
                    ));
                }
            }
        }
        if anticipate {
            for (r, request) in self.agent.requests.iter().enumerate() {
                let servable = self.problem.agents.iter().any(|helper| {
                    helper.helps.iter().any(|h| self.problem.can_help(helper, self.agent, request, h))
                });
                if !servable {
                    continue;
                }
                let eff = match &request.offer {
                    Some(o) => Constraint::all([request.wanted.clone(), o.clone()]),
                    None => request.wanted.clone(),
                };
                out.push((
                    ActionRef::new(&self.agent.name, format!("{EXPECT_PREFIX}{r}")),
                    ActionSpec { exec: vec![request.trigger.clone()], laws: vec![Law { eff, prec: Constraint::True }] },
                ));
            }
        }
        out
    }

    pub fn plan(&self, input: &PlanInput) -> Result<Plan, PlanError> {
        let now = input.seq.len() - 1;
        let actions = self.actions(input.obligations, now, input.anticipate);
        let mut goals = self.agent.goals.clone();
        goals.extend(input.extra_goals.iter().cloned());
        let obligations: Vec<(Cons, usize)> = input
            .obligations
            .iter()
            .filter(|o| o.due > now && o.due <= input.horizon)
            .map(|o| (o.wanted.clone(), o.due))
            .collect();
        let mut window = 0;
        let mut widen = |c: &Cons| window = window.max(c.max_back() as usize);
        for (_, spec) in &actions {
            spec.exec.iter().for_each(&mut widen);
            for l in &spec.laws {
                widen(&l.prec);
                widen(&l.eff);
            }
        }
        goals.iter().for_each(&mut widen);
        self.agent.globals.iter().for_each(|g| widen(g.constraint()));
        obligations.iter().for_each(|(c, _)| widen(c));

        let mut s = Search {
            problem: self.problem,
            actions,
            goals,
            globals: &self.agent.globals,
            obligations,
            horizon: input.horizon,
            window,
            config: self.config,
            nodes: 0,
            failed: HashSet::new(),
        };
        if input.horizon < now {
            return Err(PlanError::NoPlan);
        }
        let remaining = input.horizon - now;
        let mut seq = input.seq.to_vec();
        if !s.step_ok(&seq) {
            return Err(PlanError::NoPlan);
        }
        for depth in 0..=remaining {
            let mut picked = Vec::new();
            if s.search(&mut seq, depth, &mut picked)? {
                let states = seq[now + 1..now + 1 + depth].to_vec();
                let steps = picked.into_iter().map(|set: Vec<usize>| set.into_iter().map(|k| s.actions[k].0.clone()).collect()).collect();
                return Ok(Plan { agent: self.agent.name.clone(), start: now, steps, states });
            }
        }
        Err(PlanError::NoPlan)
    }
}

struct Search<'a> {
    problem: &'a Problem,
    actions: Vec<(ActionRef, ActionSpec)>,
    goals: Vec<Cons>,
    globals: &'a [Global],
    obligations: Vec<(Cons, usize)>,
    horizon: usize,
    window: usize,
    config: PlannerConfig,
    nodes: u64,
    failed: HashSet<(Vec<State>, usize, usize)>,
}

impl Search<'_> {
    /// Checks the constraints that apply at the last time index of `seq`.
    fn step_ok(&self, seq: &[State]) -> bool {
        let tl = Timeline::new(seq);
        let t = tl.last();
        self.globals.iter().all(|g| !g.applies_at(t) || tl.satisfied(t, g.constraint()))
            && self.obligations.iter().all(|(c, due)| *due != t || tl.satisfied(t, c))
    }

    /// Pads with empty steps to the horizon and checks the goals there.
    fn finish(&self, seq: &mut Vec<State>) -> bool {
        let start = seq.len();
        let mut ok = true;
        while seq.len() <= self.horizon {
            seq.push(seq.last().unwrap().clone());
            if !self.step_ok(seq) {
                ok = false;
                break;
            }
        }
        if ok {
            let tl = Timeline::new(seq);
            ok = self.goals.iter().all(|g| tl.satisfied_now(g));
        }
        seq.truncate(start);
        ok
    }

    /// Consistent action sets executable now with their successor states,
    /// smallest sets first, ties by action order, the empty set last.
    fn successors(&self, seq: &[State]) -> Vec<(Vec<usize>, State)> {
        let ready: Vec<(usize, Cons)> = self
            .actions
            .iter()
            .enumerate()
            .filter(|(_, (_, spec))| executable(spec, seq))
            .map(|(k, (_, spec))| (k, desired_effects(spec, seq)))
            .collect();
        let cap = self.config.max_set_size.unwrap_or(usize::MAX);
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        self.extend(seq, &ready, 0, &mut chosen, &mut Vec::new(), cap, &mut out);
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out.push((Vec::new(), seq.last().unwrap().clone()));
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        seq: &[State],
        ready: &[(usize, Cons)],
        from: usize,
        chosen: &mut Vec<usize>,
        effects: &mut Vec<Cons>,
        cap: usize,
        out: &mut Vec<(Vec<usize>, State)>,
    ) {
        if chosen.len() >= cap {
            return;
        }
        for p in from..ready.len() {
            effects.push(ready[p].1.clone());
            let joint = Constraint::all(effects.iter().cloned());
            if let Some(next) = apply_effects(&self.problem.sig, seq, &joint) {
                chosen.push(ready[p].0);
                out.push((chosen.clone(), next));
                self.extend(seq, ready, p + 1, chosen, effects, cap, out);
                chosen.pop();
            }
            effects.pop();
        }
    }

    fn key(&self, seq: &[State], depth: usize) -> (Vec<State>, usize, usize) {
        let t = seq.len() - 1;
        let lo = t.saturating_sub(self.window);
        (seq[lo..].to_vec(), t, depth)
    }

    fn search(&mut self, seq: &mut Vec<State>, depth: usize, picked: &mut Vec<Vec<usize>>) -> Result<bool, PlanError> {
        if depth == 0 {
            return Ok(self.finish(seq));
        }
        self.nodes += 1;
        if self.nodes > self.config.node_budget {
            return Err(PlanError::BudgetExceeded);
        }
        let key = self.key(seq, depth);
        if self.failed.contains(&key) {
            return Ok(false);
        }
        for (set, next) in self.successors(seq) {
            seq.push(next);
            if self.step_ok(seq) {
                picked.push(set);
                if self.search(seq, depth - 1, picked)? {
                    return Ok(true);
                }
                picked.pop();
            }
            seq.pop();
        }
        self.failed.insert(key);
        Ok(false)
    }
}
