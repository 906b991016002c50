//! Independent trajectory checker.

use std::fmt;

use super::eval::Timeline;
use super::model::{ActionRef, Problem, State};
use super::transition::{desired_effects, executable};
use crate::expr::Constraint;

/// States `v_0..v_N` and the action sets `X_1..X_N` between them;
/// `actions[i]` leads from `states[i]` to `states[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub actions: Vec<Vec<ActionRef>>,
}

impl Trajectory {
    pub fn new(init: State) -> Self {
        Trajectory { states: vec![init], actions: Vec::new() }
    }

    pub fn push(&mut self, actions: Vec<ActionRef>, state: State) {
        self.actions.push(actions);
        self.states.push(state);
    }

    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Length,
    UnknownAction,
    NotExecutable,
    Domain,
    Initial,
    Effect,
    Inertia,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Time index of the offending state (for transitions, the target state).
    pub time: usize,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "time {}: {}", self.time, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub violations: Vec<Violation>,
    /// Per agent, whether all its goals hold at the horizon.
    pub success: Vec<(String, bool)>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Checks that `traj` is a valid trajectory of length `n` and reports which
/// agents succeed at time `n`.
pub fn check_trajectory(problem: &Problem, traj: &Trajectory, n: usize) -> Report {
    let sig = &problem.sig;
    let mut out = Vec::new();
    let mut push = |time, kind, message: String| out.push(Violation { time, kind, message });

    if traj.states.len() != traj.actions.len() + 1 || traj.states.is_empty() {
        push(0, ViolationKind::Length, "states and action sets do not alternate".into());
        return Report { violations: out, success: Vec::new() };
    }
    if traj.steps() != n {
        push(traj.steps(), ViolationKind::Length, format!("expected {n} steps, found {}", traj.steps()));
    }
    for (t, s) in traj.states.iter().enumerate() {
        if s.len() != sig.len() {
            push(t, ViolationKind::Length, format!("state has {} values for {} fluents", s.len(), sig.len()));
            return Report { violations: out, success: Vec::new() };
        }
        for f in sig.ids() {
            if !sig.domain(f).contains(s[f]) {
                push(t, ViolationKind::Domain, format!("{} = {} is outside {}", sig.name(f), s[f], sig.domain(f)));
            }
        }
    }
    let init = Timeline::new(&traj.states[..1]);
    for a in &problem.agents {
        for c in &a.initially {
            if !init.satisfied(0, c) {
                push(0, ViolationKind::Initial, format!("initial axiom of {} fails: {}", a.name, sig.show(c)));
            }
        }
    }
    for i in 0..traj.steps() {
        let prefix = &traj.states[..=i];
        let mut effects = Vec::new();
        for a in &traj.actions[i] {
            let Some(spec) = problem.spec(a) else {
                push(i + 1, ViolationKind::UnknownAction, format!("unknown action {a}"));
                continue;
            };
            if !executable(&spec, prefix) {
                push(i + 1, ViolationKind::NotExecutable, format!("{a} is not executable at time {i}"));
            }
            effects.push(desired_effects(&spec, prefix));
        }
        let c = Constraint::all(effects);
        let tl = Timeline::extended(prefix, &traj.states[i + 1]);
        if !tl.satisfied(i + 1, &c) {
            push(i + 1, ViolationKind::Effect, format!("effects do not hold: {}", sig.show(&c)));
        }
        let touched = c.fluents();
        for f in sig.ids() {
            let (old, new) = (traj.states[i][f], traj.states[i + 1][f]);
            if !touched.contains(&f) && old != new {
                push(i + 1, ViolationKind::Inertia, format!("{} changed from {old} to {new} without a cause", sig.name(f)));
            }
        }
    }
    let full = Timeline::new(&traj.states);
    for t in 0..traj.states.len() {
        for g in &problem.globals {
            if g.applies_at(t) && !full.satisfied(t, g.constraint()) {
                push(t, ViolationKind::Global, format!("global constraint violated: {}", sig.show(g.constraint())));
            }
        }
    }
    let success = problem
        .agents
        .iter()
        .map(|a| (a.name.clone(), a.goals.iter().all(|g| full.satisfied(full.last(), g))))
        .collect();
    Report { violations: out, success }
}
