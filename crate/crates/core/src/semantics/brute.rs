//! Exhaustive single-agent plan enumeration, used as a planner oracle.

use super::eval::Timeline;
use super::model::{ActionRef, Problem, State};
use super::transition::{apply_transition, executable};

pub const BRUTE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("search space of {0} sequences exceeds the limit of {BRUTE_LIMIT}")]
pub struct SearchSpaceTooLarge(pub u128);

/// One action set per step, by action name; an empty set is a nop.
pub type NamedPlan = Vec<Vec<String>>;

/// Every successful valid trajectory for `agent` acting alone from `init`,
/// with at most one action per step.
pub fn brute_force_plans(problem: &Problem, agent: &str, init: &State, n: usize) -> Result<Vec<NamedPlan>, SearchSpaceTooLarge> {
    let names = action_names(problem, agent);
    let mut choices = vec![Vec::new()];
    choices.extend(names.into_iter().map(|a| vec![a]));
    enumerate(problem, agent, init, n, &choices)
}

/// Like [`brute_force_plans`] but any subset of the agent's actions may be
/// taken at a step.
pub fn brute_force_set_plans(problem: &Problem, agent: &str, init: &State, n: usize) -> Result<Vec<NamedPlan>, SearchSpaceTooLarge> {
    let names = action_names(problem, agent);
    if names.len() >= 20 {
        return Err(SearchSpaceTooLarge(u128::MAX));
    }
    let choices: Vec<Vec<String>> = (0u32..1 << names.len())
        .map(|mask| names.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, a)| a.clone()).collect())
        .collect();
    enumerate(problem, agent, init, n, &choices)
}

fn action_names(problem: &Problem, agent: &str) -> Vec<String> {
    problem.agent(agent).map(|a| a.actions.iter().map(|x| x.name.clone()).collect()).unwrap_or_default()
}

fn enumerate(problem: &Problem, agent: &str, init: &State, n: usize, choices: &[Vec<String>]) -> Result<Vec<NamedPlan>, SearchSpaceTooLarge> {
    let size = (choices.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > BRUTE_LIMIT {
        return Err(SearchSpaceTooLarge(size));
    }
    let mut seq = vec![init.clone()];
    let mut out = Vec::new();
    if globals_hold(problem, &seq) {
        let mut plan = Vec::new();
        walk(problem, agent, n, choices, &mut seq, &mut plan, &mut out);
    }
    Ok(out)
}

fn globals_hold(problem: &Problem, seq: &[State]) -> bool {
    let tl = Timeline::new(seq);
    let t = tl.last();
    problem.globals.iter().all(|g| !g.applies_at(t) || tl.satisfied(t, g.constraint()))
}

fn walk(
    problem: &Problem,
    agent: &str,
    n: usize,
    choices: &[Vec<String>],
    seq: &mut Vec<State>,
    plan: &mut NamedPlan,
    out: &mut Vec<NamedPlan>,
) {
    if plan.len() == n {
        let tl = Timeline::new(seq);
        let goals = &problem.agent(agent).expect("agent exists").goals;
        if goals.iter().all(|g| tl.satisfied_now(g)) {
            out.push(plan.clone());
        }
        return;
    }
    for choice in choices {
        let acts: Vec<ActionRef> = choice.iter().map(|a| ActionRef::new(agent, a.clone())).collect();
        if !acts.iter().all(|a| executable(&problem.spec(a).unwrap(), seq)) {
            continue;
        }
        let Ok(next) = apply_transition(problem, seq, &acts) else { continue };
        seq.push(next);
        if globals_hold(problem, seq) {
            plan.push(choice.clone());
            walk(problem, agent, n, choices, seq, plan, out);
            plan.pop();
        }
        seq.pop();
    }
}
