//! Executability, desired effects and state transitions.

use crate::expr::Constraint;

use super::eval::Timeline;
use super::model::{ActionRef, ActionSpec, Cons, Problem, Signature, State};
use super::solve::{inertial_complete, solve_effects};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransitionError {
    #[error("unknown action {0}")]
    UnknownAction(ActionRef),
    #[error("action {0} is not executable")]
    NotExecutable(ActionRef),
    #[error("the joint effects have no solution")]
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the initial-state axioms are inconsistent")]
pub struct InconsistentInitialState;

/// True iff some executability condition holds at the last index of `seq`.
pub fn executable(spec: &ActionSpec, seq: &[State]) -> bool {
    let tl = Timeline::new(seq);
    spec.exec.iter().any(|c| tl.satisfied_now(c))
}

/// Conjunction of the effects of every law whose precondition holds now.
pub fn desired_effects(spec: &ActionSpec, seq: &[State]) -> Cons {
    let tl = Timeline::new(seq);
    Constraint::all(spec.laws.iter().filter(|l| tl.satisfied_now(&l.prec)).map(|l| l.eff.clone()))
}

/// Inertial completion of the smallest solution of `c`, if there is one.
pub fn apply_effects(sig: &Signature, seq: &[State], c: &Cons) -> Option<State> {
    let sigma = solve_effects(sig, seq, c)?;
    Some(inertial_complete(&sigma, seq.last().unwrap()))
}

/// Joint desired effects of a set of actions, checking executability.
pub fn joint_effects(problem: &Problem, seq: &[State], actions: &[ActionRef]) -> Result<Cons, TransitionError> {
    let mut parts = Vec::with_capacity(actions.len());
    for a in actions {
        let spec = problem.spec(a).ok_or_else(|| TransitionError::UnknownAction(a.clone()))?;
        if !executable(&spec, seq) {
            return Err(TransitionError::NotExecutable(a.clone()));
        }
        parts.push(desired_effects(&spec, seq));
    }
    Ok(Constraint::all(parts))
}

pub fn apply_transition(problem: &Problem, seq: &[State], actions: &[ActionRef]) -> Result<State, TransitionError> {
    let c = joint_effects(problem, seq, actions)?;
    apply_effects(&problem.sig, seq, &c).ok_or(TransitionError::Unsat)
}

/// A state satisfying every agent's initial axioms and the global
/// constraints at time 0; fluents they leave free take the minimum of their
/// domain.
pub fn collect_initial(problem: &Problem) -> Result<State, InconsistentInitialState> {
    let sig = &problem.sig;
    let base: State = sig.ids().map(|f| sig.domain(f).min()).collect();
    let globals = problem.globals.iter().filter(|g| g.applies_at(0)).map(|g| g.constraint().clone());
    let c = Constraint::all(problem.agents.iter().flat_map(|a| a.initially.iter().cloned()).chain(globals));
    apply_effects(sig, &[base], &c).ok_or(InconsistentInitialState)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_theory;

    const MAKER: &str = "agent m. fluent guitars, neck, body, pickup valued 0..20. fluent strings valued 0..60.\n\
        action make.\n executable make if neck > 0 and strings >= 6 and body > 0 and pickup > 0.\n\
        make causes guitars = guitars@-1 + 1 and neck = neck@-1 - 1 and body = body@-1 - 1 and strings = strings@-1 - 6 and pickup = pickup@-1 - 2 if pickup >= 2.\n\
        make causes guitars = guitars@-1 + 1 and neck = neck@-1 - 1 and strings = strings@-1 - 6 and body = body@-1 - 1 and pickup = pickup@-1 - 1 if pickup < 2.\n\
        initially guitars = 2 and body = 3 and neck = 5 and pickup = 6 and strings = 24.";

    fn maker() -> Problem {
        Problem::compile(&[parse_theory(MAKER).unwrap()]).unwrap()
    }

    #[test]
    fn initial_state_from_axioms() {
        let p = maker();
        assert_eq!(collect_initial(&p).unwrap(), vec![2, 5, 3, 6, 24]);
    }

    #[test]
    fn free_fluents_take_domain_minimum() {
        let p = Problem::compile(&[parse_theory("agent a. fluent f valued 2..5.").unwrap()]).unwrap();
        assert_eq!(collect_initial(&p).unwrap(), vec![2]);
    }

    #[test]
    fn contradictory_initial_state() {
        let a = parse_theory("agent a. fluent f valued 0..5. initially f = 1 or f = 2.").unwrap();
        let b = parse_theory("agent b. fluent f valued 0..5. initially f > 2.").unwrap();
        assert!(collect_initial(&Problem::compile(&[a, b]).unwrap()).is_err());
    }

    #[test]
    fn make_guitar_transition() {
        let p = maker();
        let s0 = collect_initial(&p).unwrap();
        let make = ActionRef::new("m", "make");
        let next = apply_transition(&p, std::slice::from_ref(&s0), std::slice::from_ref(&make)).unwrap();
        assert_eq!(next, vec![3, 4, 2, 4, 18]);
        let mut low = s0.clone();
        low[4] = 5;
        assert_eq!(apply_transition(&p, &[low], std::slice::from_ref(&make)), Err(TransitionError::NotExecutable(make)));
        assert_eq!(apply_transition(&p, std::slice::from_ref(&s0), &[]).unwrap(), s0);
    }

    #[test]
    fn firing_law_selection() {
        let p = maker();
        let spec: ActionSpec = p.agents[0].action("make").unwrap().into();
        let s0 = collect_initial(&p).unwrap();
        let d = p.sig.show(&desired_effects(&spec, std::slice::from_ref(&s0)));
        assert!(d.contains("pickup = (pickup@-1 - 2)"), "{d}");
        let mut one = s0;
        one[3] = 1;
        let d = p.sig.show(&desired_effects(&spec, &[one]));
        assert!(d.contains("pickup = (pickup@-1 - 1)"), "{d}");
    }

    #[test]
    fn disjunctive_executability() {
        let t = parse_theory("agent a. fluent f valued 0..3. action x. executable x if f = 3. executable x if f = 0.").unwrap();
        let p = Problem::compile(&[t]).unwrap();
        let spec: ActionSpec = p.agents[0].action("x").unwrap().into();
        assert!(executable(&spec, &[vec![0]]));
        assert!(!executable(&spec, &[vec![1]]));
        assert_eq!(desired_effects(&spec, &[vec![0]]), Constraint::True);
    }

    #[test]
    fn clashing_effects() {
        let src = |n: &str, v: u32| format!("agent {n}. fluent f valued 0..3. action act_{n}. executable act_{n}. act_{n} causes f = {v}.");
        let p = Problem::compile(&[parse_theory(&src("a", 1)).unwrap(), parse_theory(&src("b", 2)).unwrap()]).unwrap();
        let acts = [ActionRef::new("a", "act_a"), ActionRef::new("b", "act_b")];
        assert_eq!(apply_transition(&p, &[vec![0]], &acts), Err(TransitionError::Unsat));
    }
}
