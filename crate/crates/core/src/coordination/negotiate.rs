//! Round-robin negotiation over `on_conflict` options.
//!
//! Conflicting actions take turns in their given order. On its turn an
//! action tries its next unexplored option; a `retry_after` or `forego`
//! option whose condition holds removes the action, one whose condition
//! fails is skipped, and `arbitrate` leaves the action in the conflict for
//! the supervisor's strategy. An action with no options left is dropped.
//! After every full round the procedure stops if the remaining actions are
//! jointly consistent.

use std::fmt;

use crate::semantics::{ActionRef, ConflictPolicy, Signature, State, Timeline};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Negotiator {
    pub action: ActionRef,
    pub options: Vec<ConflictPolicy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Settlement {
    Forego,
    RetryAfter(u32),
    Exhausted,
}

impl fmt::Display for Settlement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Settlement::Forego => write!(f, "forego"),
            Settlement::RetryAfter(t) => write!(f, "retry_after {t}"),
            Settlement::Exhausted => write!(f, "exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub round: usize,
    pub action: ActionRef,
    /// Option as written, e.g. `retry_after 2`.
    pub option: String,
    pub applied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Resolution {
    /// Indices of the actions left in the conflict.
    pub survivors: Vec<usize>,
    pub dropped: Vec<(usize, Settlement)>,
    /// Survivors that chose `arbitrate`.
    pub deferred: Vec<usize>,
    pub turns: Vec<Turn>,
}

fn describe(sig: &Signature, o: &ConflictPolicy) -> String {
    let cond = |c: &crate::semantics::Cons| match c {
        crate::expr::Constraint::True => String::new(),
        c => format!(" provided {}", sig.show(c)),
    };
    match o {
        ConflictPolicy::RetryAfter { steps, provided } => format!("retry_after {steps}{}", cond(provided)),
        ConflictPolicy::Forego { provided } => format!("forego{}", cond(provided)),
        ConflictPolicy::Arbitrate => "arbitrate".into(),
    }
}

/// Runs the negotiation. `consistent` decides whether a set of entries (by
/// index) is jointly executable; conditions are evaluated at the last state
/// of `seq`.
pub fn negotiate_round_robin(
    sig: &Signature,
    entries: &[Negotiator],
    seq: &[State],
    mut consistent: impl FnMut(&[usize]) -> bool,
) -> Resolution {
    let tl = Timeline::new(seq);
    let mut alive: Vec<usize> = (0..entries.len()).collect();
    let mut active = alive.clone();
    let mut cursor = vec![0usize; entries.len()];
    let mut res = Resolution::default();
    let mut round = 0;
    while !consistent(&alive) && !active.is_empty() {
        round += 1;
        for k in active.clone() {
            let e = &entries[k];
            let Some(opt) = e.options.get(cursor[k]) else {
                alive.retain(|&x| x != k);
                active.retain(|&x| x != k);
                res.dropped.push((k, Settlement::Exhausted));
                continue;
            };
            cursor[k] += 1;
            let (applied, outcome) = match opt {
                ConflictPolicy::Arbitrate => (true, None),
                ConflictPolicy::RetryAfter { steps, provided } => {
                    let ok = tl.satisfied_now(provided);
                    (ok, ok.then_some(Settlement::RetryAfter(*steps)))
                }
                ConflictPolicy::Forego { provided } => {
                    let ok = tl.satisfied_now(provided);
                    (ok, ok.then_some(Settlement::Forego))
                }
            };
            res.turns.push(Turn { round, action: e.action.clone(), option: describe(sig, opt), applied });
            if !applied {
                continue;
            }
            active.retain(|&x| x != k);
            match outcome {
                Some(s) => {
                    alive.retain(|&x| x != k);
                    res.dropped.push((k, s));
                }
                None => res.deferred.push(k),
            }
        }
    }
    res.survivors = alive;
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{CmpOp, Constraint, Expr};
    use crate::lang::Domain;

    fn sig() -> Signature {
        let mut s = Signature::new();
        s.declare("f", Domain::Range(0, 3));
        s
    }

    fn entry(agent: &str, options: Vec<ConflictPolicy>) -> Negotiator {
        Negotiator { action: ActionRef::new(agent, format!("act_{agent}")), options }
    }

    fn at_most_one(set: &[usize]) -> bool {
        set.len() <= 1
    }

    #[test]
    fn retry_and_forego_both_drop() {
        let entries = vec![
            entry("a", vec![ConflictPolicy::RetryAfter { steps: 2, provided: Constraint::True }]),
            entry("b", vec![ConflictPolicy::Forego { provided: Constraint::True }]),
        ];
        let r = negotiate_round_robin(&sig(), &entries, &[vec![0]], at_most_one);
        assert!(r.survivors.is_empty());
        assert_eq!(r.dropped, vec![(0, Settlement::RetryAfter(2)), (1, Settlement::Forego)]);
        assert_eq!(r.turns.len(), 2);
    }

    #[test]
    fn no_options_drop_immediately() {
        let entries = vec![entry("a", vec![]), entry("b", vec![])];
        let r = negotiate_round_robin(&sig(), &entries, &[vec![0]], at_most_one);
        assert_eq!(r.dropped, vec![(0, Settlement::Exhausted), (1, Settlement::Exhausted)]);
        assert!(r.turns.is_empty());
    }

    #[test]
    fn false_condition_is_skipped() {
        let never = Constraint::cmp(CmpOp::Eq, Expr::fluent(0), Expr::Lit(3));
        let entries = vec![
            entry("a", vec![ConflictPolicy::Forego { provided: never }, ConflictPolicy::RetryAfter { steps: 1, provided: Constraint::True }]),
            entry("b", vec![ConflictPolicy::Arbitrate]),
        ];
        let r = negotiate_round_robin(&sig(), &entries, &[vec![0]], at_most_one);
        assert_eq!(r.survivors, vec![1]);
        assert_eq!(r.deferred, vec![1]);
        assert_eq!(r.dropped, vec![(0, Settlement::RetryAfter(1))]);
        assert!(!r.turns[0].applied);
        assert_eq!(r.turns.len(), 3);
    }

    #[test]
    fn consistent_input_needs_no_turns() {
        let entries = vec![entry("a", vec![ConflictPolicy::Arbitrate])];
        let r = negotiate_round_robin(&sig(), &entries, &[vec![0]], at_most_one);
        assert_eq!(r.survivors, vec![0]);
        assert!(r.turns.is_empty());
    }
}
