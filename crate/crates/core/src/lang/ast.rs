//! Theory-level syntax tree. Fluents are referenced by name.

use std::fmt;

use crate::expr;

pub type Expr = expr::Expr<String>;
pub type Constraint = expr::Constraint<String>;

/// Admissible values of a fluent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Inclusive interval `lo..hi`.
    Range(i64, i64),
    /// Explicit finite set, kept sorted and deduplicated.
    Set(Vec<i64>),
}

impl Domain {
    pub fn set(mut values: Vec<i64>) -> Domain {
        values.sort_unstable();
        values.dedup();
        Domain::Set(values)
    }

    pub fn min(&self) -> i64 {
        match self {
            Domain::Range(lo, _) => *lo,
            Domain::Set(v) => v[0],
        }
    }

    pub fn max(&self) -> i64 {
        match self {
            Domain::Range(_, hi) => *hi,
            Domain::Set(v) => *v.last().unwrap(),
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        match self {
            Domain::Range(lo, hi) => *lo <= x && x <= *hi,
            Domain::Set(v) => v.binary_search(&x).is_ok(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Domain::Range(lo, hi) => lo > hi,
            Domain::Set(v) => v.is_empty(),
        }
    }

    pub fn size(&self) -> u64 {
        match self {
            Domain::Range(lo, hi) if lo <= hi => (*hi as i128 - *lo as i128 + 1) as u64,
            Domain::Range(..) => 0,
            Domain::Set(v) => v.len() as u64,
        }
    }

    /// Values of the domain inside `[lo, hi]`, ascending.
    pub fn values_within(&self, lo: i64, hi: i64) -> Box<dyn Iterator<Item = i64> + '_> {
        match self {
            Domain::Range(a, b) => {
                let (a, b) = ((*a).max(lo), (*b).min(hi));
                if a > b {
                    Box::new(std::iter::empty())
                } else {
                    Box::new(a..=b)
                }
            }
            Domain::Set(v) => Box::new(v.iter().copied().filter(move |x| *x >= lo && *x <= hi)),
        }
    }

    pub fn values(&self) -> Box<dyn Iterator<Item = i64> + '_> {
        self.values_within(i64::MIN, i64::MAX)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            Domain::Set(v) => {
                write!(f, "{{")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDecl {
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConflictOption {
    RetryAfter { steps: u32, provided: Constraint },
    Forego { provided: Constraint },
    /// Hand the action to the supervisor's arbitration strategy.
    Arbitrate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureOption {
    RetryAfter { steps: u32, cond: Constraint },
    Replan { cond: Constraint, add_goal: Option<Constraint> },
    Fail { cond: Constraint },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDecl {
    pub name: String,
    pub on_conflict: Vec<ConflictOption>,
    pub on_failure: Vec<FailureOption>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecAxiom {
    pub action: String,
    pub cond: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicLaw {
    pub action: String,
    pub eff: Constraint,
    pub prec: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestAxiom {
    /// The condition the requester wants made true.
    pub wanted: Constraint,
    /// `None` broadcasts the request.
    pub target: Option<String>,
    pub trigger: Constraint,
    pub offer: Option<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Donors {
    All,
    Agents(Vec<String>),
}

impl Donors {
    pub fn admits(&self, agent: &str) -> bool {
        match self {
            Donors::All => true,
            Donors::Agents(v) => v.iter().any(|a| a == agent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelpAxiom {
    pub donors: Donors,
    pub cond: Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GlobalConstraint {
    Always(Constraint),
    HoldsAt(Constraint, u32),
}

impl GlobalConstraint {
    pub fn constraint(&self) -> &Constraint {
        match self {
            GlobalConstraint::Always(c) | GlobalConstraint::HoldsAt(c, _) => c,
        }
    }
}

/// One agent's axioms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgentTheory {
    pub name: String,
    pub priority: u32,
    pub known_agents: Vec<String>,
    pub fluents: Vec<FluentDecl>,
    pub actions: Vec<ActionDecl>,
    pub executable: Vec<ExecAxiom>,
    pub laws: Vec<DynamicLaw>,
    pub requests: Vec<RequestAxiom>,
    pub helps: Vec<HelpAxiom>,
    pub goals: Vec<Constraint>,
    pub initially: Vec<Constraint>,
    pub globals: Vec<GlobalConstraint>,
}

impl AgentTheory {
    pub fn fluent(&self, name: &str) -> Option<&FluentDecl> {
        self.fluents.iter().find(|d| d.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|a| a.name == name)
    }
}
