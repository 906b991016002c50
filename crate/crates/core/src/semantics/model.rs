//! Compiled problems: fluent names resolved to indices into one global signature.

use std::collections::HashMap;
use std::fmt;

use crate::expr::{Constraint, Expr};
use crate::lang::{self, AgentTheory, Diagnostic, Domain, Donors, Severity};

pub type FluentId = usize;
/// A total valuation, indexed by [`FluentId`].
pub type State = Vec<i64>;
pub type Cons = Constraint<FluentId>;
pub type FExpr = Expr<FluentId>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    names: Vec<String>,
    domains: Vec<Domain>,
    index: HashMap<String, FluentId>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Adds a fluent, or returns the existing id when the name is known.
    pub fn declare(&mut self, name: &str, domain: Domain) -> FluentId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.domains.push(domain);
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<FluentId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: FluentId) -> &str {
        &self.names[id]
    }

    pub fn domain(&self, id: FluentId) -> &Domain {
        &self.domains[id]
    }

    pub fn ids(&self) -> std::ops::Range<FluentId> {
        0..self.names.len()
    }

    pub fn in_domain(&self, state: &[i64]) -> bool {
        state.len() == self.len() && state.iter().enumerate().all(|(f, v)| self.domains[f].contains(*v))
    }

    pub fn resolve(&self, c: &lang::Constraint) -> Result<Cons, String> {
        c.try_map(&mut |n: &String| self.id(n).ok_or_else(|| format!("unknown fluent `{n}`")))
    }

    /// Converts back to names, for printing.
    pub fn named(&self, c: &Cons) -> lang::Constraint {
        c.try_map(&mut |f: &FluentId| Ok::<_, ()>(self.names[*f].clone())).unwrap()
    }

    pub fn show(&self, c: &Cons) -> String {
        self.named(c).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConflictPolicy {
    RetryAfter { steps: u32, provided: Cons },
    Forego { provided: Cons },
    Arbitrate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailurePolicy {
    RetryAfter { steps: u32, cond: Cons },
    Replan { cond: Cons, add_goal: Option<Cons> },
    Fail { cond: Cons },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Law {
    pub eff: Cons,
    pub prec: Cons,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionModel {
    pub name: String,
    /// Disjunctive executability conditions.
    pub exec: Vec<Cons>,
    pub laws: Vec<Law>,
    pub on_conflict: Vec<ConflictPolicy>,
    pub on_failure: Vec<FailurePolicy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestModel {
    pub wanted: Cons,
    pub target: Option<String>,
    pub trigger: Cons,
    pub offer: Option<Cons>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HelpModel {
    pub donors: Donors,
    pub cond: Cons,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Global {
    Always(Cons),
    HoldsAt(Cons, u32),
}

impl Global {
    pub fn constraint(&self) -> &Cons {
        match self {
            Global::Always(c) | Global::HoldsAt(c, _) => c,
        }
    }

    pub fn applies_at(&self, t: usize) -> bool {
        match self {
            Global::Always(_) => true,
            Global::HoldsAt(_, n) => *n as usize == t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentModel {
    pub name: String,
    pub priority: u32,
    pub known_agents: Vec<String>,
    /// Fluents declared by this agent, ascending.
    pub fluents: Vec<FluentId>,
    pub actions: Vec<ActionModel>,
    pub requests: Vec<RequestModel>,
    pub helps: Vec<HelpModel>,
    pub goals: Vec<Cons>,
    pub initially: Vec<Cons>,
    pub globals: Vec<Global>,
}

impl AgentModel {
    pub fn action(&self, name: &str) -> Option<&ActionModel> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn knows(&self, f: FluentId) -> bool {
        self.fluents.binary_search(&f).is_ok()
    }
}

/// An action as proposed by a particular agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionRef {
    pub agent: String,
    pub action: String,
}

impl ActionRef {
    pub fn new(agent: impl Into<String>, action: impl Into<String>) -> Self {
        ActionRef { agent: agent.into(), action: action.into() }
    }

    /// The synthetic action by which `helper` serves request `request` of
    /// `requester` under its help axiom `help`.
    pub fn help(helper: &str, requester: &str, request: usize, help: usize) -> Self {
        ActionRef::new(helper, format!("help.{requester}.{request}.{help}"))
    }

    /// Decodes a synthetic help action name into (requester, request, help).
    pub fn help_parts(&self) -> Option<(&str, usize, usize)> {
        let rest = self.action.strip_prefix("help.")?;
        let mut it = rest.rsplitn(3, '.');
        let h = it.next()?.parse().ok()?;
        let r = it.next()?.parse().ok()?;
        let requester = it.next()?;
        Some((requester, r, h))
    }
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.agent, self.action)
    }
}

/// Executability and laws of a concrete (possibly synthetic) action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    pub exec: Vec<Cons>,
    pub laws: Vec<Law>,
}

impl From<&ActionModel> for ActionSpec {
    fn from(a: &ActionModel) -> Self {
        ActionSpec { exec: a.exec.clone(), laws: a.laws.clone() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid problem:\n{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub sig: Signature,
    /// Agents in the order their theories were given.
    pub agents: Vec<AgentModel>,
    /// Union of every agent's global constraints, without duplicates.
    pub globals: Vec<Global>,
    pub warnings: Vec<Diagnostic>,
}

impl Problem {
    pub fn compile(theories: &[AgentTheory]) -> Result<Problem, ProblemError> {
        let diags = lang::validate_problem(theories);
        if lang::has_errors(&diags) {
            return Err(ProblemError::Invalid(diags.into_iter().filter(|d| d.severity == Severity::Error).collect()));
        }
        for d in &diags {
            log::warn!("{d}");
        }
        let mut sig = Signature::new();
        for t in theories {
            for d in &t.fluents {
                sig.declare(&d.name, d.domain.clone());
            }
        }
        let r = |c: &lang::Constraint| sig.resolve(c).expect("names were resolved by the parser");
        let mut agents = Vec::new();
        let mut globals: Vec<Global> = Vec::new();
        for t in theories {
            let mut fluents: Vec<FluentId> = t.fluents.iter().map(|d| sig.id(&d.name).unwrap()).collect();
            fluents.sort_unstable();
            let actions = t
                .actions
                .iter()
                .map(|a| ActionModel {
                    name: a.name.clone(),
                    exec: t.executable.iter().filter(|e| e.action == a.name).map(|e| r(&e.cond)).collect(),
                    laws: t
                        .laws
                        .iter()
                        .filter(|l| l.action == a.name)
                        .map(|l| Law { eff: r(&l.eff), prec: r(&l.prec) })
                        .collect(),
                    on_conflict: a
                        .on_conflict
                        .iter()
                        .map(|o| match o {
                            lang::ConflictOption::RetryAfter { steps, provided } => {
                                ConflictPolicy::RetryAfter { steps: *steps, provided: r(provided) }
                            }
                            lang::ConflictOption::Forego { provided } => ConflictPolicy::Forego { provided: r(provided) },
                            lang::ConflictOption::Arbitrate => ConflictPolicy::Arbitrate,
                        })
                        .collect(),
                    on_failure: a
                        .on_failure
                        .iter()
                        .map(|o| match o {
                            lang::FailureOption::RetryAfter { steps, cond } => {
                                FailurePolicy::RetryAfter { steps: *steps, cond: r(cond) }
                            }
                            lang::FailureOption::Replan { cond, add_goal } => {
                                FailurePolicy::Replan { cond: r(cond), add_goal: add_goal.as_ref().map(r) }
                            }
                            lang::FailureOption::Fail { cond } => FailurePolicy::Fail { cond: r(cond) },
                        })
                        .collect(),
                })
                .collect();
            let agent_globals: Vec<Global> = t
                .globals
                .iter()
                .map(|g| match g {
                    lang::GlobalConstraint::Always(c) => Global::Always(r(c)),
                    lang::GlobalConstraint::HoldsAt(c, n) => Global::HoldsAt(r(c), *n),
                })
                .collect();
            for g in &agent_globals {
                if !globals.contains(g) {
                    globals.push(g.clone());
                }
            }
            agents.push(AgentModel {
                name: t.name.clone(),
                priority: t.priority,
                known_agents: t.known_agents.clone(),
                fluents,
                actions,
                requests: t
                    .requests
                    .iter()
                    .map(|q| RequestModel {
                        wanted: r(&q.wanted),
                        target: q.target.clone(),
                        trigger: r(&q.trigger),
                        offer: q.offer.as_ref().map(r),
                    })
                    .collect(),
                helps: t.helps.iter().map(|h| HelpModel { donors: h.donors.clone(), cond: r(&h.cond) }).collect(),
                goals: t.goals.iter().map(r).collect(),
                initially: t.initially.iter().map(r).collect(),
                globals: agent_globals,
            });
        }
        Ok(Problem { sig, agents, globals, warnings: diags })
    }

    pub fn agent(&self, name: &str) -> Option<&AgentModel> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Whether `helper` may serve `request` of `requester`: the request is
    /// addressed to it (or broadcast), it knows every fluent of the wanted
    /// condition, and the help axiom admits the requester.
    pub fn can_help(&self, helper: &AgentModel, requester: &AgentModel, request: &RequestModel, help: &HelpModel) -> bool {
        helper.name != requester.name
            && request.target.as_deref().is_none_or(|t| t == helper.name)
            && request.wanted.all_fluents().iter().all(|f| helper.knows(*f))
            && help.donors.admits(&requester.name)
    }

    /// The synthetic help action: executable under the help condition and the
    /// request trigger one step back; its effect is the wanted condition plus
    /// the offer.
    pub fn help_spec(&self, request: &RequestModel, help: &HelpModel) -> ActionSpec {
        let exec = Constraint::all([help.cond.clone(), request.trigger.shift_back(1)]);
        let mut eff = request.wanted.clone();
        if let Some(o) = &request.offer {
            eff = Constraint::all([eff, o.clone()]);
        }
        ActionSpec { exec: vec![exec], laws: vec![Law { eff, prec: Constraint::True }] }
    }

    /// Looks up the executability and laws of a proposed action.
    pub fn spec(&self, a: &ActionRef) -> Option<ActionSpec> {
        let agent = self.agent(&a.agent)?;
        if let Some(m) = agent.action(&a.action) {
            return Some(m.into());
        }
        let (requester, r, h) = a.help_parts()?;
        let req_agent = self.agent(requester)?;
        let request = req_agent.requests.get(r)?;
        let help = agent.helps.get(h)?;
        self.can_help(agent, req_agent, request, help).then(|| self.help_spec(request, help))
    }
}
