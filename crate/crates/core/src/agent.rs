//! Per-agent runtime: planning, failure handling and the request exchange.

use std::collections::BTreeMap;

use crate::coordination::{SpaceClosed, Tuple, TupleSpace};
use crate::planner::{Obligation, Plan, PlanError, PlanInput, Planner, PlannerConfig};
use crate::semantics::{executable, ActionRef, AgentModel, Cons, FailurePolicy, Problem, State, Timeline};
use crate::supervisor::Reason;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentConfig {
    /// Absolute horizon N.
    pub horizon: usize,
    /// Planner calls allowed before the agent gives up.
    pub max_replans: usize,
    pub planner: PlannerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Active,
    Failed,
}

#[derive(Debug, Clone)]
struct Retry {
    at: usize,
    actions: Vec<ActionRef>,
}

#[derive(Debug, Clone)]
struct Accepted {
    id: u64,
    index: usize,
    helper: String,
    due: usize,
}

pub struct AgentRuntime<'a> {
    problem: &'a Problem,
    index: usize,
    model: &'a AgentModel,
    planner: Planner<'a>,
    config: AgentConfig,
    status: Status,
    plan: Option<Plan>,
    /// State for which planning last found nothing; not retried until it changes.
    stuck: Option<State>,
    retry: Option<Retry>,
    replans: usize,
    extra_goals: Vec<Cons>,
    obligations: Vec<Obligation>,
    /// Requests this agent has posted and not yet settled, by index.
    posted: BTreeMap<usize, u64>,
    accepted: Vec<Accepted>,
    /// Offers made this step: request id to (requester, request index).
    offered: BTreeMap<u64, (String, usize)>,
}

fn request_id(time: usize, agent: usize, index: usize) -> u64 {
    ((time as u64) << 32) | ((agent as u64) << 16) | index as u64
}

impl<'a> AgentRuntime<'a> {
    pub fn new(problem: &'a Problem, name: &str, config: AgentConfig) -> Self {
        let index = problem.agent_index(name).unwrap_or_else(|| panic!("unknown agent `{name}`"));
        AgentRuntime {
            problem,
            index,
            model: &problem.agents[index],
            planner: Planner::new(problem, name, config.planner),
            config,
            status: Status::Active,
            plan: None,
            stuck: None,
            retry: None,
            replans: 0,
            extra_goals: Vec::new(),
            obligations: Vec::new(),
            posted: BTreeMap::new(),
            accepted: Vec::new(),
            offered: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.model.name
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_failed(&self) -> bool {
        self.status == Status::Failed
    }

    pub fn obligations(&self) -> &[Obligation] {
        &self.obligations
    }

    pub fn extra_goals(&self) -> &[Cons] {
        &self.extra_goals
    }

    fn fail(&mut self, t: usize, why: &str) {
        log::info!("{} fails at time {t}: {why}", self.model.name);
        self.status = Status::Failed;
        self.plan = None;
        self.retry = None;
    }

    fn plan_with(&self, seq: &[State], obligations: &[Obligation]) -> Result<Plan, PlanError> {
        let mut input = PlanInput {
            seq,
            horizon: self.config.horizon,
            extra_goals: &self.extra_goals,
            obligations,
            anticipate: false,
        };
        match self.planner.plan(&input) {
            Err(PlanError::NoPlan) if !self.model.requests.is_empty() => {
                input.anticipate = true;
                self.planner.plan(&input)
            }
            r => r,
        }
    }

    fn replan(&mut self, seq: &[State]) {
        let t = seq.len() - 1;
        let now = &seq[t];
        if self.stuck.as_ref() == Some(now) {
            return;
        }
        self.replans += 1;
        if self.replans > self.config.max_replans {
            self.fail(t, "replanning limit reached");
            return;
        }
        match self.plan_with(seq, &self.obligations) {
            Ok(p) => {
                self.plan = Some(p);
                self.stuck = None;
            }
            Err(PlanError::NoPlan) => {
                log::debug!("{} has no plan at time {t}", self.model.name);
                self.plan = None;
                self.stuck = Some(now.clone());
            }
            Err(PlanError::BudgetExceeded) => {
                log::warn!("{} exceeded the planning budget at time {t}", self.model.name);
                self.plan = None;
            }
        }
    }

    fn plan_matches(&self, seq: &[State]) -> bool {
        let t = seq.len() - 1;
        match &self.plan {
            Some(p) => t >= p.start && (t == p.start || p.predicted(t) == Some(&seq[t])),
            None => false,
        }
    }

    fn all_executable(&self, actions: &[ActionRef], seq: &[State]) -> bool {
        actions.iter().all(|a| self.problem.spec(a).is_some_and(|s| executable(&s, seq)))
    }

    /// The action set proposed from the last state of `seq`.
    pub fn propose(&mut self, seq: &[State]) -> Vec<ActionRef> {
        let t = seq.len() - 1;
        if self.is_failed() || t >= self.config.horizon {
            return Vec::new();
        }
        if let Some(r) = &self.retry {
            if t < r.at {
                return Vec::new();
            }
            let r = self.retry.take().unwrap();
            self.plan = None;
            if self.all_executable(&r.actions, seq) {
                return r.actions;
            }
        }
        if !self.plan_matches(seq) {
            self.replan(seq);
        }
        self.plan.as_ref().map(|p| p.proposal_at(t)).unwrap_or_default()
    }

    /// Reacts to the supervisor's verdict on the step from `seq[len - 2]`.
    pub fn observe(&mut self, seq: &[State], inhibited: &[(ActionRef, Reason)]) {
        if self.is_failed() || inhibited.is_empty() {
            return;
        }
        let t = seq.len() - 2;
        let actions: Vec<ActionRef> = inhibited.iter().map(|(a, _)| a.clone()).collect();
        self.plan = None;
        self.stuck = None;
        match inhibited[0].1 {
            Reason::RetryAfter(k) => self.retry = Some(Retry { at: t + k as usize, actions }),
            Reason::Forego => {}
            _ => self.handle_failure(seq, &actions),
        }
    }

    fn handle_failure(&mut self, seq: &[State], actions: &[ActionRef]) {
        let t = seq.len() - 2;
        let tl = Timeline::new(seq);
        let options = actions.iter().filter_map(|a| self.model.action(&a.action)).flat_map(|m| m.on_failure.iter());
        for opt in options {
            match opt {
                FailurePolicy::RetryAfter { steps, cond } if tl.satisfied_now(cond) => {
                    self.retry = Some(Retry { at: t + *steps as usize, actions: actions.to_vec() });
                    return;
                }
                FailurePolicy::Replan { cond, add_goal } if tl.satisfied_now(cond) => {
                    self.extra_goals.extend(add_goal.iter().cloned());
                    return;
                }
                FailurePolicy::Fail { cond } if tl.satisfied_now(cond) => {
                    self.fail(t + 1, "failure policy");
                    return;
                }
                _ => {}
            }
        }
    }

    /// Offers help for pending requests of other agents, most important
    /// requester first, as long as the agent can still plan with every
    /// obligation offered so far.
    pub fn exchange_offer(&mut self, space: &TupleSpace, seq: &[State]) -> Result<(), SpaceClosed> {
        self.offered.clear();
        let t = seq.len() - 1;
        if self.is_failed() || t >= self.config.horizon || self.model.helps.is_empty() {
            return Ok(());
        }
        let me = self.model.name.clone();
        let mut pending: Vec<(u32, String, usize, u64)> = space
            .rd_all(|x| matches!(x, Tuple::Request { time, requester, .. } if *time < t && *requester != me))?
            .into_iter()
            .filter_map(|x| match x {
                Tuple::Request { id, requester, index, .. } => {
                    let p = self.problem.agent(&requester)?.priority;
                    Some((p, requester, index, id))
                }
                _ => None,
            })
            .collect();
        pending.sort();
        let mut tentative = self.obligations.clone();
        for (_, requester, index, id) in pending {
            let req_model = self.problem.agent(&requester).expect("request from a known agent");
            let Some(request) = req_model.requests.get(index) else { continue };
            let able = self.model.helps.iter().any(|h| {
                self.problem.can_help(self.model, req_model, request, h)
                    && executable(&self.problem.help_spec(request, h), seq)
            });
            if !able {
                continue;
            }
            tentative.push(Obligation { requester: requester.clone(), request: index, wanted: request.wanted.clone(), due: t + 1 });
            if self.plan_with(seq, &tentative).is_ok() {
                space.out(Tuple::Offer { id, helper: me.clone(), requester: requester.clone() })?;
                self.offered.insert(id, (requester, index));
            } else {
                tentative.pop();
            }
        }
        Ok(())
    }

    /// Accepts the best offer for each of this agent's pending requests.
    pub fn exchange_accept(&mut self, space: &TupleSpace, seq: &[State]) -> Result<(), SpaceClosed> {
        let t = seq.len() - 1;
        if self.is_failed() {
            return Ok(());
        }
        let me = self.model.name.clone();
        for (&index, &id) in &self.posted.clone() {
            let mut offers = Vec::new();
            while let Some(Tuple::Offer { helper, .. }) = space.take(|x| matches!(x, Tuple::Offer { id: i, .. } if *i == id))? {
                offers.push(helper);
            }
            let Some(helper) = offers.into_iter().min_by_key(|h| (self.problem.agent(h).map_or(u32::MAX, |a| a.priority), h.clone()))
            else {
                continue;
            };
            space.take(|x| matches!(x, Tuple::Request { id: i, .. } if *i == id))?;
            space.out(Tuple::Accept { id, helper: helper.clone(), requester: me.clone() })?;
            self.posted.remove(&index);
            self.accepted.push(Accepted { id, index, helper, due: t + 1 });
        }
        Ok(())
    }

    /// Helpers record accepted obligations; requesters confirm help that
    /// arrived and post requests whose trigger holds now.
    pub fn exchange_commit(&mut self, space: &TupleSpace, seq: &[State]) -> Result<(), SpaceClosed> {
        let t = seq.len() - 1;
        if self.is_failed() {
            return Ok(());
        }
        let me = self.model.name.clone();
        while let Some(Tuple::Accept { id, requester, .. }) =
            space.take(|x| matches!(x, Tuple::Accept { helper, .. } if *helper == me))?
        {
            let Some((_, index)) = self.offered.remove(&id) else { continue };
            let wanted = self.problem.agent(&requester).expect("known requester").requests[index].wanted.clone();
            self.obligations.push(Obligation { requester, request: index, wanted, due: t + 1 });
            self.plan = None;
            self.stuck = None;
        }
        self.offered.clear();
        self.obligations.retain(|o| o.due > t);

        let tl = Timeline::new(seq);
        for a in std::mem::take(&mut self.accepted) {
            if a.due > t {
                self.accepted.push(a);
            } else if tl.satisfied_now(&self.model.requests[a.index].wanted) {
                space.out(Tuple::Fulfilled { id: a.id, helper: a.helper, requester: me.clone(), due: a.due })?;
            }
        }
        if t >= self.config.horizon {
            return Ok(());
        }
        for (index, r) in self.model.requests.iter().enumerate() {
            let busy = self.posted.contains_key(&index) || self.accepted.iter().any(|a| a.index == index);
            if busy || !tl.satisfied_now(&r.trigger) {
                continue;
            }
            let id = request_id(t, self.index, index);
            space.out(Tuple::Request { id, time: t, requester: me.clone(), index, target: r.target.clone() })?;
            self.posted.insert(index, id);
        }
        Ok(())
    }
}
