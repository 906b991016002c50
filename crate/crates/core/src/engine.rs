//! Runs a problem to its horizon.
//!
//! Each time step has five phases separated by barriers: offer, accept and
//! commit (the request exchange), then propose and outcome around the
//! supervisor's transition. In concurrent mode every agent runs on its own
//! thread and is driven through the tuple space with `Tick`/`Done` tuples;
//! the deterministic mode calls the agents in order. Tuple operations are
//! logged per phase in a canonical order, so both modes yield the same run.

use std::sync::RwLock;

use crate::agent::{AgentConfig, AgentRuntime, Status};
use crate::coordination::{Event, Phase, SpaceClosed, Tuple, TupleSpace};
use crate::lang::{Mode, Settings, Strategy};
use crate::planner::PlannerConfig;
use crate::semantics::{
    check_trajectory, collect_initial, ActionRef, InconsistentInitialState, Problem, Report, State, Trajectory,
};
use crate::supervisor::{GlobalUnsatisfiable, Reason, StepResult, Supervisor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub horizon: usize,
    pub strategy: Strategy,
    pub mode: Mode,
    pub seed: u64,
    /// Run all agents on the calling thread.
    pub deterministic: bool,
    pub max_replans: usize,
    pub planner: PlannerConfig,
}

impl EngineConfig {
    pub fn new(horizon: usize) -> Self {
        EngineConfig {
            horizon,
            strategy: Strategy::default(),
            mode: Mode::default(),
            seed: 0,
            deterministic: true,
            max_replans: 50,
            planner: PlannerConfig::default(),
        }
    }

    pub fn from_settings(s: &Settings) -> Self {
        EngineConfig {
            horizon: s.horizon as usize,
            strategy: s.strategy,
            mode: s.mode,
            seed: s.seed,
            deterministic: s.deterministic,
            max_replans: s.max_replans as usize,
            planner: PlannerConfig { node_budget: s.node_budget, max_set_size: s.max_set_size },
        }
    }

    fn agent(&self) -> AgentConfig {
        AgentConfig { horizon: self.horizon, max_replans: self.max_replans, planner: self.planner }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Initial(#[from] InconsistentInitialState),
    #[error(transparent)]
    Global(#[from] GlobalUnsatisfiable),
    #[error("an agent thread stopped unexpectedly")]
    AgentLost,
}

impl From<SpaceClosed> for EngineError {
    fn from(_: SpaceClosed) -> Self {
        EngineError::AgentLost
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub result: StepResult,
    /// Tuple operations of the exchange before the step and of the step itself.
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub horizon: usize,
    pub init: State,
    pub steps: Vec<StepRecord>,
    /// Exchange at the horizon, after the last step.
    pub final_events: Vec<Event>,
    pub statuses: Vec<(String, Status)>,
    pub trajectory: Trajectory,
    pub report: Report,
}

impl Run {
    pub fn succeeded(&self, agent: &str) -> bool {
        self.report.success.iter().any(|(a, ok)| a == agent && *ok)
    }

    pub fn all_succeeded(&self) -> bool {
        self.report.success.iter().all(|(_, ok)| *ok)
    }
}

fn canonical(mut events: Vec<Event>) -> Vec<Event> {
    events.sort_by_cached_key(|e| (e.tuple.actor().to_string(), e.op as u8, e.tuple.to_string()));
    events
}

fn encode_inhibited(r: &StepResult, agent: &str) -> Vec<String> {
    r.inhibited_of(agent).into_iter().map(|(a, why)| format!("{a} {why}")).collect()
}

fn decode_inhibited(items: &[String]) -> Vec<(ActionRef, Reason)> {
    items
        .iter()
        .filter_map(|s| {
            let (a, why) = s.split_once(' ')?;
            let (agent, action) = a.split_once(':')?;
            Some((ActionRef::new(agent, action), why.parse().ok()?))
        })
        .collect()
}

/// One agent's share of a phase.
fn act(rt: &mut AgentRuntime, space: &TupleSpace, seq: &[State], phase: Phase) -> Result<(), SpaceClosed> {
    let t = seq.len() - 1;
    let me = rt.name().to_string();
    match phase {
        Phase::Offer => rt.exchange_offer(space, seq),
        Phase::Accept => rt.exchange_accept(space, seq),
        Phase::Commit => rt.exchange_commit(space, seq),
        Phase::Propose => {
            let actions = rt.propose(seq).iter().map(|a| a.to_string()).collect();
            space.out(Tuple::Propose { time: t, agent: me, actions })
        }
        Phase::Outcome => {
            let o = space.take_wait(|x| matches!(x, Tuple::Outcome { agent, .. } if *agent == me))?;
            if let Tuple::Outcome { reasons, .. } = o {
                rt.observe(seq, &decode_inhibited(&reasons));
            }
            Ok(())
        }
        Phase::Stop => Ok(()),
    }
}

/// How the engine reaches the agents.
trait Crew {
    fn phase(&mut self, space: &TupleSpace, seq: &RwLock<Vec<State>>, phase: Phase) -> Result<(), EngineError>;
}

struct InOrder<'a, 'p>(&'a mut [AgentRuntime<'p>]);

impl Crew for InOrder<'_, '_> {
    fn phase(&mut self, space: &TupleSpace, seq: &RwLock<Vec<State>>, phase: Phase) -> Result<(), EngineError> {
        let seq = seq.read().unwrap();
        for rt in self.0.iter_mut() {
            act(rt, space, &seq, phase)?;
        }
        Ok(())
    }
}

struct Threads {
    names: Vec<String>,
}

impl Crew for Threads {
    fn phase(&mut self, space: &TupleSpace, seq: &RwLock<Vec<State>>, phase: Phase) -> Result<(), EngineError> {
        let time = seq.read().unwrap().len() - 1;
        for n in &self.names {
            space.out(Tuple::Tick { time, agent: n.clone(), phase })?;
        }
        for n in &self.names {
            space.take_wait(|x| matches!(x, Tuple::Done { agent, phase: p, .. } if agent == n && *p == phase))?;
        }
        Ok(())
    }
}

/// Closes the space if an agent thread panics, so the engine does not wait forever.
struct CloseOnPanic<'a>(&'a TupleSpace);

impl Drop for CloseOnPanic<'_> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            self.0.close();
        }
    }
}

fn agent_loop(rt: &mut AgentRuntime, space: &TupleSpace, seq: &RwLock<Vec<State>>) {
    let _guard = CloseOnPanic(space);
    let me = rt.name().to_string();
    loop {
        let Ok(Tuple::Tick { time, phase, .. }) = space.take_wait(|x| matches!(x, Tuple::Tick { agent, .. } if *agent == me)) else {
            return;
        };
        if phase == Phase::Stop {
            return;
        }
        let ok = {
            let s = seq.read().unwrap();
            act(rt, space, &s, phase).is_ok()
        };
        if !ok || space.out(Tuple::Done { time, agent: me.clone(), phase }).is_err() {
            return;
        }
    }
}

fn drive(
    problem: &Problem,
    config: &EngineConfig,
    space: &TupleSpace,
    seq: &RwLock<Vec<State>>,
    crew: &mut dyn Crew,
) -> Result<(Vec<StepRecord>, Vec<Event>), EngineError> {
    let mut supervisor = Supervisor::new(problem, config.strategy, config.mode, config.seed);
    let names: Vec<String> = problem.agents.iter().map(|a| a.name.clone()).collect();
    let mut steps = Vec::new();
    let phase = |crew: &mut dyn Crew, p: Phase, events: &mut Vec<Event>| -> Result<(), EngineError> {
        crew.phase(space, seq, p)?;
        events.extend(canonical(space.take_events()));
        Ok(())
    };
    for t in 0..=config.horizon {
        let mut events = Vec::new();
        for p in [Phase::Offer, Phase::Accept, Phase::Commit] {
            phase(crew, p, &mut events)?;
        }
        if t == config.horizon {
            return Ok((steps, events));
        }
        phase(crew, Phase::Propose, &mut events)?;
        let mut proposals = Vec::new();
        for n in &names {
            let Some(Tuple::Propose { actions, .. }) =
                space.take(|x| matches!(x, Tuple::Propose { agent, time, .. } if agent == n && *time == t))?
            else {
                return Err(EngineError::AgentLost);
            };
            let acts = actions.iter().filter_map(|a| a.split_once(':')).map(|(g, x)| ActionRef::new(g, x)).collect();
            proposals.push((n.clone(), acts));
        }
        let result = {
            let s = seq.read().unwrap();
            supervisor.step(&s, &proposals)?
        };
        seq.write().unwrap().push(result.next.clone());
        for n in &names {
            let reasons = encode_inhibited(&result, n);
            space.out(Tuple::Outcome { time: t, agent: n.clone(), success: reasons.is_empty(), reasons })?;
        }
        events.extend(canonical(space.take_events()));
        phase(crew, Phase::Outcome, &mut events)?;
        steps.push(StepRecord { result, events });
    }
    unreachable!("the loop returns at the horizon")
}

/// Runs `problem` for `config.horizon` steps from its initial state.
pub fn run(problem: &Problem, config: &EngineConfig) -> Result<Run, EngineError> {
    let init = collect_initial(problem)?;
    let space = TupleSpace::new();
    let seq = RwLock::new(vec![init.clone()]);
    let mut agents: Vec<AgentRuntime> =
        problem.agents.iter().map(|a| AgentRuntime::new(problem, &a.name, config.agent())).collect();

    let (steps, final_events) = if config.deterministic {
        drive(problem, config, &space, &seq, &mut InOrder(&mut agents))?
    } else {
        let names: Vec<String> = agents.iter().map(|a| a.name().to_string()).collect();
        std::thread::scope(|scope| {
            let handles: Vec<_> = agents
                .iter_mut()
                .map(|rt| {
                    let (space, seq) = (&space, &seq);
                    scope.spawn(move || agent_loop(rt, space, seq))
                })
                .collect();
            let out = drive(problem, config, &space, &seq, &mut Threads { names: names.clone() });
            if out.is_ok() {
                for n in &names {
                    let _ = space.out(Tuple::Tick { time: config.horizon, agent: n.clone(), phase: Phase::Stop });
                }
            }
            for h in handles {
                if out.is_err() {
                    space.close();
                }
                h.join().expect("agent thread panicked");
            }
            out
        })?
    };

    let states = seq.into_inner().unwrap();
    let trajectory = Trajectory { actions: steps.iter().map(|s| s.result.enabled.clone()).collect(), states };
    let report = check_trajectory(problem, &trajectory, config.horizon);
    Ok(Run {
        horizon: config.horizon,
        init,
        steps,
        final_events,
        statuses: agents.iter().map(|a| (a.name().to_string(), a.status())).collect(),
        trajectory,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_theory;

    fn problem(srcs: &[&str]) -> Problem {
        Problem::compile(&srcs.iter().map(|s| parse_theory(s).unwrap()).collect::<Vec<_>>()).unwrap()
    }

    fn helped() -> Problem {
        problem(&[
            "agent m. known_agents h. fluent f valued 0..3. request f > 0 to_agent h if f = 0. goal f = 2.\n\
             action use. executable use if f > 0. use causes f = 2.",
            "agent h. known_agents m. fluent f valued 0..3. help m.",
        ])
    }

    #[test]
    fn request_is_served_and_goal_reached() {
        let p = helped();
        let r = run(&p, &EngineConfig::new(5)).unwrap();
        assert!(r.report.is_valid(), "{:?}", r.report.violations);
        assert!(r.succeeded("m"));
        let helps: Vec<usize> = r
            .steps
            .iter()
            .filter(|s| s.result.enabled.iter().any(|a| a.help_parts().is_some()))
            .map(|s| s.result.time)
            .collect();
        assert_eq!(helps, vec![1]);
    }

    #[test]
    fn threads_match_in_order() {
        let p = helped();
        let mut c = EngineConfig::new(5);
        let a = run(&p, &c).unwrap();
        c.deterministic = false;
        for _ in 0..5 {
            assert_eq!(run(&p, &c).unwrap(), a);
        }
    }

    #[test]
    fn inhibited_round_trip() {
        let items = vec!["a:act_a retry_after 2".to_string(), "b:help.m.0.0 global".to_string()];
        let d = decode_inhibited(&items);
        assert_eq!(d[0], (ActionRef::new("a", "act_a"), Reason::RetryAfter(2)));
        assert_eq!(d[1].1, Reason::Global);
    }
}
