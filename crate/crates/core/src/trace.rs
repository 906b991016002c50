//! Line-oriented run log.
//!
//! Every line is one record with tab-separated fields:
//!
//! ```text
//! HORIZON     n
//! THEORY      path
//! RENDER      key value
//! INIT        f=v,g=w,...
//! STEP        t
//! PROPOSE     agent actions
//! CONFLICT    actions
//! NEGOTIATE   round action option applied|skipped
//! ENABLE      action
//! INHIBIT     action reason
//! TUPLE       op tag fields...
//! STATE-DIFF  fluent old new
//! OUTCOME     agent success|failure reasons
//! GOAL        agent success|failure
//! ```
//!
//! Action lists are comma-separated, `-` when empty. Tuples exchanged at the
//! horizon follow the last step.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::coordination::Event;
use crate::engine::Run;
use crate::semantics::{ActionRef, Fixture, FixtureStep, Signature};
use crate::supervisor::Reason;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace line {line}: {message}")]
pub struct TraceError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceStep {
    pub time: usize,
    pub proposals: Vec<(String, Vec<ActionRef>)>,
    pub conflicts: Vec<Vec<ActionRef>>,
    pub negotiation: Vec<String>,
    pub enabled: Vec<ActionRef>,
    pub inhibited: Vec<(ActionRef, Reason)>,
    /// Tuple events as written, without the `TUPLE` tag.
    pub tuples: Vec<String>,
    pub diffs: Vec<(String, i64, i64)>,
    pub outcomes: Vec<(String, bool, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub horizon: usize,
    pub theories: Vec<String>,
    pub render: BTreeMap<String, String>,
    pub init: Vec<(String, i64)>,
    pub steps: Vec<TraceStep>,
    pub final_tuples: Vec<String>,
    pub goals: Vec<(String, bool)>,
}

fn actions(v: &[ActionRef]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "success"
    } else {
        "failure"
    }
}

fn tuple_line(out: &mut String, e: &Event) {
    let _ = writeln!(out, "TUPLE\t{}\t{}", e.op, e.tuple);
}

/// Serializes a run. `theories` and `render` are copied into the header.
pub fn write_trace(sig: &Signature, run: &Run, theories: &[String], render: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "HORIZON\t{}", run.horizon);
    for t in theories {
        let _ = writeln!(out, "THEORY\t{t}");
    }
    for (k, v) in render {
        let _ = writeln!(out, "RENDER\t{k}\t{v}");
    }
    let init = sig.ids().map(|f| format!("{}={}", sig.name(f), run.init[f])).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "INIT\t{init}");
    for step in &run.steps {
        let r = &step.result;
        let _ = writeln!(out, "STEP\t{}", r.time);
        for (agent, acts) in &r.proposals {
            let _ = writeln!(out, "PROPOSE\t{agent}\t{}", actions(acts));
        }
        for c in &r.conflicts {
            let _ = writeln!(out, "CONFLICT\t{}", actions(c));
        }
        for t in &r.turns {
            let applied = if t.applied { "applied" } else { "skipped" };
            let _ = writeln!(out, "NEGOTIATE\t{}\t{}\t{}\t{applied}", t.round, t.action, t.option);
        }
        for a in &r.enabled {
            let _ = writeln!(out, "ENABLE\t{a}");
        }
        for (a, why) in &r.inhibited {
            let _ = writeln!(out, "INHIBIT\t{a}\t{why}");
        }
        for e in &step.events {
            tuple_line(&mut out, e);
        }
        for (f, old, new) in &r.diffs {
            let _ = writeln!(out, "STATE-DIFF\t{}\t{old}\t{new}", sig.name(*f));
        }
        for (agent, _) in &r.proposals {
            let failed = r.inhibited_of(agent);
            let reasons = if failed.is_empty() {
                "-".to_string()
            } else {
                failed.iter().map(|(a, why)| format!("{a} {why}")).collect::<Vec<_>>().join(",")
            };
            let _ = writeln!(out, "OUTCOME\t{agent}\t{}\t{reasons}", verdict(failed.is_empty()));
        }
    }
    for e in &run.final_events {
        tuple_line(&mut out, e);
    }
    for (agent, ok) in &run.report.success {
        let _ = writeln!(out, "GOAL\t{agent}\t{}", verdict(*ok));
    }
    out
}

fn parse_action(line: usize, s: &str) -> Result<ActionRef, TraceError> {
    let (agent, action) = s.split_once(':').ok_or_else(|| err(line, format!("bad action `{s}`")))?;
    Ok(ActionRef::new(agent, action))
}

fn parse_actions(line: usize, s: &str) -> Result<Vec<ActionRef>, TraceError> {
    if s == "-" || s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|a| parse_action(line, a)).collect()
}

fn parse_int<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, TraceError> {
    s.parse().map_err(|_| err(line, format!("bad number `{s}`")))
}

fn parse_verdict(line: usize, s: &str) -> Result<bool, TraceError> {
    match s {
        "success" => Ok(true),
        "failure" => Ok(false),
        _ => Err(err(line, format!("bad verdict `{s}`"))),
    }
}

impl Trace {
    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut tr = Trace::default();
        let mut horizon = None;
        let mut init = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = raw.split('\t').collect();
            let want = |n: usize| {
                if f.len() == n {
                    Ok(())
                } else {
                    Err(err(line, format!("`{}` takes {} fields", f[0], n - 1)))
                }
            };
            let in_step = |tr: &mut Trace| -> Result<usize, TraceError> {
                if tr.steps.is_empty() {
                    Err(err(line, format!("`{}` outside a step", f[0])))
                } else {
                    Ok(tr.steps.len() - 1)
                }
            };
            match f[0] {
                "HORIZON" => {
                    want(2)?;
                    horizon = Some(parse_int(line, f[1])?);
                }
                "THEORY" => {
                    want(2)?;
                    tr.theories.push(f[1].to_string());
                }
                "RENDER" => {
                    want(3)?;
                    tr.render.insert(f[1].to_string(), f[2].to_string());
                }
                "INIT" => {
                    want(2)?;
                    let mut vals = Vec::new();
                    for kv in f[1].split(',').filter(|s| !s.is_empty()) {
                        let (n, v) = kv.split_once('=').ok_or_else(|| err(line, format!("bad assignment `{kv}`")))?;
                        vals.push((n.to_string(), parse_int(line, v)?));
                    }
                    init = Some(vals);
                }
                "STEP" => {
                    want(2)?;
                    let time = parse_int(line, f[1])?;
                    if time != tr.steps.len() {
                        return Err(err(line, format!("expected step {}, found {time}", tr.steps.len())));
                    }
                    if !tr.goals.is_empty() || !tr.final_tuples.is_empty() {
                        return Err(err(line, "step after the end of the run"));
                    }
                    tr.steps.push(TraceStep { time, ..TraceStep::default() });
                }
                "PROPOSE" => {
                    want(3)?;
                    let s = in_step(&mut tr)?;
                    tr.steps[s].proposals.push((f[1].to_string(), parse_actions(line, f[2])?));
                }
                "CONFLICT" => {
                    want(2)?;
                    let s = in_step(&mut tr)?;
                    tr.steps[s].conflicts.push(parse_actions(line, f[1])?);
                }
                "NEGOTIATE" => {
                    want(5)?;
                    let s = in_step(&mut tr)?;
                    tr.steps[s].negotiation.push(f[1..].join("\t"));
                }
                "ENABLE" => {
                    want(2)?;
                    let s = in_step(&mut tr)?;
                    tr.steps[s].enabled.push(parse_action(line, f[1])?);
                }
                "INHIBIT" => {
                    want(3)?;
                    let s = in_step(&mut tr)?;
                    let why = f[2].parse().map_err(|e: String| err(line, e))?;
                    tr.steps[s].inhibited.push((parse_action(line, f[1])?, why));
                }
                "TUPLE" => {
                    if f.len() < 3 {
                        return Err(err(line, "`TUPLE` needs an operation and a tag"));
                    }
                    let t = f[1..].join("\t");
                    // tuples before any outcome of the last step belong to it
                    match tr.steps.last_mut() {
                        Some(s) if s.outcomes.is_empty() && tr.final_tuples.is_empty() => s.tuples.push(t),
                        _ => tr.final_tuples.push(t),
                    }
                }
                "STATE-DIFF" => {
                    want(4)?;
                    let s = in_step(&mut tr)?;
                    tr.steps[s].diffs.push((f[1].to_string(), parse_int(line, f[2])?, parse_int(line, f[3])?));
                }
                "OUTCOME" => {
                    want(4)?;
                    let s = in_step(&mut tr)?;
                    let reasons = if f[3] == "-" { Vec::new() } else { f[3].split(',').map(str::to_string).collect() };
                    tr.steps[s].outcomes.push((f[1].to_string(), parse_verdict(line, f[2])?, reasons));
                }
                "GOAL" => {
                    want(3)?;
                    tr.goals.push((f[1].to_string(), parse_verdict(line, f[2])?));
                }
                other => return Err(err(line, format!("unknown record `{other}`"))),
            }
        }
        tr.horizon = horizon.ok_or_else(|| err(0, "missing HORIZON"))?;
        tr.init = init.ok_or_else(|| err(0, "missing INIT"))?;
        Ok(tr)
    }

    /// Every state of the run, rebuilt from `INIT` and the diffs.
    pub fn states(&self) -> Result<Vec<Vec<(String, i64)>>, TraceError> {
        let mut cur = self.init.clone();
        let mut out = vec![cur.clone()];
        for s in &self.steps {
            for (name, old, new) in &s.diffs {
                let slot = cur
                    .iter_mut()
                    .find(|(n, _)| n == name)
                    .ok_or_else(|| err(0, format!("step {}: unknown fluent `{name}`", s.time)))?;
                if slot.1 != *old {
                    return Err(err(0, format!("step {}: `{name}` was {}, diff says {old}", s.time, slot.1)));
                }
                slot.1 = *new;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// The states as name lookups, for rendering.
    pub fn state_maps(&self) -> Result<Vec<BTreeMap<String, i64>>, TraceError> {
        Ok(self.states()?.into_iter().map(|s| s.into_iter().collect()).collect())
    }

    pub fn to_fixture(&self) -> Result<Fixture, TraceError> {
        let states = self.states()?;
        let steps = states
            .into_iter()
            .enumerate()
            .map(|(i, state)| {
                let actions = if i == 0 { Vec::new() } else { self.steps[i - 1].enabled.clone() };
                FixtureStep { index: i, actions, state }
            })
            .collect();
        Ok(Fixture { theories: self.theories.clone(), horizon: self.steps.len() as u32, steps })
    }
}
