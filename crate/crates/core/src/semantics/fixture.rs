//! Line-oriented trajectory fixtures.
//!
//! ```text
//! THEORY volley2v2/black.baac
//! HORIZON 2
//! STEP 0 | ACTIONS - | STATE f=0,g=1
//! STEP 1 | ACTIONS a:inc | STATE f=1,g=1
//! STEP 2 | ACTIONS a:inc,b:dec | STATE f=2,g=0
//! ```

use std::fmt::Write;
use std::path::{Path, PathBuf};

use super::model::{ActionRef, Signature};
use super::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Fixture {
    /// Theory paths as written in the file.
    pub theories: Vec<String>,
    pub horizon: u32,
    pub steps: Vec<FixtureStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureStep {
    pub index: usize,
    pub actions: Vec<ActionRef>,
    pub state: Vec<(String, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FixtureError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FixtureError {
    FixtureError { line, message: message.into() }
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture, FixtureError> {
        let mut fx = Fixture::default();
        let mut horizon = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(p) = l.strip_prefix("THEORY ") {
                fx.theories.push(p.trim().to_string());
            } else if let Some(h) = l.strip_prefix("HORIZON ") {
                horizon = Some(h.trim().parse().map_err(|_| err(line, format!("bad horizon `{h}`")))?);
            } else if l.starts_with("STEP ") {
                fx.steps.push(parse_step(line, l)?);
            } else {
                return Err(err(line, format!("unrecognised line `{l}`")));
            }
        }
        fx.horizon = horizon.ok_or_else(|| err(0, "missing HORIZON line"))?;
        for (k, s) in fx.steps.iter().enumerate() {
            if s.index != k {
                return Err(err(0, format!("step {} appears where step {k} was expected", s.index)));
            }
        }
        Ok(fx)
    }

    pub fn from_trajectory(sig: &Signature, theories: Vec<String>, traj: &Trajectory) -> Fixture {
        let steps = traj
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut actions = if i == 0 { Vec::new() } else { traj.actions[i - 1].clone() };
                actions.sort();
                FixtureStep { index: i, actions, state: sig.ids().map(|f| (sig.name(f).to_string(), s[f])).collect() }
            })
            .collect();
        Fixture { theories, horizon: traj.steps() as u32, steps }
    }

    /// Theory paths resolved against the fixture's directory.
    pub fn theory_paths(&self, base: &Path) -> Vec<PathBuf> {
        self.theories.iter().map(|t| base.join(t)).collect()
    }

    pub fn to_trajectory(&self, sig: &Signature) -> Result<Trajectory, FixtureError> {
        let mut traj = Trajectory::default();
        for s in &self.steps {
            let mut state = vec![None; sig.len()];
            for (name, v) in &s.state {
                let f = sig.id(name).ok_or_else(|| err(0, format!("step {}: unknown fluent `{name}`", s.index)))?;
                state[f] = Some(*v);
            }
            let state = state
                .into_iter()
                .enumerate()
                .map(|(f, v)| v.ok_or_else(|| err(0, format!("step {}: no value for `{}`", s.index, sig.name(f)))))
                .collect::<Result<Vec<_>, _>>()?;
            if s.index == 0 {
                if !s.actions.is_empty() {
                    return Err(err(0, "step 0 cannot carry actions"));
                }
                traj.states.push(state);
            } else {
                traj.push(s.actions.clone(), state);
            }
        }
        if traj.states.is_empty() {
            return Err(err(0, "fixture has no steps"));
        }
        Ok(traj)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.theories {
            let _ = writeln!(out, "THEORY {t}");
        }
        let _ = writeln!(out, "HORIZON {}", self.horizon);
        for s in &self.steps {
            let acts = if s.actions.is_empty() {
                "-".to_string()
            } else {
                s.actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
            };
            let state = s.state.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(",");
            let _ = writeln!(out, "STEP {} | ACTIONS {acts} | STATE {state}", s.index);
        }
        out
    }
}

fn parse_step(line: usize, l: &str) -> Result<FixtureStep, FixtureError> {
    let parts: Vec<&str> = l.split('|').map(str::trim).collect();
    let [step, acts, state] = parts[..] else {
        return Err(err(line, "expected `STEP i | ACTIONS ... | STATE ...`"));
    };
    let index = step
        .strip_prefix("STEP ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| err(line, format!("bad step `{step}`")))?;
    let acts = acts.strip_prefix("ACTIONS").ok_or_else(|| err(line, "missing ACTIONS"))?.trim();
    let mut actions = Vec::new();
    if acts != "-" && !acts.is_empty() {
        for a in acts.split(',') {
            let (agent, action) = a.trim().split_once(':').ok_or_else(|| err(line, format!("bad action `{a}`")))?;
            actions.push(ActionRef::new(agent, action));
        }
    }
    let state = state.strip_prefix("STATE").ok_or_else(|| err(line, "missing STATE"))?.trim();
    let mut values = Vec::new();
    if !state.is_empty() {
        for kv in state.split(',') {
            let (k, v) = kv.trim().split_once('=').ok_or_else(|| err(line, format!("bad assignment `{kv}`")))?;
            let v = v.trim().parse().map_err(|_| err(line, format!("bad value in `{kv}`")))?;
            values.push((k.trim().to_string(), v));
        }
    }
    Ok(FixtureStep { index, actions, state: values })
}
