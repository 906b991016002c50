//! Cross-theory checks run before a problem is compiled.

use std::collections::BTreeMap;
use std::fmt;

use super::ast::*;
use crate::expr::{CmpOp, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => write!(f, "error: {}", self.message),
            Severity::Warning => write!(f, "warning: {}", self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

fn literal_assignment(c: &Constraint) -> Option<(&str, i64)> {
    match c {
        Constraint::Cmp(CmpOp::Eq, Expr::Fluent(a), Expr::Lit(n)) | Constraint::Cmp(CmpOp::Eq, Expr::Lit(n), Expr::Fluent(a))
            if a.back == 0 =>
        {
            Some((a.fluent.as_str(), *n))
        }
        _ => None,
    }
}

/// Checks a set of theories for consistency. An empty result means valid.
pub fn validate_problem(theories: &[AgentTheory]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let error = |out: &mut Vec<Diagnostic>, message: String| out.push(Diagnostic { severity: Severity::Error, message });
    let warn = |out: &mut Vec<Diagnostic>, message: String| out.push(Diagnostic { severity: Severity::Warning, message });

    let mut names = BTreeMap::new();
    for t in theories {
        if names.insert(t.name.as_str(), ()).is_some() {
            error(&mut out, format!("agent `{}` is defined more than once", t.name));
        }
    }

    let mut domains: BTreeMap<&str, (&Domain, &str)> = BTreeMap::new();
    for t in theories {
        for d in &t.fluents {
            match domains.get(d.name.as_str()) {
                Some((dom, owner)) if **dom != d.domain => error(
                    &mut out,
                    format!(
                        "fluent `{}` is valued {} by `{owner}` but {} by `{}`",
                        d.name, dom, d.domain, t.name
                    ),
                ),
                Some(_) => {}
                None => {
                    domains.insert(&d.name, (&d.domain, &t.name));
                }
            }
        }
    }

    let mut init: BTreeMap<&str, (i64, &str)> = BTreeMap::new();
    for t in theories {
        for c in &t.initially {
            for lit in c.conjuncts() {
                let Some((f, v)) = literal_assignment(lit) else { continue };
                if let Some((dom, _)) = domains.get(f) {
                    if !dom.contains(v) {
                        error(&mut out, format!("`{}` initially sets {f} = {v}, outside its domain {dom}", t.name));
                    }
                }
                match init.get(f) {
                    Some((w, owner)) if *w != v => error(
                        &mut out,
                        format!("contradictory initial values for `{f}`: {w} (`{owner}`) and {v} (`{}`)", t.name),
                    ),
                    Some(_) => {}
                    None => {
                        init.insert(f, (v, &t.name));
                    }
                }
            }
        }
    }

    for t in theories {
        for k in &t.known_agents {
            if !names.contains_key(k.as_str()) {
                warn(&mut out, format!("`{}` lists unknown agent `{k}` in known_agents", t.name));
            }
        }
        for r in &t.requests {
            if let Some(target) = &r.target {
                if !names.contains_key(target.as_str()) {
                    warn(&mut out, format!("`{}` sends requests to `{target}`, which will never answer", t.name));
                }
            }
        }
        for h in &t.helps {
            if let Donors::Agents(v) = &h.donors {
                for a in v {
                    if !names.contains_key(a.as_str()) {
                        warn(&mut out, format!("`{}` accepts requests from unknown agent `{a}`", t.name));
                    }
                }
            }
        }
    }
    out
}
