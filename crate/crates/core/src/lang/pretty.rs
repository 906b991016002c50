//! Prints an [`AgentTheory`] back as source text that parses to the same theory.

use std::fmt::Write;

use super::ast::*;

fn cond(out: &mut String, kw: &str, c: &Constraint) {
    if *c != Constraint::True {
        let _ = write!(out, " {kw} {c}");
    }
}

pub fn print_theory(t: &AgentTheory) -> String {
    let mut out = String::new();
    let _ = write!(out, "agent {}", t.name);
    if t.priority != 0 {
        let _ = write!(out, " priority {}", t.priority);
    }
    out.push_str(".\n");
    if !t.known_agents.is_empty() {
        let _ = writeln!(out, "known_agents {}.", t.known_agents.join(", "));
    }
    for d in &t.fluents {
        let _ = writeln!(out, "fluent {} valued {}.", d.name, d.domain);
    }
    for a in &t.actions {
        let _ = write!(out, "action {}", a.name);
        for o in &a.on_conflict {
            match o {
                ConflictOption::RetryAfter { steps, provided } => {
                    let _ = write!(out, " on_conflict retry_after {steps}");
                    cond(&mut out, "provided", provided);
                }
                ConflictOption::Forego { provided } => {
                    out.push_str(" on_conflict forego");
                    cond(&mut out, "provided", provided);
                }
                ConflictOption::Arbitrate => out.push_str(" on_conflict arbitrate"),
            }
        }
        for o in &a.on_failure {
            match o {
                FailureOption::RetryAfter { steps, cond: c } => {
                    let _ = write!(out, " on_failure retry_after {steps}");
                    cond(&mut out, "if", c);
                }
                FailureOption::Replan { cond: c, add_goal } => {
                    out.push_str(" on_failure replan");
                    cond(&mut out, "if", c);
                    if let Some(g) = add_goal {
                        let _ = write!(out, " add_goal {g}");
                    }
                }
                FailureOption::Fail { cond: c } => {
                    out.push_str(" on_failure fail");
                    cond(&mut out, "if", c);
                }
            }
        }
        out.push_str(".\n");
    }
    for e in &t.executable {
        let _ = write!(out, "executable {}", e.action);
        cond(&mut out, "if", &e.cond);
        out.push_str(".\n");
    }
    for l in &t.laws {
        let _ = write!(out, "{} causes {}", l.action, l.eff);
        cond(&mut out, "if", &l.prec);
        out.push_str(".\n");
    }
    for r in &t.requests {
        let _ = write!(out, "request {}", r.wanted);
        if let Some(a) = &r.target {
            let _ = write!(out, " to_agent {a}");
        }
        let _ = write!(out, " if {}", r.trigger);
        if let Some(o) = &r.offer {
            let _ = write!(out, " offering {o}");
        }
        out.push_str(".\n");
    }
    for h in &t.helps {
        match &h.donors {
            Donors::All => out.push_str("help all"),
            Donors::Agents(v) => {
                let _ = write!(out, "help {}", v.join(", "));
            }
        }
        cond(&mut out, "if", &h.cond);
        out.push_str(".\n");
    }
    for g in &t.goals {
        let _ = writeln!(out, "goal {g}.");
    }
    for c in &t.initially {
        let _ = writeln!(out, "initially {c}.");
    }
    for g in &t.globals {
        match g {
            GlobalConstraint::Always(c) => {
                let _ = writeln!(out, "always {c}.");
            }
            GlobalConstraint::HoldsAt(c, n) => {
                let _ = writeln!(out, "{} holds_at {n}.", paren(c));
            }
        }
    }
    out
}

// A bare comparison at statement start could begin with a keyword-free
// expression; wrapping keeps `holds_at` statements unambiguous.
fn paren(c: &Constraint) -> String {
    match c {
        Constraint::And(_) | Constraint::Or(_) => c.to_string(),
        _ => format!("({c})"),
    }
}
