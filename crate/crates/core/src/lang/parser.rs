//! Recursive-descent parser for agent theories.

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::template;
use super::ParseError;
use crate::expr::{ArithOp, Atom, CmpOp};

const KEYWORDS: &[&str] = &[
    "agent", "priority", "known_agents", "fluent", "valued", "action", "on_conflict", "on_failure",
    "retry_after", "provided", "forego", "arbitrate", "if", "replan", "add_goal", "fail", "executable",
    "causes", "request", "to_agent", "offering", "help", "all", "goal", "initially", "always",
    "holds_at", "and", "or", "not", "rei", "abs", "pair", "mod", "true", "false", "forall", "in",
    "eq", "neq", "leq", "lt", "geq", "gt",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Parses one agent theory. Templates are expanded, `pair` comparisons are
/// normalised, and every fluent and action reference is resolved.
pub fn parse_theory(text: &str) -> Result<AgentTheory, ParseError> {
    let statements = template::expand(tokenize(text)?)?;
    let mut b = Builder::default();
    for stmt in &statements {
        let mut p = Parser { toks: stmt, pos: 0, refs: Vec::new() };
        p.statement(&mut b)?;
        b.refs.append(&mut p.refs);
    }
    b.finish()
}

/// Parses a standalone constraint, leaving fluent names unresolved.
pub fn parse_constraint(text: &str) -> Result<Constraint, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::new(1, 1, "empty constraint"));
    }
    let mut p = Parser { toks: &toks, pos: 0, refs: Vec::new() };
    let c = p.constraint()?;
    p.end()?;
    Ok(c)
}

#[derive(Default)]
struct Builder {
    agent: Option<(String, u32, (usize, usize))>,
    theory: AgentTheory,
    refs: Vec<(String, usize, usize)>,
    action_refs: Vec<(String, usize, usize)>,
    agent_refs: Vec<(String, usize, usize)>,
}

impl Builder {
    fn finish(mut self) -> Result<AgentTheory, ParseError> {
        let Some((name, priority, _)) = self.agent.take() else {
            return Err(ParseError::new(1, 1, "missing `agent` declaration"));
        };
        self.theory.name = name;
        self.theory.priority = priority;
        let declared: HashSet<&str> = self.theory.fluents.iter().map(|d| d.name.as_str()).collect();
        for (n, line, col) in &self.refs {
            if !declared.contains(n.as_str()) {
                return Err(ParseError::new(*line, *col, format!("undeclared fluent `{n}`")));
            }
        }
        let actions: HashSet<&str> = self.theory.actions.iter().map(|a| a.name.as_str()).collect();
        for (n, line, col) in &self.action_refs {
            if !actions.contains(n.as_str()) {
                return Err(ParseError::new(*line, *col, format!("undeclared action `{n}`")));
            }
        }
        for (n, line, col) in &self.agent_refs {
            if !self.theory.known_agents.iter().any(|k| k == n) {
                return Err(ParseError::new(*line, *col, format!("agent `{n}` is not listed in known_agents")));
            }
        }
        for a in &self.theory.actions {
            if !self.theory.executable.iter().any(|e| e.action == a.name) {
                return Err(ParseError::new(1, 1, format!("action `{}` has no executability axiom", a.name)));
            }
        }
        Ok(self.theory)
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    refs: Vec<(String, usize, usize)>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) if self.pos < self.toks.len() => (t.line, t.col),
            Some(t) => (t.line, t.col + t.tok.text().len()),
            None => (1, 1),
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::new(l, c, msg)
    }

    fn unexpected(&self, what: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error(format!("expected {what}, found {}", t.describe())),
            None => self.error(format!("expected {what}, found end of statement")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn end(&self) -> PResult<()> {
        if self.pos < self.toks.len() {
            Err(self.unexpected("end of statement"))
        } else {
            Ok(())
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn name_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.name(what)?];
        while self.eat(&Tok::Comma) {
            out.push(self.name(what)?);
        }
        Ok(out)
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(if neg { -n } else { *n })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn natural(&mut self, what: &str) -> PResult<u32> {
        match self.peek() {
            Some(Tok::Int(n)) if *n >= 0 && *n <= u32::MAX as i64 => {
                self.pos += 1;
                Ok(*n as u32)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    // ---- statements ----

    fn statement(&mut self, b: &mut Builder) -> PResult<()> {
        let start = self.here();
        let kw = match self.peek() {
            Some(Tok::Ident(s)) if is_keyword(s) => s.as_str(),
            _ => "",
        };
        match kw {
            "agent" => {
                self.pos += 1;
                let name = self.name("an agent name")?;
                let priority = if self.eat_kw("priority") { self.natural("a priority")? } else { 0 };
                if b.agent.is_some() {
                    return Err(ParseError::new(start.0, start.1, "duplicate `agent` declaration"));
                }
                b.agent = Some((name, priority, start));
            }
            "known_agents" => {
                self.pos += 1;
                let names = self.name_list("an agent name")?;
                b.theory.known_agents.extend(names);
            }
            "fluent" => {
                self.pos += 1;
                let names = self.name_list("a fluent name")?;
                self.expect_kw("valued")?;
                let domain = self.domain()?;
                for name in names {
                    if b.theory.fluent(&name).is_some() {
                        return Err(ParseError::new(start.0, start.1, format!("fluent `{name}` declared twice")));
                    }
                    b.theory.fluents.push(FluentDecl { name, domain: domain.clone() });
                }
            }
            "action" => {
                self.pos += 1;
                let decl = self.action_decl()?;
                if b.theory.action(&decl.name).is_some() {
                    return Err(ParseError::new(start.0, start.1, format!("action `{}` declared twice", decl.name)));
                }
                b.theory.actions.push(decl);
            }
            "executable" => {
                self.pos += 1;
                let (l, c) = self.here();
                let action = self.name("an action name")?;
                let cond = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                b.action_refs.push((action.clone(), l, c));
                b.theory.executable.push(ExecAxiom { action, cond });
            }
            "request" => {
                self.pos += 1;
                let wanted = self.constraint()?;
                let target = if self.eat_kw("to_agent") {
                    let (l, c) = self.here();
                    let n = self.name("an agent name")?;
                    b.agent_refs.push((n.clone(), l, c));
                    Some(n)
                } else {
                    None
                };
                self.expect_kw("if")?;
                let trigger = self.constraint()?;
                let offer = if self.eat_kw("offering") { Some(self.constraint()?) } else { None };
                b.theory.requests.push(RequestAxiom { wanted, target, trigger, offer });
            }
            "help" => {
                self.pos += 1;
                let donors = if self.eat_kw("all") {
                    Donors::All
                } else {
                    let (l, c) = self.here();
                    let names = self.name_list("an agent name or `all`")?;
                    for n in &names {
                        b.agent_refs.push((n.clone(), l, c));
                    }
                    Donors::Agents(names)
                };
                let cond = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                b.theory.helps.push(HelpAxiom { donors, cond });
            }
            "goal" => {
                self.pos += 1;
                let c = self.constraint()?;
                b.theory.goals.push(c);
            }
            "initially" => {
                self.pos += 1;
                let c = self.constraint()?;
                if !c.is_timeless() {
                    return Err(ParseError::new(start.0, start.1, "initial-state constraints must be timeless"));
                }
                b.theory.initially.push(c);
            }
            "always" => {
                self.pos += 1;
                let c = self.constraint()?;
                b.theory.globals.push(GlobalConstraint::Always(c));
            }
            _ if matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "causes") => {
                let (l, c) = self.here();
                let action = self.name("an action name")?;
                self.pos += 1;
                let eff_start = self.here();
                let eff = self.constraint()?;
                if !eff.is_basic_conjunction() {
                    return Err(ParseError::new(
                        eff_start.0,
                        eff_start.1,
                        "effects must be a conjunction of `fluent = expression` constraints",
                    ));
                }
                let prec = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                b.action_refs.push((action.clone(), l, c));
                b.theory.laws.push(DynamicLaw { action, eff, prec });
            }
            _ if kw.is_empty() || matches!(kw, "not" | "true" | "false" | "pair" | "rei" | "abs") => {
                let c = self.constraint()?;
                self.expect_kw("holds_at")?;
                let n = self.natural("a time step")?;
                b.theory.globals.push(GlobalConstraint::HoldsAt(c, n));
            }
            _ => return Err(self.unexpected("a statement")),
        }
        self.end()
    }

    fn domain(&mut self) -> PResult<Domain> {
        let d = if self.eat(&Tok::LBrace) {
            let mut vals = vec![self.signed_int()?];
            while self.eat(&Tok::Comma) {
                vals.push(self.signed_int()?);
            }
            self.expect(&Tok::RBrace)?;
            Domain::set(vals)
        } else if self.eat(&Tok::LBracket) {
            let lo = self.signed_int()?;
            self.expect(&Tok::Comma)?;
            let hi = self.signed_int()?;
            self.expect(&Tok::RBracket)?;
            Domain::Range(lo, hi)
        } else {
            let lo = self.signed_int()?;
            self.expect(&Tok::DotDot)?;
            let hi = self.signed_int()?;
            Domain::Range(lo, hi)
        };
        if d.is_empty() {
            return Err(self.error("empty fluent domain"));
        }
        Ok(d)
    }

    fn action_decl(&mut self) -> PResult<ActionDecl> {
        let name = self.name("an action name")?;
        let mut decl = ActionDecl { name, on_conflict: Vec::new(), on_failure: Vec::new() };
        loop {
            if self.eat_kw("on_conflict") {
                let opt = if self.eat_kw("retry_after") {
                    let steps = self.steps()?;
                    let provided = if self.eat_kw("provided") { self.constraint()? } else { Constraint::True };
                    ConflictOption::RetryAfter { steps, provided }
                } else if self.eat_kw("forego") {
                    let provided = if self.eat_kw("provided") { self.constraint()? } else { Constraint::True };
                    ConflictOption::Forego { provided }
                } else if self.eat_kw("arbitrate") {
                    ConflictOption::Arbitrate
                } else {
                    return Err(self.unexpected("`retry_after`, `forego` or `arbitrate`"));
                };
                decl.on_conflict.push(opt);
            } else if self.eat_kw("on_failure") {
                let opt = if self.eat_kw("retry_after") {
                    let steps = self.steps()?;
                    let cond = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                    FailureOption::RetryAfter { steps, cond }
                } else if self.eat_kw("replan") {
                    let cond = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                    let add_goal = if self.eat_kw("add_goal") { Some(self.constraint()?) } else { None };
                    FailureOption::Replan { cond, add_goal }
                } else if self.eat_kw("fail") {
                    let cond = if self.eat_kw("if") { self.constraint()? } else { Constraint::True };
                    FailureOption::Fail { cond }
                } else {
                    return Err(self.unexpected("`retry_after`, `replan` or `fail`"));
                };
                decl.on_failure.push(opt);
            } else {
                return Ok(decl);
            }
        }
    }

    fn steps(&mut self) -> PResult<u32> {
        let n = self.natural("a number of steps")?;
        if n == 0 {
            return Err(self.error("retry_after needs at least 1 step"));
        }
        Ok(n)
    }

    // ---- constraints ----

    pub fn constraint(&mut self) -> PResult<Constraint> {
        let first = self.conjunction()?;
        if !self.at_kw("or") {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_kw("or") {
            parts.push(self.conjunction()?);
        }
        Ok(Constraint::Or(parts))
    }

    fn conjunction(&mut self) -> PResult<Constraint> {
        let first = self.negation()?;
        if !self.at_kw("and") {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat_kw("and") {
            parts.push(self.negation()?);
        }
        Ok(Constraint::And(parts))
    }

    fn negation(&mut self) -> PResult<Constraint> {
        if self.eat_kw("not") {
            return Ok(Constraint::negate(self.negation()?));
        }
        self.primitive()
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek()? {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Le => CmpOp::Le,
            Tok::Lt => CmpOp::Lt,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            Tok::Ident(s) => match s.as_str() {
                "eq" => CmpOp::Eq,
                "neq" => CmpOp::Ne,
                "leq" => CmpOp::Le,
                "lt" => CmpOp::Lt,
                "geq" => CmpOp::Ge,
                "gt" => CmpOp::Gt,
                _ => return None,
            },
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn continues_expression(&self) -> bool {
        match self.peek() {
            Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Eq | Tok::Ne | Tok::Le | Tok::Lt | Tok::Ge | Tok::Gt) => true,
            Some(Tok::Ident(s)) => matches!(s.as_str(), "mod" | "eq" | "neq" | "leq" | "lt" | "geq" | "gt"),
            _ => false,
        }
    }

    fn primitive(&mut self) -> PResult<Constraint> {
        if self.eat_kw("true") {
            return Ok(Constraint::True);
        }
        if self.eat_kw("false") {
            return Ok(Constraint::False);
        }
        if self.at_kw("pair") {
            return self.pair_constraint();
        }
        if self.peek() == Some(&Tok::LParen) {
            let save = (self.pos, self.refs.len());
            self.pos += 1;
            if let Ok(c) = self.constraint() {
                if self.eat(&Tok::RParen) && !self.continues_expression() {
                    return Ok(c);
                }
            }
            self.pos = save.0;
            self.refs.truncate(save.1);
        }
        let lhs = self.expr()?;
        let Some(op) = self.cmp_op() else {
            return Err(self.unexpected("a comparison operator"));
        };
        let rhs = self.expr()?;
        Ok(Constraint::Cmp(op, lhs, rhs))
    }

    fn pair_constraint(&mut self) -> PResult<Constraint> {
        let (a1, a2) = self.pair()?;
        let op = self.cmp_op().ok_or_else(|| self.unexpected("`=` or `!=` between pairs"))?;
        let (b1, b2) = self.pair()?;
        let both = Constraint::And(vec![Constraint::Cmp(CmpOp::Eq, a1, b1), Constraint::Cmp(CmpOp::Eq, a2, b2)]);
        match op {
            CmpOp::Eq => Ok(both),
            CmpOp::Ne => Ok(Constraint::negate(both)),
            _ => Err(self.error("pairs can only be compared with `=` or `!=`")),
        }
    }

    fn pair(&mut self) -> PResult<(Expr, Expr)> {
        self.expect_kw("pair")?;
        self.expect(&Tok::LParen)?;
        let a = self.expr()?;
        self.expect(&Tok::Comma)?;
        let b = self.expr()?;
        self.expect(&Tok::RParen)?;
        Ok((a, b))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => return Ok(acc),
            };
            self.pos += 1;
            acc = Expr::bin(op, acc, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => ArithOp::Mul,
                Some(Tok::Slash) => ArithOp::Div,
                Some(Tok::Ident(s)) if s == "mod" => ArithOp::Mod,
                _ => return Ok(acc),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            if matches!(op, ArithOp::Div | ArithOp::Mod) && rhs == Expr::Lit(0) {
                return Err(self.error("division by literal zero"));
            }
            acc = Expr::bin(op, acc, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            if let Some(Tok::Int(n)) = self.peek() {
                self.pos += 1;
                return Ok(Expr::Lit(-n));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Lit(*n))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s == "abs" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(Tok::Ident(s)) if s == "rei" => {
                self.pos += 1;
                self.expect(&Tok::LParen)?;
                let c = self.constraint()?;
                self.expect(&Tok::RParen)?;
                Ok(Expr::Rei(Box::new(c)))
            }
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let (l, c) = self.here();
                self.pos += 1;
                let back = if self.eat(&Tok::At) {
                    let t = self.signed_int()?;
                    if t > 0 {
                        return Err(ParseError::new(l, c, format!("annotation `{s}@{t}` refers to the future")));
                    }
                    u32::try_from(-t).map_err(|_| self.error("annotation too large"))?
                } else {
                    0
                };
                self.refs.push((s.clone(), l, c));
                Ok(Expr::Fluent(Atom { fluent: s.clone(), back }))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}
