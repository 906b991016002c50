//! `forall` template expansion.
//!
//! ```text
//! forall P in 1..2: fluent x_{P} valued 1..5.
//! forall (D, DX, DY) in [(n, 0, 1), (e, 1, 0)]: action move_{D}.
//! ```
//!
//! Range bounds are constant integer expressions and may use variables bound
//! by an enclosing `forall`. Inside the body a token equal to a variable name
//! is replaced by its value, and `{VAR}` placeholders inside identifiers are
//! interpolated.

use super::lexer::{Tok, Token};
use super::ParseError;

const MAX_EXPANSION: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Int(i64),
    Sym(String),
}

/// Splits a token stream into `.`-terminated statements and expands templates.
pub fn expand(tokens: Vec<Token>) -> Result<Vec<Vec<Token>>, ParseError> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    for t in tokens {
        if t.tok == Tok::Dot {
            if current.is_empty() {
                return Err(ParseError::new(t.line, t.col, "empty statement"));
            }
            expand_statement(std::mem::take(&mut current), &mut out)?;
        } else {
            current.push(t);
        }
    }
    if let Some(t) = current.first() {
        return Err(ParseError::new(t.line, t.col, "statement is missing its terminating `.`"));
    }
    for stmt in &out {
        for t in stmt {
            if let Tok::Ident(s) = &t.tok {
                if s.contains('{') {
                    return Err(ParseError::new(t.line, t.col, format!("unbound template placeholder in `{s}`")));
                }
            }
        }
    }
    Ok(out)
}

fn is_forall(stmt: &[Token]) -> bool {
    matches!(stmt.first(), Some(Token { tok: Tok::Ident(s), .. }) if s == "forall")
}

fn expand_statement(stmt: Vec<Token>, out: &mut Vec<Vec<Token>>) -> Result<(), ParseError> {
    if !is_forall(&stmt) {
        out.push(stmt);
        return Ok(());
    }
    let mut cur = Cursor { toks: &stmt, pos: 1 };
    let vars = cur.binders()?;
    cur.keyword("in")?;
    let rows = cur.source(vars.len())?;
    cur.expect(&Tok::Colon)?;
    let body = &stmt[cur.pos..];
    if body.is_empty() {
        return Err(cur.error("template body is empty"));
    }
    for row in rows {
        let ground = substitute(body, &vars, &row)?;
        expand_statement(ground, out)?;
        if out.len() > MAX_EXPANSION {
            return Err(ParseError::new(stmt[0].line, stmt[0].col, "template expansion too large"));
        }
    }
    Ok(())
}

fn substitute(body: &[Token], vars: &[String], row: &[Value]) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::with_capacity(body.len());
    for t in body {
        let Tok::Ident(name) = &t.tok else {
            out.push(t.clone());
            continue;
        };
        if let Some(k) = vars.iter().position(|v| v == name) {
            match &row[k] {
                Value::Int(n) if *n < 0 => {
                    out.push(Token { tok: Tok::Minus, ..t.clone() });
                    out.push(Token { tok: Tok::Int(-n), ..t.clone() });
                }
                Value::Int(n) => out.push(Token { tok: Tok::Int(*n), ..t.clone() }),
                Value::Sym(s) => out.push(Token { tok: Tok::Ident(s.clone()), ..t.clone() }),
            }
            continue;
        }
        let mut text = name.clone();
        for (v, val) in vars.iter().zip(row) {
            let ph = format!("{{{v}}}");
            if text.contains(&ph) {
                let rep = match val {
                    Value::Int(n) if *n < 0 => {
                        return Err(ParseError::new(t.line, t.col, format!("cannot interpolate negative value {n} into `{name}`")))
                    }
                    Value::Int(n) => n.to_string(),
                    Value::Sym(s) => s.clone(),
                };
                text = text.replace(&ph, &rep);
            }
        }
        let tok = match text.parse::<i64>() {
            Ok(n) if !text.contains('{') => Tok::Int(n),
            _ => Tok::Ident(text),
        };
        out.push(Token { tok, ..t.clone() });
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = self.toks.get(self.pos).or(self.toks.last()).unwrap();
        ParseError::new(t.line, t.col, msg)
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {} in template header", tok.describe())))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{kw}` in template header"))),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error("expected a template variable")),
        }
    }

    fn binders(&mut self) -> Result<Vec<String>, ParseError> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let mut vars = vec![self.ident()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                vars.push(self.ident()?);
            }
            self.expect(&Tok::RParen)?;
            Ok(vars)
        } else {
            Ok(vec![self.ident()?])
        }
    }

    fn source(&mut self, arity: usize) -> Result<Vec<Vec<Value>>, ParseError> {
        if self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            let mut rows = Vec::new();
            if self.peek() != Some(&Tok::RBracket) {
                loop {
                    rows.push(self.row(arity)?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(&Tok::RBracket)?;
            return Ok(rows);
        }
        if arity != 1 {
            return Err(self.error("a tuple of variables needs an explicit `[...]` list"));
        }
        let lo = self.int_expr()?;
        self.expect(&Tok::DotDot)?;
        let hi = self.int_expr()?;
        Ok((lo..=hi).map(|n| vec![Value::Int(n)]).collect())
    }

    fn row(&mut self, arity: usize) -> Result<Vec<Value>, ParseError> {
        if arity == 1 && self.peek() != Some(&Tok::LParen) {
            return Ok(vec![self.value()?]);
        }
        self.expect(&Tok::LParen)?;
        let mut vals = vec![self.value()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            vals.push(self.value()?);
        }
        self.expect(&Tok::RParen)?;
        if vals.len() != arity {
            return Err(self.error(format!("expected a tuple of {arity} values, found {}", vals.len())));
        }
        Ok(vals)
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Value::Int(n))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                match self.peek().cloned() {
                    Some(Tok::Int(n)) => {
                        self.pos += 1;
                        Ok(Value::Int(-n))
                    }
                    _ => Err(self.error("expected an integer after `-`")),
                }
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Value::Sym(s))
            }
            _ => Err(self.error("expected a template value")),
        }
    }

    // Constant integer expressions for range bounds.
    fn int_expr(&mut self) -> Result<i64, ParseError> {
        let mut acc = self.int_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.checked_add(self.int_term()?).ok_or_else(|| self.error("overflow"))?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.checked_sub(self.int_term()?).ok_or_else(|| self.error("overflow"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn int_term(&mut self) -> Result<i64, ParseError> {
        let mut acc = self.int_atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.checked_mul(self.int_atom()?).ok_or_else(|| self.error("overflow"))?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.int_atom()?;
                    acc = acc.checked_div(d).ok_or_else(|| self.error("division by zero in range bound"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn int_atom(&mut self) -> Result<i64, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(n)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.int_atom()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.int_expr()?;
                self.expect(&Tok::RParen)?;
                Ok(v)
            }
            _ => Err(self.error("expected a constant integer in range bound")),
        }
    }
}
