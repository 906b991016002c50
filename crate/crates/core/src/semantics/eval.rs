//! Evaluation of expressions and constraints over a state sequence.

use crate::expr::{ArithOp, Constraint, Expr};

use super::model::{Cons, FExpr, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
}

/// A state sequence, optionally extended by one candidate state that is not
/// (yet) part of it.
#[derive(Debug, Clone, Copy)]
pub struct Timeline<'a> {
    base: &'a [State],
    top: Option<&'a [i64]>,
}

impl<'a> Timeline<'a> {
    pub fn new(base: &'a [State]) -> Self {
        assert!(!base.is_empty(), "a timeline needs at least one state");
        Timeline { base, top: None }
    }

    pub fn extended(base: &'a [State], top: &'a [i64]) -> Self {
        assert!(!base.is_empty(), "a timeline needs at least one state");
        Timeline { base, top: Some(top) }
    }

    pub fn len(&self) -> usize {
        self.base.len() + usize::from(self.top.is_some())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> usize {
        self.len() - 1
    }

    pub fn state(&self, k: usize) -> &'a [i64] {
        if k < self.base.len() {
            &self.base[k]
        } else {
            self.top.expect("time index out of range")
        }
    }

    /// Value of `f@-back` seen from time `j`; times before 0 clamp to 0.
    pub fn value(&self, j: usize, f: usize, back: u32) -> i64 {
        let k = j.saturating_sub(back as usize);
        self.state(k)[f]
    }

    pub fn eval(&self, j: usize, e: &FExpr) -> Result<i64, EvalError> {
        Ok(match e {
            Expr::Lit(n) => *n,
            Expr::Fluent(a) => self.value(j, a.fluent, a.back),
            Expr::Bin(op, a, b) => arith(*op, self.eval(j, a)?, self.eval(j, b)?)?,
            Expr::Neg(a) => self.eval(j, a)?.checked_neg().ok_or(EvalError::Overflow)?,
            Expr::Abs(a) => self.eval(j, a)?.checked_abs().ok_or(EvalError::Overflow)?,
            Expr::Rei(c) => i64::from(self.holds(j, c)?),
        })
    }

    pub fn holds(&self, j: usize, c: &Cons) -> Result<bool, EvalError> {
        Ok(match c {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Cmp(op, a, b) => op.apply(self.eval(j, a)?, self.eval(j, b)?),
            Constraint::And(cs) => {
                for c in cs {
                    if !self.holds(j, c)? {
                        return Ok(false);
                    }
                }
                true
            }
            Constraint::Or(cs) => {
                for c in cs {
                    if self.holds(j, c)? {
                        return Ok(true);
                    }
                }
                false
            }
            Constraint::Not(c) => !self.holds(j, c)?,
        })
    }

    /// Like [`holds`](Self::holds), but an evaluation error makes the
    /// constraint unsatisfied (and is logged).
    pub fn satisfied(&self, j: usize, c: &Cons) -> bool {
        match self.holds(j, c) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("{e} while evaluating a constraint at time {j}; treating it as unsatisfied");
                false
            }
        }
    }

    /// [`satisfied`](Self::satisfied) at the last time index.
    pub fn satisfied_now(&self, c: &Cons) -> bool {
        self.satisfied(self.last(), c)
    }
}

pub fn arith(op: ArithOp, a: i64, b: i64) -> Result<i64, EvalError> {
    match op {
        ArithOp::Add => a.checked_add(b).ok_or(EvalError::Overflow),
        ArithOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow),
        ArithOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow),
        ArithOp::Div | ArithOp::Mod if b == 0 => Err(EvalError::DivisionByZero),
        ArithOp::Div => a.checked_div(b).ok_or(EvalError::Overflow),
        ArithOp::Mod => a.checked_rem(b).ok_or(EvalError::Overflow),
    }
}

pub fn eval_expr(seq: &[State], j: usize, e: &FExpr) -> Result<i64, EvalError> {
    Timeline::new(seq).eval(j, e)
}

pub fn holds(seq: &[State], j: usize, c: &Cons) -> Result<bool, EvalError> {
    Timeline::new(seq).holds(j, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::CmpOp;

    fn f(back: u32) -> FExpr {
        Expr::past(0, back)
    }

    fn seq() -> Vec<State> {
        vec![vec![5, 1], vec![7, 1]]
    }

    #[test]
    fn annotated_values() {
        assert_eq!(eval_expr(&seq(), 1, &f(1)), Ok(5));
        assert_eq!(eval_expr(&seq(), 0, &f(2)), Ok(5));
        assert_eq!(eval_expr(&seq(), 1, &f(9)), Ok(5));
    }

    #[test]
    fn reification_and_abs() {
        let rei = Expr::Rei(Box::new(Constraint::cmp(CmpOp::Gt, f(0), Expr::Lit(6))));
        assert_eq!(eval_expr(&seq(), 1, &rei), Ok(1));
        let d = Expr::Abs(Box::new(Expr::bin(ArithOp::Sub, f(1), f(0))));
        assert_eq!(eval_expr(&seq(), 1, &d), Ok(2));
    }

    #[test]
    fn satisfaction() {
        let c = Constraint::And(vec![
            Constraint::cmp(CmpOp::Gt, f(0), Expr::Lit(6)),
            Constraint::cmp(CmpOp::Lt, f(1), Expr::Lit(6)),
        ]);
        assert_eq!(holds(&seq(), 1, &c), Ok(true));
        let or = Constraint::Or(vec![
            Constraint::cmp(CmpOp::Eq, f(0), Expr::Lit(5)),
            Constraint::cmp(CmpOp::Eq, f(0), Expr::Lit(9)),
        ]);
        assert_eq!(holds(&seq(), 0, &or), Ok(true));
    }

    #[test]
    fn truncating_division() {
        assert_eq!(arith(ArithOp::Div, -7, 2), Ok(-3));
        assert_eq!(arith(ArithOp::Mod, -7, 2), Ok(-1));
        assert_eq!(arith(ArithOp::Mod, 7, 0), Err(EvalError::DivisionByZero));
        assert_eq!(arith(ArithOp::Mul, i64::MAX, 2), Err(EvalError::Overflow));
    }

    #[test]
    fn division_by_zero_is_unsatisfied() {
        let c = Constraint::cmp(CmpOp::Eq, Expr::bin(ArithOp::Div, f(0), Expr::Fluent(crate::expr::Atom { fluent: 1, back: 0 })), Expr::Lit(0));
        let s = vec![vec![3, 0]];
        assert!(holds(&s, 0, &c).is_err());
        assert!(!Timeline::new(&s).satisfied(0, &c));
        assert!(!Timeline::new(&s).satisfied(0, &Constraint::negate(c)));
    }
}
