//! Fluent expressions and constraints.
//!
//! Both are generic over the fluent reference type: the parser produces
//! `Expr<String>` (names), the semantics layer works on `Expr<FluentId>`
//! (indices into a [`Signature`](crate::semantics::Signature)).

use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "mod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Ge,
    Le,
    Gt,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Lt => "<",
        }
    }

    pub fn apply(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Lt => a < b,
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Lt => CmpOp::Gt,
        }
    }
}

/// An annotated fluent `f@-back`; `back == 0` is the timeless fluent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom<F> {
    pub fluent: F,
    pub back: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr<F> {
    Lit(i64),
    Fluent(Atom<F>),
    Bin(ArithOp, Box<Expr<F>>, Box<Expr<F>>),
    Neg(Box<Expr<F>>),
    Abs(Box<Expr<F>>),
    Rei(Box<Constraint<F>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint<F> {
    True,
    False,
    Cmp(CmpOp, Expr<F>, Expr<F>),
    And(Vec<Constraint<F>>),
    Or(Vec<Constraint<F>>),
    Not(Box<Constraint<F>>),
}

impl<F> Expr<F> {
    pub fn fluent(fluent: F) -> Self {
        Expr::Fluent(Atom { fluent, back: 0 })
    }

    pub fn past(fluent: F, back: u32) -> Self {
        Expr::Fluent(Atom { fluent, back })
    }

    pub fn bin(op: ArithOp, a: Expr<F>, b: Expr<F>) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn try_map<G, E>(&self, f: &mut impl FnMut(&F) -> Result<G, E>) -> Result<Expr<G>, E> {
        Ok(match self {
            Expr::Lit(n) => Expr::Lit(*n),
            Expr::Fluent(a) => Expr::Fluent(Atom {
                fluent: f(&a.fluent)?,
                back: a.back,
            }),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.try_map(f)?), Box::new(b.try_map(f)?)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.try_map(f)?)),
            Expr::Abs(e) => Expr::Abs(Box::new(e.try_map(f)?)),
            Expr::Rei(c) => Expr::Rei(Box::new(c.try_map(f)?)),
        })
    }

    pub fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Atom<F>)) {
        match self {
            Expr::Lit(_) => {}
            Expr::Fluent(a) => visit(a),
            Expr::Bin(_, a, b) => {
                a.visit_atoms(visit);
                b.visit_atoms(visit);
            }
            Expr::Neg(e) | Expr::Abs(e) => e.visit_atoms(visit),
            Expr::Rei(c) => c.visit_atoms(visit),
        }
    }

    /// Adds `by` to every annotation, timeless ones included.
    pub fn shift_back(&self, by: u32) -> Expr<F>
    where
        F: Clone,
    {
        match self {
            Expr::Lit(n) => Expr::Lit(*n),
            Expr::Fluent(a) => Expr::Fluent(Atom {
                fluent: a.fluent.clone(),
                back: a.back + by,
            }),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.shift_back(by), b.shift_back(by)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.shift_back(by))),
            Expr::Abs(e) => Expr::Abs(Box::new(e.shift_back(by))),
            Expr::Rei(c) => Expr::Rei(Box::new(c.shift_back(by))),
        }
    }

    pub fn as_timeless_fluent(&self) -> Option<&F> {
        match self {
            Expr::Fluent(Atom { fluent, back: 0 }) => Some(fluent),
            _ => None,
        }
    }
}

impl<F> Constraint<F> {
    pub fn cmp(op: CmpOp, a: Expr<F>, b: Expr<F>) -> Self {
        Constraint::Cmp(op, a, b)
    }

    pub fn negate(c: Constraint<F>) -> Self {
        Constraint::Not(Box::new(c))
    }

    /// Conjunction that flattens nested `And`s and drops `True`.
    pub fn all(parts: impl IntoIterator<Item = Constraint<F>>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Constraint::True => {}
                Constraint::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Constraint::True,
            1 => out.pop().unwrap(),
            _ => Constraint::And(out),
        }
    }

    pub fn try_map<G, E>(&self, f: &mut impl FnMut(&F) -> Result<G, E>) -> Result<Constraint<G>, E> {
        Ok(match self {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Cmp(op, a, b) => Constraint::Cmp(*op, a.try_map(f)?, b.try_map(f)?),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| c.try_map(f)).collect::<Result<_, _>>()?),
            Constraint::Or(cs) => Constraint::Or(cs.iter().map(|c| c.try_map(f)).collect::<Result<_, _>>()?),
            Constraint::Not(c) => Constraint::Not(Box::new(c.try_map(f)?)),
        })
    }

    pub fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Atom<F>)) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Cmp(_, a, b) => {
                a.visit_atoms(visit);
                b.visit_atoms(visit);
            }
            Constraint::And(cs) | Constraint::Or(cs) => cs.iter().for_each(|c| c.visit_atoms(visit)),
            Constraint::Not(c) => c.visit_atoms(visit),
        }
    }

    /// The timeless fluents occurring in the constraint.
    pub fn fluents(&self) -> BTreeSet<F>
    where
        F: Ord + Clone,
    {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            if a.back == 0 {
                out.insert(a.fluent.clone());
            }
        });
        out
    }

    /// Every fluent mentioned, at any annotation.
    pub fn all_fluents(&self) -> BTreeSet<F>
    where
        F: Ord + Clone,
    {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |a| {
            out.insert(a.fluent.clone());
        });
        out
    }

    pub fn max_back(&self) -> u32 {
        let mut m = 0;
        self.visit_atoms(&mut |a| m = m.max(a.back));
        m
    }

    pub fn is_timeless(&self) -> bool {
        self.max_back() == 0
    }

    pub fn shift_back(&self, by: u32) -> Constraint<F>
    where
        F: Clone,
    {
        match self {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Cmp(op, a, b) => Constraint::Cmp(*op, a.shift_back(by), b.shift_back(by)),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| c.shift_back(by)).collect()),
            Constraint::Or(cs) => Constraint::Or(cs.iter().map(|c| c.shift_back(by)).collect()),
            Constraint::Not(c) => Constraint::Not(Box::new(c.shift_back(by))),
        }
    }

    /// Top-level conjuncts (a non-`And` constraint is its own single conjunct).
    pub fn conjuncts(&self) -> Vec<&Constraint<F>> {
        match self {
            Constraint::And(cs) => cs.iter().flat_map(|c| c.conjuncts()).collect(),
            Constraint::True => Vec::new(),
            other => vec![other],
        }
    }

    /// True when the constraint is a conjunction of `f = E` with timeless `f`.
    pub fn is_basic_conjunction(&self) -> bool {
        self.conjuncts().iter().all(|c| {
            matches!(c, Constraint::Cmp(CmpOp::Eq, lhs, _) if lhs.as_timeless_fluent().is_some())
        })
    }
}

impl<F: fmt::Display> fmt::Display for Atom<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.back == 0 {
            write!(f, "{}", self.fluent)
        } else {
            write!(f, "{}@-{}", self.fluent, self.back)
        }
    }
}

impl<F: fmt::Display> fmt::Display for Expr<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(n) => write!(f, "{n}"),
            Expr::Fluent(a) => write!(f, "{a}"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Rei(c) => write!(f, "rei({c})"),
        }
    }
}

impl<F: fmt::Display> fmt::Display for Constraint<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, cs: &[Constraint<F>], sep: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")
        };
        match self {
            Constraint::True => write!(f, "true"),
            Constraint::False => write!(f, "false"),
            Constraint::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Constraint::And(cs) if cs.is_empty() => write!(f, "true"),
            Constraint::Or(cs) if cs.is_empty() => write!(f, "false"),
            Constraint::And(cs) => join(f, cs, "and"),
            Constraint::Or(cs) => join(f, cs, "or"),
            Constraint::Not(c) => write!(f, "not ({c})"),
        }
    }
}
