//! Finite-domain search for v̄-solutions.
//!
//! Variables are the timeless fluents of the constraint, tried in ascending id
//! order with values ascending, so the first solution found is the
//! lexicographically smallest one. Subtrees are pruned with three-valued
//! interval evaluation, and bounds of `f op E` conjuncts narrow the values
//! tried for `f`.

use crate::expr::{ArithOp, CmpOp, Constraint, Expr};

use super::eval::Timeline;
use super::model::{Cons, FExpr, FluentId, Signature, State};

/// A partial assignment, sorted by fluent id.
pub type Assignment = Vec<(FluentId, i64)>;

type Iv = (i128, i128);
const TOP: Iv = (i128::MIN, i128::MAX);

struct Search<'a> {
    sig: &'a Signature,
    seq: &'a [State],
    c: &'a Cons,
    conjuncts: Vec<&'a Cons>,
    vars: Vec<FluentId>,
    assigned: Vec<Option<i64>>,
    scratch: State,
}

impl Search<'_> {
    fn atom(&self, f: FluentId, back: u32) -> Iv {
        if back == 0 {
            match self.assigned[f] {
                Some(v) => (v as i128, v as i128),
                None => {
                    let d = self.sig.domain(f);
                    (d.min() as i128, d.max() as i128)
                }
            }
        } else {
            let j = self.seq.len();
            let k = j.saturating_sub(back as usize);
            let v = self.seq[k][f] as i128;
            (v, v)
        }
    }

    fn iv(&self, e: &FExpr) -> Iv {
        match e {
            Expr::Lit(n) => (*n as i128, *n as i128),
            Expr::Fluent(a) => self.atom(a.fluent, a.back),
            Expr::Neg(a) => {
                let (lo, hi) = self.iv(a);
                (hi.saturating_neg(), lo.saturating_neg())
            }
            Expr::Abs(a) => {
                let (lo, hi) = self.iv(a);
                if lo >= 0 {
                    (lo, hi)
                } else if hi <= 0 {
                    (hi.saturating_neg(), lo.saturating_neg())
                } else {
                    (0, hi.max(lo.saturating_neg()))
                }
            }
            Expr::Rei(c) => match self.tri(c) {
                Some(true) => (1, 1),
                Some(false) => (0, 0),
                None => (0, 1),
            },
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.iv(a), self.iv(b));
                match op {
                    ArithOp::Add => (x.0.saturating_add(y.0), x.1.saturating_add(y.1)),
                    ArithOp::Sub => (x.0.saturating_sub(y.1), x.1.saturating_sub(y.0)),
                    ArithOp::Mul => corners(x, y, |p, q| p.saturating_mul(q)),
                    ArithOp::Div if y.0 <= 0 && y.1 >= 0 => TOP,
                    ArithOp::Div => corners(x, y, |p, q| p.checked_div(q).unwrap_or(i128::MAX)),
                    ArithOp::Mod if y.0 <= 0 && y.1 >= 0 => TOP,
                    ArithOp::Mod => {
                        let m = y.0.saturating_abs().max(y.1.saturating_abs()) - 1;
                        if x.0 >= 0 {
                            (0, x.1.min(m))
                        } else if x.1 <= 0 {
                            (x.0.max(-m), 0)
                        } else {
                            (-m, m)
                        }
                    }
                }
            }
        }
    }

    fn tri(&self, c: &Cons) -> Option<bool> {
        match c {
            Constraint::True => Some(true),
            Constraint::False => Some(false),
            Constraint::Cmp(op, a, b) => cmp3(*op, self.iv(a), self.iv(b)),
            Constraint::And(cs) => {
                let mut all = true;
                for c in cs {
                    match self.tri(c) {
                        Some(false) => return Some(false),
                        None => all = false,
                        Some(true) => {}
                    }
                }
                all.then_some(true)
            }
            Constraint::Or(cs) => {
                let mut none = true;
                for c in cs {
                    match self.tri(c) {
                        Some(true) => return Some(true),
                        None => none = false,
                        Some(false) => {}
                    }
                }
                if none {
                    Some(false)
                } else {
                    None
                }
            }
            Constraint::Not(c) => self.tri(c).map(|b| !b),
        }
    }

    /// Bounds on `f` implied by top-level conjuncts, plus excluded points.
    fn bounds(&self, f: FluentId) -> (i128, i128, Vec<i128>) {
        let d = self.sig.domain(f);
        let (mut lo, mut hi) = (d.min() as i128, d.max() as i128);
        let mut excluded = Vec::new();
        for c in &self.conjuncts {
            let Constraint::Cmp(op, a, b) = c else { continue };
            let (op, other) = if is_var(a, f) {
                (*op, b)
            } else if is_var(b, f) {
                (op.flip(), a)
            } else {
                continue;
            };
            let (elo, ehi) = self.iv(other);
            match op {
                CmpOp::Eq => {
                    lo = lo.max(elo);
                    hi = hi.min(ehi);
                }
                CmpOp::Le => hi = hi.min(ehi),
                CmpOp::Lt => hi = hi.min(ehi.saturating_sub(1)),
                CmpOp::Ge => lo = lo.max(elo),
                CmpOp::Gt => lo = lo.max(elo.saturating_add(1)),
                CmpOp::Ne if elo == ehi => excluded.push(elo),
                CmpOp::Ne => {}
            }
        }
        (lo, hi, excluded)
    }

    fn exact(&mut self) -> bool {
        self.scratch.clone_from(self.seq.last().unwrap());
        for &f in &self.vars {
            self.scratch[f] = self.assigned[f].unwrap();
        }
        let tl = Timeline::extended(self.seq, &self.scratch);
        tl.holds(tl.last(), self.c).unwrap_or(false)
    }

    /// Forward check: every unassigned variable still has a candidate value.
    fn feasible(&self, k: usize) -> bool {
        self.vars[k..].iter().all(|&f| {
            let (lo, hi, excluded) = self.bounds(f);
            lo <= hi && {
                let lo = lo.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
                let hi = hi.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
                self.sig.domain(f).values_within(lo, hi).any(|v| !excluded.contains(&(v as i128)))
            }
        })
    }

    fn dfs(&mut self, k: usize) -> bool {
        if k == self.vars.len() {
            return self.exact();
        }
        if !self.feasible(k) {
            return false;
        }
        let f = self.vars[k];
        let (lo, hi, excluded) = self.bounds(f);
        if lo > hi {
            return false;
        }
        let lo = lo.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
        let hi = hi.clamp(i64::MIN as i128, i64::MAX as i128) as i64;
        let values: Vec<i64> = self.sig.domain(f).values_within(lo, hi).collect();
        for v in values {
            if excluded.contains(&(v as i128)) {
                continue;
            }
            self.assigned[f] = Some(v);
            if self.conjuncts.iter().all(|c| self.tri(c) != Some(false)) && self.dfs(k + 1) {
                return true;
            }
        }
        self.assigned[f] = None;
        false
    }
}

fn is_var(e: &FExpr, f: FluentId) -> bool {
    e.as_timeless_fluent() == Some(&f)
}

fn corners(x: Iv, y: Iv, op: impl Fn(i128, i128) -> i128) -> Iv {
    let c = [op(x.0, y.0), op(x.0, y.1), op(x.1, y.0), op(x.1, y.1)];
    (*c.iter().min().unwrap(), *c.iter().max().unwrap())
}

fn cmp3(op: CmpOp, a: Iv, b: Iv) -> Option<bool> {
    let point_eq = a.0 == a.1 && b.0 == b.1 && a.0 == b.0;
    let disjoint = a.1 < b.0 || b.1 < a.0;
    match op {
        CmpOp::Eq if point_eq => Some(true),
        CmpOp::Eq if disjoint => Some(false),
        CmpOp::Ne if point_eq => Some(false),
        CmpOp::Ne if disjoint => Some(true),
        CmpOp::Eq | CmpOp::Ne => None,
        CmpOp::Lt if a.1 < b.0 => Some(true),
        CmpOp::Lt if a.0 >= b.1 => Some(false),
        CmpOp::Le if a.1 <= b.0 => Some(true),
        CmpOp::Le if a.0 > b.1 => Some(false),
        CmpOp::Lt | CmpOp::Le => None,
        CmpOp::Gt | CmpOp::Ge => cmp3(op.flip(), b, a),
    }
}

/// Finds the lexicographically smallest assignment to the timeless fluents
/// of `c` that, appended to `seq`, makes `c` hold at the new time index.
pub fn solve_effects(sig: &Signature, seq: &[State], c: &Cons) -> Option<Assignment> {
    assert!(!seq.is_empty());
    let vars: Vec<FluentId> = c.fluents().into_iter().collect();
    let mut s = Search {
        sig,
        seq,
        c,
        conjuncts: c.conjuncts(),
        vars,
        assigned: vec![None; sig.len()],
        scratch: Vec::new(),
    };
    if s.conjuncts.iter().any(|c| s.tri(c) == Some(false)) || !s.dfs(0) {
        return None;
    }
    Some(s.vars.iter().map(|&f| (f, s.assigned[f].unwrap())).collect())
}

/// Exhaustive enumeration over the product of the domains, in the same
/// lexicographic order. Used as a reference for [`solve_effects`].
pub fn solve_exhaustive(sig: &Signature, seq: &[State], c: &Cons) -> Option<Assignment> {
    let vars: Vec<FluentId> = c.fluents().into_iter().collect();
    let domains: Vec<Vec<i64>> = vars.iter().map(|&f| sig.domain(f).values().collect()).collect();
    let mut idx = vec![0usize; vars.len()];
    let mut top = seq.last().unwrap().clone();
    loop {
        for (k, &f) in vars.iter().enumerate() {
            top[f] = domains[k][idx[k]];
        }
        let tl = Timeline::extended(seq, &top);
        if tl.holds(tl.last(), c).unwrap_or(false) {
            return Some(vars.iter().map(|&f| (f, top[f])).collect());
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Completes a partial assignment by inertia from `last`.
pub fn inertial_complete(sigma: &[(FluentId, i64)], last: &[i64]) -> State {
    let mut next = last.to_vec();
    for &(f, v) in sigma {
        next[f] = v;
    }
    next
}
