//! Object-language syntax shared by every backend.
//!
//! Terms are immutable trees with reference-counted children, so cloning a
//! term is cheap and substitution can share every subtree it leaves alone.

mod context;
mod parse;
mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

pub use context::{concat, Frame, Frames, SubstFrame, SubstTower, Tower};
pub use parse::{parse_term, KEYWORDS};
pub use print::{print_frame, print_frames, print_term, print_tower_levels};
pub use subst::{instantiate, substitute, SubstError};

use thiserror::Error;

/// A variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Rc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Rc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type TermRef = Rc<Term>;

/// Terms of the call-by-value λ-calculus with `shift_i`/`reset_i`, plus the
/// list, arithmetic, conditional and recursion constructs the example
/// programs need.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Lit(i64),
    Var(Name),
    Lam(Name, TermRef),
    App(TermRef, TermRef),
    Succ(TermRef),
    Reset(usize, TermRef),
    Shift(usize, Name, TermRef),
    /// A quoted context tower; only produced by shift contraction.
    Captured(Rc<SubstTower>),
    Nil,
    Cons(TermRef, TermRef),
    LCase {
        scrutinee: TermRef,
        nil: TermRef,
        head: Name,
        tail: Name,
        cons: TermRef,
    },
    /// `(if0 t0 t1 t2)` takes `t1` when `t0` is zero.
    If0(TermRef, TermRef, TermRef),
    Let(Name, TermRef, TermRef),
    Fix {
        fun: Name,
        param: Name,
        body: TermRef,
    },
    Add(TermRef, TermRef),
    /// `(gt a b)` is 1 when `a > b` and 0 otherwise.
    Gt(TermRef, TermRef),
}

impl Term {
    pub fn lit(m: i64) -> Term {
        Term::Lit(m)
    }

    pub fn var(x: &str) -> Term {
        Term::Var(Name::new(x))
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::Lam(Name::new(x), Rc::new(body))
    }

    pub fn app(t0: Term, t1: Term) -> Term {
        Term::App(Rc::new(t0), Rc::new(t1))
    }

    pub fn succ(t: Term) -> Term {
        Term::Succ(Rc::new(t))
    }

    pub fn reset(i: usize, t: Term) -> Term {
        Term::Reset(i, Rc::new(t))
    }

    pub fn shift(i: usize, k: &str, t: Term) -> Term {
        Term::Shift(i, Name::new(k), Rc::new(t))
    }

    pub fn cons(h: Term, t: Term) -> Term {
        Term::Cons(Rc::new(h), Rc::new(t))
    }

    pub fn lcase(t: Term, nil: Term, head: &str, tail: &str, cons: Term) -> Term {
        Term::LCase {
            scrutinee: Rc::new(t),
            nil: Rc::new(nil),
            head: Name::new(head),
            tail: Name::new(tail),
            cons: Rc::new(cons),
        }
    }

    pub fn if0(t0: Term, t1: Term, t2: Term) -> Term {
        Term::If0(Rc::new(t0), Rc::new(t1), Rc::new(t2))
    }

    pub fn let_(x: &str, t0: Term, t1: Term) -> Term {
        Term::Let(Name::new(x), Rc::new(t0), Rc::new(t1))
    }

    pub fn fix(f: &str, x: &str, body: Term) -> Term {
        Term::Fix {
            fun: Name::new(f),
            param: Name::new(x),
            body: Rc::new(body),
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Rc::new(a), Rc::new(b))
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::Gt(Rc::new(a), Rc::new(b))
    }

    /// Encodes a list of integers as nested `cons` cells.
    pub fn int_list(xs: &[i64]) -> Term {
        xs.iter()
            .rev()
            .fold(Term::Nil, |acc, &x| Term::cons(Term::Lit(x), acc))
    }

    /// Syntactic values: literals, abstractions, recursive functions, lists of
    /// values and captured contexts.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Lit(_) | Term::Lam(..) | Term::Fix { .. } | Term::Nil | Term::Captured(_) => true,
            Term::Cons(h, t) => h.is_value() && t.is_value(),
            _ => false,
        }
    }

    /// Terms that become values in one step once their free variables are
    /// looked up: variables, and anything that would be a value if every
    /// variable were.
    pub fn is_trivial(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Cons(h, t) => h.is_trivial() && t.is_trivial(),
            other => other.is_value(),
        }
    }

    /// Largest `shift`/`reset` index occurring in the term (0 if none).
    pub fn max_level(&self) -> usize {
        let mut max = 0;
        self.visit(&mut |t| match t {
            Term::Reset(i, _) | Term::Shift(i, _, _) => max = max.max(*i),
            Term::Captured(tower) => max = max.max(tower.height()),
            _ => {}
        });
        max
    }

    /// Smallest `shift`/`reset` index occurring in the term, if any.
    pub fn min_level(&self) -> Option<usize> {
        let mut min: Option<usize> = None;
        self.visit(&mut |t| {
            if let Term::Reset(i, _) | Term::Shift(i, _, _) = t {
                min = Some(min.map_or(*i, |m| m.min(*i)));
            }
        });
        min
    }

    pub fn has_control(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t, Term::Reset(..) | Term::Shift(..) | Term::Captured(_)) {
                found = true;
            }
        });
        found
    }

    pub fn contains_captured(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t, Term::Captured(_)) {
                found = true;
            }
        });
        found
    }

    /// Number of nodes, not descending into captured contexts.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Pre-order traversal of the term's own nodes (captured towers are
    /// visited as single nodes).
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Lit(_) | Term::Var(_) | Term::Nil | Term::Captured(_) => {}
            Term::Lam(_, b) | Term::Succ(b) | Term::Reset(_, b) | Term::Shift(_, _, b) => b.visit(f),
            Term::Fix { body, .. } => body.visit(f),
            Term::App(a, b) | Term::Cons(a, b) | Term::Add(a, b) | Term::Gt(a, b) | Term::Let(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::If0(a, b, c) => {
                a.visit(f);
                b.visit(f);
                c.visit(f);
            }
            Term::LCase {
                scrutinee, nil, cons, ..
            } => {
                scrutinee.visit(f);
                nil.visit(f);
                cons.visit(f);
            }
        }
    }

    /// Decodes a value built from `cons`, `nil` and literals into nested
    /// integer lists, if it has that shape.
    pub fn as_int_list(&self) -> Option<Vec<i64>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Nil => return Some(out),
                Term::Cons(h, t) => {
                    match **h {
                        Term::Lit(m) => out.push(m),
                        _ => return None,
                    }
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn as_int_list_list(&self) -> Option<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Nil => return Some(out),
                Term::Cons(h, t) => {
                    out.push(h.as_int_list()?);
                    cur = t;
                }
                _ => return None,
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

/// Free variables of a term. Binders: `lambda`, `shift` (its continuation
/// variable), `lcase` (head and tail in the cons branch), `let` and `fix`.
pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Lit(_) | Term::Nil => {}
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, b) | Term::Shift(_, x, b) => under(bound, &[x], |bound| collect_free(b, bound, out)),
        Term::Fix { fun, param, body } => under(bound, &[fun, param], |bound| collect_free(body, bound, out)),
        Term::Succ(b) | Term::Reset(_, b) => collect_free(b, bound, out),
        Term::App(a, b) | Term::Cons(a, b) | Term::Add(a, b) | Term::Gt(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Let(x, a, b) => {
            collect_free(a, bound, out);
            under(bound, &[x], |bound| collect_free(b, bound, out));
        }
        Term::If0(a, b, c) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
            collect_free(c, bound, out);
        }
        Term::LCase {
            scrutinee,
            nil,
            head,
            tail,
            cons,
        } => {
            collect_free(scrutinee, bound, out);
            collect_free(nil, bound, out);
            under(bound, &[head, tail], |bound| collect_free(cons, bound, out));
        }
        Term::Captured(tower) => tower.collect_free(bound, out),
    }
}

fn under<R>(bound: &mut Vec<Name>, names: &[&Name], f: impl FnOnce(&mut Vec<Name>) -> R) -> R {
    let mark = bound.len();
    bound.extend(names.iter().map(|n| (*n).clone()));
    let r = f(bound);
    bound.truncate(mark);
    r
}

/// Alpha-equivalence: equal up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha(a, b, &mut Vec::new())
}

fn alpha(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    fn bind<R>(env: &mut Vec<(Name, Name)>, pairs: &[(&Name, &Name)], f: impl FnOnce(&mut Vec<(Name, Name)>) -> R) -> R {
        let mark = env.len();
        env.extend(pairs.iter().map(|(x, y)| ((*x).clone(), (*y).clone())));
        let r = f(env);
        env.truncate(mark);
        r
    }
    match (a, b) {
        (Term::Lit(m), Term::Lit(n)) => m == n,
        (Term::Nil, Term::Nil) => true,
        (Term::Var(x), Term::Var(y)) => {
            // innermost binding wins on either side
            let lx = env.iter().rposition(|(l, _)| l == x);
            let ry = env.iter().rposition(|(_, r)| r == y);
            match (lx, ry) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Lam(x, s), Term::Lam(y, t)) => bind(env, &[(x, y)], |env| alpha(s, t, env)),
        (Term::Shift(i, x, s), Term::Shift(j, y, t)) => i == j && bind(env, &[(x, y)], |env| alpha(s, t, env)),
        (
            Term::Fix {
                fun: f1,
                param: x1,
                body: b1,
            },
            Term::Fix {
                fun: f2,
                param: x2,
                body: b2,
            },
        ) => bind(env, &[(f1, f2), (x1, x2)], |env| alpha(b1, b2, env)),
        (Term::Succ(s), Term::Succ(t)) => alpha(s, t, env),
        (Term::Reset(i, s), Term::Reset(j, t)) => i == j && alpha(s, t, env),
        (Term::App(a0, a1), Term::App(b0, b1))
        | (Term::Cons(a0, a1), Term::Cons(b0, b1))
        | (Term::Add(a0, a1), Term::Add(b0, b1))
        | (Term::Gt(a0, a1), Term::Gt(b0, b1)) => alpha(a0, b0, env) && alpha(a1, b1, env),
        (Term::Let(x, a0, a1), Term::Let(y, b0, b1)) => {
            alpha(a0, b0, env) && bind(env, &[(x, y)], |env| alpha(a1, b1, env))
        }
        (Term::If0(a0, a1, a2), Term::If0(b0, b1, b2)) => {
            alpha(a0, b0, env) && alpha(a1, b1, env) && alpha(a2, b2, env)
        }
        (
            Term::LCase {
                scrutinee: s1,
                nil: n1,
                head: h1,
                tail: t1,
                cons: c1,
            },
            Term::LCase {
                scrutinee: s2,
                nil: n2,
                head: h2,
                tail: t2,
                cons: c2,
            },
        ) => alpha(s1, s2, env) && alpha(n1, n2, env) && bind(env, &[(h1, h2), (t1, t2)], |env| alpha(c1, c2, env)),
        // captured contexts only ever hold closed terms
        (Term::Captured(x), Term::Captured(y)) => x == y,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("free variable `{0}` in program")]
    FreeVariable(Name),
    #[error("operator index {index} exceeds hierarchy level {level}")]
    LevelTooHigh { index: usize, level: usize },
    #[error("hierarchy level must be at least 1")]
    LevelZero,
    #[error("operator index must be at least 1")]
    IndexZero,
    #[error("programs may not contain captured contexts")]
    CapturedInProgram,
}

/// Checks that `t` is a closed program whose operator indices fit level `n`.
pub fn validate_program(t: &Term, n: usize) -> Result<(), ValidationError> {
    if n == 0 {
        return Err(ValidationError::LevelZero);
    }
    if let Some(x) = free_vars(t).into_iter().next() {
        return Err(ValidationError::FreeVariable(x));
    }
    if t.contains_captured() {
        return Err(ValidationError::CapturedInProgram);
    }
    if t.min_level() == Some(0) {
        return Err(ValidationError::IndexZero);
    }
    let index = t.max_level();
    if index > n {
        return Err(ValidationError::LevelTooHigh { index, level: n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> BTreeSet<Name> {
        xs.iter().map(|x| Name::new(x)).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(free_vars(&Term::var("x")), names(&["x"]));
        assert_eq!(free_vars(&Term::lam("x", Term::var("x"))), names(&[]));
        let t = Term::shift(1, "k", Term::app(Term::var("k"), Term::var("y")));
        assert_eq!(free_vars(&t), names(&["y"]));
    }

    #[test]
    fn free_vars_of_extended_binders() {
        let t = Term::lcase(
            Term::var("xs"),
            Term::var("h"),
            "h",
            "t",
            Term::cons(Term::var("h"), Term::var("t")),
        );
        assert_eq!(free_vars(&t), names(&["h", "xs"]));
        let t = Term::let_("x", Term::var("x"), Term::var("x"));
        assert_eq!(free_vars(&t), names(&["x"]));
        let t = Term::fix("f", "n", Term::app(Term::var("f"), Term::var("m")));
        assert_eq!(free_vars(&t), names(&["m"]));
    }

    #[test]
    fn values_and_trivial_terms() {
        assert!(Term::int_list(&[1, 2]).is_value());
        assert!(!Term::cons(Term::var("x"), Term::Nil).is_value());
        assert!(Term::cons(Term::var("x"), Term::Nil).is_trivial());
        assert!(!Term::succ(Term::lit(0)).is_trivial());
    }

    #[test]
    fn alpha_equivalence_respects_binding_structure() {
        let a = Term::lam("x", Term::lam("y", Term::var("x")));
        let b = Term::lam("p", Term::lam("q", Term::var("p")));
        let c = Term::lam("p", Term::lam("q", Term::var("q")));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq(&a, &c));
        assert!(!alpha_eq(&Term::var("x"), &Term::var("y")));
        // shadowing
        let d = Term::lam("x", Term::lam("x", Term::var("x")));
        let e = Term::lam("a", Term::lam("b", Term::var("b")));
        assert!(alpha_eq(&d, &e));
    }

    #[test]
    fn validation() {
        assert!(validate_program(&Term::reset(2, Term::lit(1)), 2).is_ok());
        assert_eq!(
            validate_program(&Term::reset(3, Term::lit(1)), 2),
            Err(ValidationError::LevelTooHigh { index: 3, level: 2 })
        );
        assert_eq!(
            validate_program(&Term::var("z"), 1),
            Err(ValidationError::FreeVariable(Name::new("z")))
        );
        assert_eq!(validate_program(&Term::lit(1), 0), Err(ValidationError::LevelZero));
    }

    #[test]
    fn int_list_round_trip() {
        let t = Term::int_list(&[0, 3]);
        assert_eq!(t.as_int_list(), Some(vec![0, 3]));
        let nested = Term::cons(t.clone(), Term::cons(Term::int_list(&[]), Term::Nil));
        assert_eq!(nested.as_int_list_list(), Some(vec![vec![0, 3], vec![]]));
    }
}
