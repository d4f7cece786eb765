//! Normalization by evaluation for a hierarchy of units and products.
//!
//! Source terms are `x`, `ε_i` and `t ⋆_i t'` for `1 ≤ i ≤ n`. Every product
//! is associative, `ε_i` is neutral for `⋆_i` and absorbant for the other
//! products, and products distribute over each other. Normal forms are
//! layered lists:
//!
//! ```text
//! t̂_i ::= ε_i | t̂_{i-1} ⋆_i t̂_i      t̂_0 ::= x
//! ```
//!
//! At `n = 1` this is the free monoid and at `n = 2` it is propositional
//! logic in disjunctive normal form (`⊤ = ε_1`, `∧ = ⋆_1`, `⊥ = ε_2`,
//! `∨ = ⋆_2`). The normalizers are written in continuation-passing style
//! in the host language: `n - 1` continuations and one accumulator.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use crate::sexpr::{self, SExpr, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MonTerm {
    Var(Rc<str>),
    Unit(usize),
    Prod(usize, Rc<MonTerm>, Rc<MonTerm>),
}

impl MonTerm {
    pub fn var(x: &str) -> MonTerm {
        MonTerm::Var(x.into())
    }

    pub fn prod(i: usize, a: MonTerm, b: MonTerm) -> MonTerm {
        MonTerm::Prod(i, Rc::new(a), Rc::new(b))
    }

    /// Largest unit or product index, 0 for a variable.
    pub fn max_index(&self) -> usize {
        match self {
            MonTerm::Var(_) => 0,
            MonTerm::Unit(i) => *i,
            MonTerm::Prod(i, a, b) => (*i).max(a.max_index()).max(b.max_index()),
        }
    }

    pub fn vars(&self) -> BTreeSet<Rc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Rc<str>>) {
        match self {
            MonTerm::Var(x) => {
                out.insert(x.clone());
            }
            MonTerm::Unit(_) => {}
            MonTerm::Prod(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

impl fmt::Display for MonTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonTerm::Var(x) => write!(f, "{x}"),
            MonTerm::Unit(i) => write!(f, "(unit {i})"),
            MonTerm::Prod(i, a, b) => write!(f, "(prod {i} {a} {b})"),
        }
    }
}

/// A normal form. The level of a node is implicit: a `Prod(i, ..)` or
/// `Unit(i)` is at level `i`, a variable at level 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Nf {
    Var(Rc<str>),
    Unit(usize),
    Prod(usize, Rc<Nf>, Rc<Nf>),
}

impl Nf {
    pub fn size(&self) -> usize {
        match self {
            Nf::Var(_) | Nf::Unit(_) => 1,
            Nf::Prod(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

thread_local! {
    static ALLOCATED: Cell<u64> = const { Cell::new(0) };
}

/// Number of normal-form nodes built on this thread so far.
pub fn allocations() -> u64 {
    ALLOCATED.with(|c| c.get())
}

fn alloc(n: Nf) -> Rc<Nf> {
    ALLOCATED.with(|c| c.set(c.get() + 1));
    Rc::new(n)
}

fn nf_unit(i: usize) -> Rc<Nf> {
    alloc(Nf::Unit(i))
}

fn nf_prod(i: usize, a: Rc<Nf>, b: Rc<Nf>) -> Rc<Nf> {
    alloc(Nf::Prod(i, a, b))
}

fn nf_var(x: &Rc<str>) -> Rc<Nf> {
    alloc(Nf::Var(x.clone()))
}

impl fmt::Display for Nf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", embed(self))
    }
}

/// Erases the normal-form markers.
pub fn embed(u: &Nf) -> MonTerm {
    match u {
        Nf::Var(x) => MonTerm::Var(x.clone()),
        Nf::Unit(i) => MonTerm::Unit(*i),
        Nf::Prod(i, a, b) => MonTerm::prod(*i, embed(a), embed(b)),
    }
}

/// Level-wise normal-form transformer `t̂_i → t̂_i`.
type Tr = Rc<dyn Fn(Rc<Nf>) -> Rc<Nf>>;

fn identity() -> Tr {
    Rc::new(|c| c)
}

fn compose(f: Tr, g: Tr) -> Tr {
    Rc::new(move |c| f(g(c)))
}

fn prepend(i: usize, x: Rc<Nf>) -> Tr {
    Rc::new(move |c| nf_prod(i, x.clone(), c))
}

// -- free monoid ------------------------------------------------------------

fn eval_monoid(t: &MonTerm) -> Tr {
    match t {
        MonTerm::Var(x) => prepend(1, nf_var(x)),
        MonTerm::Unit(_) => identity(),
        MonTerm::Prod(_, a, b) => compose(eval_monoid(a), eval_monoid(b)),
    }
}

/// `reify (eval t)` with `reify v = v ε`. Indices are ignored.
pub fn normalize_monoid(t: &MonTerm) -> Rc<Nf> {
    eval_monoid(t)(nf_unit(1))
}

// -- disjunctive normal forms ---------------------------------------------

type DnfK = Rc<dyn Fn(Tr, Rc<Nf>) -> Rc<Nf>>;

fn eval_dnf(t: &Rc<MonTerm>, k: DnfK, d: Rc<Nf>) -> Rc<Nf> {
    match &**t {
        MonTerm::Var(x) => k(prepend(1, nf_var(x)), d),
        MonTerm::Unit(1) => k(identity(), d),
        MonTerm::Unit(_) => d,
        MonTerm::Prod(1, a, b) => {
            let b = b.clone();
            eval_dnf(
                a,
                Rc::new(move |f1, d| {
                    let k = k.clone();
                    eval_dnf(&b, Rc::new(move |f1b, d| k(compose(f1.clone(), f1b), d)), d)
                }),
                d,
            )
        }
        MonTerm::Prod(_, a, b) => {
            let d = eval_dnf(b, k.clone(), d);
            eval_dnf(a, k, d)
        }
    }
}

/// Disjunctive normal form of a term over `⊤, ∧, ⊥, ∨`.
pub fn normalize_dnf(t: &MonTerm) -> Rc<Nf> {
    let k: DnfK = Rc::new(|f1, d| nf_prod(2, f1(nf_unit(1)), d));
    eval_dnf(&Rc::new(t.clone()), k, nf_unit(2))
}

// -- level n -----------------------------------------------------------------

/// Continuation `k_i`: receives a level-`i` transformer, the continuations
/// `k_{i+1} … k_{n-1}` in force at the call, and the accumulator.
#[derive(Clone)]
struct K(Rc<dyn Fn(Tr, &[K], Rc<Nf>) -> Rc<Nf>>);

/// Passes `f` to the first of `ks`, or applies it to the accumulator when
/// there is none left.
fn call(ks: &[K], f: Tr, acc: Rc<Nf>) -> Rc<Nf> {
    match ks.split_first() {
        Some((k, rest)) => (k.0)(f, rest, acc),
        None => f(acc),
    }
}

fn eval_hier(t: &Rc<MonTerm>, n: usize, ks: &[K], acc: Rc<Nf>) -> Rc<Nf> {
    debug_assert_eq!(ks.len(), n - 1);
    match &**t {
        MonTerm::Var(x) => call(ks, prepend(1, nf_var(x)), acc),
        // discard k_1 … k_{i-1}
        MonTerm::Unit(i) => call(&ks[i - 1..], identity(), acc),
        MonTerm::Prod(i, a, b) if *i == n => {
            let acc = eval_hier(b, n, ks, acc);
            eval_hier(a, n, ks, acc)
        }
        MonTerm::Prod(i, a, b) => {
            let i = *i;
            let lower: Vec<K> = ks[..i - 1].to_vec();
            let ki = ks[i - 1].clone();
            let b = b.clone();
            let outer = K(Rc::new(move |f, rest: &[K], acc| {
                let ki = ki.clone();
                let f = f.clone();
                let inner = K(Rc::new(move |g, rest: &[K], acc| (ki.0)(compose(f.clone(), g), rest, acc)));
                let mut ks2 = lower.clone();
                ks2.push(inner);
                ks2.extend_from_slice(rest);
                eval_hier(&b, n, &ks2, acc)
            }));
            let mut ks1 = ks[..i - 1].to_vec();
            ks1.push(outer);
            ks1.extend_from_slice(&ks[i..]);
            eval_hier(a, n, &ks1, acc)
        }
    }
}

/// The initial continuation `k_i` of `reify_0`.
fn reify_k(i: usize) -> K {
    K(Rc::new(move |f, rest: &[K], acc| {
        let lowered = f(nf_unit(i));
        call(rest, prepend(i + 1, lowered), acc)
    }))
}

/// Level-`n` normal form. Indices above `n` are a caller error.
pub fn normalize_hier(t: &MonTerm, n: usize) -> Rc<Nf> {
    assert!(n >= 1, "level must be at least 1");
    assert!(t.max_index() <= n, "index {} exceeds level {n}", t.max_index());
    let ks: Vec<K> = (1..n).map(reify_k).collect();
    eval_hier(&Rc::new(t.clone()), n, &ks, nf_unit(n))
}

// -- oracles -----------------------------------------------------------------

/// The variables of `t`, left to right.
pub fn oracle_flatten(t: &MonTerm) -> Vec<Rc<str>> {
    fn go(t: &MonTerm, out: &mut Vec<Rc<str>>) {
        match t {
            MonTerm::Var(x) => out.push(x.clone()),
            MonTerm::Unit(_) => {}
            MonTerm::Prod(_, a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// The variables of a level-1 normal form, left to right.
pub fn nf_vars(u: &Nf) -> Vec<Rc<str>> {
    oracle_flatten(&embed(u))
}

fn truth(t: &MonTerm, env: &dyn Fn(&str) -> bool) -> bool {
    match t {
        MonTerm::Var(x) => env(x),
        MonTerm::Unit(1) => true,
        MonTerm::Unit(_) => false,
        MonTerm::Prod(1, a, b) => truth(a, env) && truth(b, env),
        MonTerm::Prod(_, a, b) => truth(a, env) || truth(b, env),
    }
}

/// True when `t` and `u` denote the same boolean function of `vars`.
pub fn oracle_truth_equiv(t: &MonTerm, u: &Nf, vars: &[Rc<str>]) -> bool {
    assert!(vars.len() <= 16, "too many variables for a truth table");
    let u = embed(u);
    (0u32..1 << vars.len()).all(|bits| {
        let env = |x: &str| {
            let k = vars.iter().position(|v| &**v == x).expect("variable not listed");
            bits >> k & 1 == 1
        };
        truth(t, &env) == truth(&u, &env)
    })
}

/// Conformance to the level-`n` normal-form grammar.
pub fn grammar_check_nf(u: &Nf, n: usize) -> bool {
    fn at(u: &Nf, level: usize) -> bool {
        match u {
            Nf::Var(_) => level == 0,
            Nf::Unit(i) => *i == level && level > 0,
            Nf::Prod(i, a, b) => *i == level && level > 0 && at(a, level - 1) && at(b, level),
        }
    }
    at(u, n)
}

// -- concrete syntax ---------------------------------------------------------

/// Reads `NAME`, `(unit i)` or `(prod i t t)`.
pub fn parse_mon(text: &str) -> Result<MonTerm, SyntaxError> {
    from_sexpr(&sexpr::read_one(text)?)
}

fn index(e: &SExpr) -> Result<usize, SyntaxError> {
    match e {
        SExpr::Atom(s, pos) => match s.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i),
            _ => Err(SyntaxError::new(*pos, format!("expected an index ≥ 1, found `{s}`"))),
        },
        other => Err(SyntaxError::new(other.pos(), "expected an index")),
    }
}

fn from_sexpr(e: &SExpr) -> Result<MonTerm, SyntaxError> {
    match e {
        SExpr::Atom(s, pos) => {
            if s == "unit" || s == "prod" || sexpr::atom_int(s).is_some() {
                Err(SyntaxError::new(*pos, format!("`{s}` is not a variable name")))
            } else {
                Ok(MonTerm::var(s))
            }
        }
        SExpr::List(items, pos) => match items.as_slice() {
            [SExpr::Atom(h, _), i] if h == "unit" => Ok(MonTerm::Unit(index(i)?)),
            [SExpr::Atom(h, _), i, a, b] if h == "prod" => Ok(MonTerm::prod(index(i)?, from_sexpr(a)?, from_sexpr(b)?)),
            _ => Err(SyntaxError::new(*pos, "expected (unit i) or (prod i t t)")),
        },
    }
}
