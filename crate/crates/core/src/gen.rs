//! Seeded random generators for object-language programs, arithmetic
//! expressions and unit/product terms.
//!
//! Programs are closed and mostly well-typed: integer-valued expressions
//! are built from integer, function and list sub-expressions in scope, and
//! recursion only appears as a counter that decreases to 0, so almost
//! every program terminates quickly. A small fraction of sub-expressions
//! is deliberately ill-typed so that stuck programs are exercised too.

use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::AExp;
use crate::nbe::MonTerm;
use crate::syntax::{Name, Term};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Hierarchy level; operator indices are drawn from `1..=n`.
    pub n: usize,
    pub depth: u32,
    /// Probability of replacing a sub-expression by an ill-typed one.
    pub ill_typed: f64,
    /// Whether captured continuations may be applied.
    pub resume: bool,
}

impl GenConfig {
    pub fn new(n: usize) -> Self {
        GenConfig {
            n,
            depth: 5,
            ill_typed: 0.02,
            resume: true,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ty {
    Int,
    Fun,
    List,
}

const NAMES: &[&str] = &["a", "b", "c", "f", "g", "x", "y"];

#[derive(Clone, Default)]
struct Scope(Vec<(Name, Ty)>);

impl Scope {
    fn bind(&self, x: &Name, ty: Ty) -> Scope {
        let mut s: Vec<(Name, Ty)> = self.0.iter().filter(|(y, _)| y != x).cloned().collect();
        s.push((x.clone(), ty));
        Scope(s)
    }

    fn pick(&self, rng: &mut GenRng, ty: Ty) -> Option<Term> {
        let cands: Vec<&Name> = self.0.iter().filter(|(_, t)| *t == ty).map(|(x, _)| x).collect();
        if cands.is_empty() {
            None
        } else {
            Some(Term::Var(cands[rng.random_range(0..cands.len())].clone()))
        }
    }
}

struct Gen<'a> {
    rng: &'a mut GenRng,
    cfg: GenConfig,
    fresh: usize,
}

impl Gen<'_> {
    fn name(&mut self) -> Name {
        Name::new(NAMES[self.rng.random_range(0..NAMES.len())])
    }

    fn cont_name(&mut self) -> Name {
        self.fresh += 1;
        Name::new(&format!("k{}", self.fresh))
    }

    fn level(&mut self) -> usize {
        self.rng.random_range(1..=self.cfg.n)
    }

    fn lit(&mut self) -> Term {
        Term::Lit(self.rng.random_range(-3..10))
    }

    fn ill_typed(&mut self, d: u32, sc: &Scope) -> Term {
        match self.rng.random_range(0..4) {
            0 => Term::succ(self.fun(d, sc)),
            1 => Term::app(self.lit(), self.int(d, sc)),
            2 => {
                let (h, t) = (self.name(), self.name());
                let s2 = sc.bind(&h, Ty::Int).bind(&t, Ty::List);
                let cons = self.int(d, &s2);
                Term::LCase {
                    scrutinee: Rc::new(self.int(d, sc)),
                    nil: Rc::new(self.lit()),
                    head: h,
                    tail: t,
                    cons: Rc::new(cons),
                }
            }
            _ => Term::add(Term::Nil, self.int(d, sc)),
        }
    }

    fn int(&mut self, d: u32, sc: &Scope) -> Term {
        if d == 0 {
            return match sc.pick(self.rng, Ty::Int) {
                Some(v) if self.rng.random_bool(0.6) => v,
                _ => self.lit(),
            };
        }
        if self.rng.random_bool(self.cfg.ill_typed) {
            return self.ill_typed(d - 1, sc);
        }
        let d1 = d - 1;
        match self.rng.random_range(0..24) {
            0 => self.lit(),
            1 | 2 => sc.pick(self.rng, Ty::Int).unwrap_or_else(|| self.lit()),
            3 | 4 => Term::succ(self.int(d1, sc)),
            5 | 6 => Term::add(self.int(d1, sc), self.int(d1, sc)),
            7 => Term::gt(self.int(d1, sc), self.int(d1, sc)),
            8 | 9 => Term::if0(self.int(d1, sc), self.int(d1, sc), self.int(d1, sc)),
            10..=12 => Term::app(self.fun(d1, sc), self.int(d1, sc)),
            13 | 14 => {
                let x = self.name();
                let v = self.int(d1, sc);
                Term::Let(x.clone(), Rc::new(v), Rc::new(self.int(d1, &sc.bind(&x, Ty::Int))))
            }
            15 => {
                let x = self.name();
                let v = self.fun(d1, sc);
                Term::Let(x.clone(), Rc::new(v), Rc::new(self.int(d1, &sc.bind(&x, Ty::Fun))))
            }
            16 | 17 => Term::reset(self.level(), self.int(d1, sc)),
            18..=20 => {
                let i = self.level();
                let k = self.cont_name();
                let body_scope = if self.cfg.resume { sc.bind(&k, Ty::Fun) } else { sc.clone() };
                Term::Shift(i, k, Rc::new(self.int(d1, &body_scope)))
            }
            21 => {
                let (h, t) = (self.name(), self.name());
                let scrutinee = self.list(d1, sc);
                let nil = self.int(d1, sc);
                let cons = self.int(d1, &sc.bind(&h, Ty::Int).bind(&t, Ty::List));
                Term::LCase {
                    scrutinee: Rc::new(scrutinee),
                    nil: Rc::new(nil),
                    head: h,
                    tail: t,
                    cons: Rc::new(cons),
                }
            }
            _ => self.countdown(d1, sc),
        }
    }

    /// `((fix (f x) (if0 x BASE (add STEP (f (add x -1))))) m)` with `m ≥ 0`.
    fn countdown(&mut self, d: u32, sc: &Scope) -> Term {
        let f = Name::new("loop");
        let x = self.name();
        let inner = sc.bind(&x, Ty::Int);
        let base = self.int(d.min(2), &inner);
        let step = self.int(d.min(2), &inner);
        let recur = Term::app(
            Term::Var(f.clone()),
            Term::add(Term::Var(x.clone()), Term::lit(-1)),
        );
        let body = Term::if0(Term::Var(x.clone()), base, Term::add(step, recur));
        let m = self.rng.random_range(0..4);
        Term::app(
            Term::Fix {
                fun: f,
                param: x,
                body: Rc::new(body),
            },
            Term::lit(m),
        )
    }

    fn fun(&mut self, d: u32, sc: &Scope) -> Term {
        if let Some(v) = sc.pick(self.rng, Ty::Fun) {
            if d == 0 || self.rng.random_bool(0.4) {
                return v;
            }
        }
        let x = self.name();
        let body = self.int(d.saturating_sub(1), &sc.bind(&x, Ty::Int));
        Term::Lam(x, Rc::new(body))
    }

    fn list(&mut self, d: u32, sc: &Scope) -> Term {
        if d == 0 {
            return sc.pick(self.rng, Ty::List).unwrap_or(Term::Nil);
        }
        match self.rng.random_range(0..6) {
            0 => Term::Nil,
            1 => sc.pick(self.rng, Ty::List).unwrap_or(Term::Nil),
            2 | 3 => Term::cons(self.int(d - 1, sc), self.list(d - 1, sc)),
            4 => Term::reset(self.level(), self.list(d - 1, sc)),
            _ => {
                let x = self.name();
                let v = self.list(d - 1, sc);
                Term::Let(x.clone(), Rc::new(v), Rc::new(self.list(d - 1, &sc.bind(&x, Ty::List))))
            }
        }
    }
}

/// One closed program.
pub fn program(rng: &mut GenRng, cfg: GenConfig) -> Term {
    let mut g = Gen { rng, cfg, fresh: 0 };
    let sc = Scope::default();
    match g.rng.random_range(0..20) {
        0 | 1 => g.list(cfg.depth, &sc),
        2 => g.fun(cfg.depth, &sc),
        _ => g.int(cfg.depth, &sc),
    }
}

/// `count` programs from `seed`.
pub fn programs(seed: u64, count: usize, cfg: GenConfig) -> Vec<Term> {
    let mut r = rng(seed);
    (0..count).map(|_| program(&mut r, cfg)).collect()
}

/// A random arithmetic expression of at most `depth` nested additions with
/// operands below 1000, so every sum stays far below 2^31.
pub fn aexp(rng: &mut GenRng, depth: u32) -> AExp<u64> {
    if depth == 0 || rng.random_bool(0.3) {
        AExp::Num(rng.random_range(0..1000))
    } else {
        AExp::plus(aexp(rng, depth - 1), aexp(rng, depth - 1))
    }
}

/// A threshold in `0..10` and a list of at most 10 elements in `0..10`,
/// as inputs for the prefix programs.
pub fn prefix_input(rng: &mut GenRng) -> (i64, Vec<i64>) {
    let len = rng.random_range(0..=10);
    let xs = (0..len).map(|_| rng.random_range(0..10)).collect();
    (rng.random_range(0..10), xs)
}

/// A random unit/product term over `vars` variables with indices in `1..=n`.
pub fn mon_term(rng: &mut GenRng, n: usize, vars: usize, depth: u32) -> MonTerm {
    if depth == 0 || rng.random_bool(0.25) {
        if vars > 0 && rng.random_bool(0.7) {
            MonTerm::var(&format!("x{}", rng.random_range(0..vars)))
        } else {
            MonTerm::Unit(rng.random_range(1..=n))
        }
    } else {
        let i = rng.random_range(1..=n);
        MonTerm::prod(i, mon_term(rng, n, vars, depth - 1), mon_term(rng, n, vars, depth - 1))
    }
}
