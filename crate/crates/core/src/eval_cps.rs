//! The definitional evaluator for the CPS hierarchy at level `n`: `eval`
//! takes a term, an environment and `n + 1` continuations `k_1 .. k_{n+1}`.
//!
//! Continuation `k_i` receives a value together with the outer continuations
//! `k_{i+1} .. k_{n+1}`. Functions receive an argument together with the full
//! sequence `k_1 .. k_{n+1}`. Every continuation call goes through a
//! trampoline, so the host stack stays bounded by the nesting depth of the
//! program text.

use std::cell::Cell;
use std::rc::Rc;

use crate::outcome::{Observable, Outcome, Run, Stuck, StuckKind};
use crate::syntax::{Name, Term, TermRef};

/// A continuation `k_i`: value and `[k_{i+1}, …, k_{n+1}]` to answer.
#[derive(Clone)]
pub struct Cont(Rc<dyn Fn(&Runtime, HostValue, Vec<Cont>) -> Bounce>);

impl Cont {
    fn new(f: impl Fn(&Runtime, HostValue, Vec<Cont>) -> Bounce + 'static) -> Cont {
        Cont(Rc::new(f))
    }
}

/// A function value: argument and `[k_1, …, k_{n+1}]` to answer.
pub type HostFn = Rc<dyn Fn(&Runtime, HostValue, Vec<Cont>) -> Bounce>;

#[derive(Clone)]
pub enum HostValue {
    Int(i64),
    Fun(HostFn),
    Nil,
    Pair(Rc<HostValue>, Rc<HostValue>),
}

impl HostValue {
    pub fn observe(&self) -> Observable {
        match self {
            HostValue::Int(m) => Observable::Int(*m),
            HostValue::Fun(_) => Observable::Function,
            HostValue::Nil => Observable::Nil,
            HostValue::Pair(h, t) => Observable::Cons(Box::new(h.observe()), Box::new(t.observe())),
        }
    }

    fn describe(&self) -> String {
        match self {
            HostValue::Fun(_) => "<function>".to_string(),
            other => other.observe().to_string(),
        }
    }
}

impl std::fmt::Debug for HostValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Halt {
    Stuck(Stuck),
    Timeout,
}

pub type Answer = Result<HostValue, Halt>;

pub enum Bounce {
    Done(Answer),
    More(Box<dyn FnOnce(&Runtime) -> Bounce>),
}

fn call(k: &Cont, v: HostValue, rest: Vec<Cont>) -> Bounce {
    let k = k.clone();
    Bounce::More(Box::new(move |rt| (k.0)(rt, v, rest)))
}

/// Applies `ks[0]` to `v` and `ks[1..]`.
fn ret(ks: &[Cont], v: HostValue) -> Bounce {
    call(&ks[0], v, ks[1..].to_vec())
}

fn stuck(kind: StuckKind, detail: impl Into<String>) -> Bounce {
    Bounce::Done(Err(Halt::Stuck(Stuck::new(kind, detail))))
}

#[derive(Clone)]
enum Env {
    Empty,
    Bind(Rc<(Name, HostValue, Env)>),
}

impl Env {
    fn extend(&self, x: &Name, v: HostValue) -> Env {
        Env::Bind(Rc::new((x.clone(), v, self.clone())))
    }

    fn lookup(&self, x: &Name) -> Option<HostValue> {
        let mut cur = self;
        while let Env::Bind(b) = cur {
            if b.0 == *x {
                return Some(b.1.clone());
            }
            cur = &b.2;
        }
        None
    }
}

/// Per-run state: the level, the fuel budget and the initial continuations.
pub struct Runtime {
    n: usize,
    fuel: u64,
    used: Cell<u64>,
    thetas: Vec<Cont>,
    watch_passive: bool,
    passive_ok: Cell<bool>,
}

impl Runtime {
    fn new(n: usize, fuel: u64, watch_passive: bool) -> Self {
        // θ_i passes its value to k_{i+1}; θ_{n+1} is the final answer
        let mut thetas: Vec<Cont> = (1..=n)
            .map(|_| Cont::new(|_, v, rest| ret(&rest, v)))
            .collect();
        thetas.push(Cont::new(|_, v, _| Bounce::Done(Ok(v))));
        Runtime {
            n,
            fuel,
            used: Cell::new(0),
            thetas,
            watch_passive,
            passive_ok: Cell::new(true),
        }
    }

    pub fn level(&self) -> usize {
        self.n
    }

    fn check_passive(&self, ks: &[Cont]) {
        let same = |a: &Cont, b: &Cont| std::ptr::addr_eq(Rc::as_ptr(&a.0), Rc::as_ptr(&b.0));
        if !ks[1..].iter().zip(&self.thetas[1..]).all(|(a, b)| same(a, b)) {
            self.passive_ok.set(false);
        }
    }
}

fn int_of(v: &HostValue) -> Option<i64> {
    match v {
        HostValue::Int(m) => Some(*m),
        _ => None,
    }
}

fn make_fix(f: Name, x: Name, body: TermRef, env: Env) -> HostValue {
    let fun: HostFn = Rc::new(move |rt, v, ks| {
        let me = make_fix(f.clone(), x.clone(), body.clone(), env.clone());
        eval(rt, &body, &env.extend(&f, me).extend(&x, v), ks)
    });
    HostValue::Fun(fun)
}

/// Evaluates two operands left to right and hands both values to `finish`
/// together with the continuations in effect after the second one.
fn eval2(
    rt: &Runtime,
    t0: &TermRef,
    t1: &TermRef,
    env: &Env,
    ks: Vec<Cont>,
    finish: impl Fn(HostValue, HostValue, Vec<Cont>) -> Bounce + 'static,
) -> Bounce {
    let k1 = ks[0].clone();
    let (t1, env2) = (t1.clone(), env.clone());
    let finish = Rc::new(finish);
    let first: Cont = Cont::new(move |rt, v0, rest| {
        let finish = finish.clone();
        let k1 = k1.clone();
        let second: Cont = Cont::new(move |_, v1, rest2| {
            let mut ks = vec![k1.clone()];
            ks.extend(rest2);
            finish(v0.clone(), v1, ks)
        });
        let mut ks = vec![second];
        ks.extend(rest);
        eval(rt, &t1, &env2, ks)
    });
    let mut ks2 = vec![first];
    ks2.extend(ks[1..].iter().cloned());
    eval(rt, t0, env, ks2)
}

/// `eval(t, e, k_1, …, k_{n+1})`; `ks` has length `n + 1`.
fn eval(rt: &Runtime, t: &TermRef, env: &Env, ks: Vec<Cont>) -> Bounce {
    let used = rt.used.get() + 1;
    if used > rt.fuel {
        return Bounce::Done(Err(Halt::Timeout));
    }
    rt.used.set(used);
    if rt.watch_passive {
        rt.check_passive(&ks);
    }
    let n = rt.n;
    match &**t {
        Term::Lit(m) => ret(&ks, HostValue::Int(*m)),
        Term::Nil => ret(&ks, HostValue::Nil),
        Term::Var(x) => match env.lookup(x) {
            Some(v) => ret(&ks, v),
            None => stuck(StuckKind::UnboundVariable, x.as_str()),
        },
        Term::Lam(x, body) => {
            let (x, body, env) = (x.clone(), body.clone(), env.clone());
            let f: HostFn = Rc::new(move |rt, v, ks2| eval(rt, &body, &env.extend(&x, v), ks2));
            ret(&ks, HostValue::Fun(f))
        }
        Term::Fix { fun, param, body } => ret(&ks, make_fix(fun.clone(), param.clone(), body.clone(), env.clone())),
        Term::App(t0, t1) => eval2(rt, t0, t1, env, ks, |f, v, ks2| match f {
            HostValue::Fun(f) => Bounce::More(Box::new(move |rt| f(rt, v, ks2))),
            other => stuck(
                StuckKind::NotAFunction,
                format!("application of {} to {}", other.describe(), v.describe()),
            ),
        }),
        Term::Succ(t0) => {
            let k1 = ks[0].clone();
            let k: Cont = Cont::new(move |_, v, rest| match int_of(&v) {
                Some(m) => call(&k1, HostValue::Int(m.wrapping_add(1)), rest),
                None => stuck(StuckKind::NotAnInteger, format!("succ of {}", v.describe())),
            });
            let mut ks2 = vec![k];
            ks2.extend(ks[1..].iter().cloned());
            eval(rt, t0, env, ks2)
        }
        Term::Reset(i, t0) => {
            let i = *i;
            // k'_{i+1} resumes k_1 with k_2 .. k_{i+1} restored
            let saved: Vec<Cont> = ks[..=i].to_vec();
            let k: Cont = Cont::new(move |_, v, outer| {
                let mut all = saved[1..].to_vec();
                all.extend(outer);
                call(&saved[0], v, all)
            });
            let mut ks2 = rt.thetas[..i].to_vec();
            ks2.push(k);
            ks2.extend(ks[i + 1..].iter().cloned());
            eval(rt, t0, env, ks2)
        }
        Term::Shift(i, kname, t0) => {
            let i = *i;
            let saved: Vec<Cont> = ks[..i].to_vec();
            let c: HostFn = Rc::new(move |_, v, ks_now: Vec<Cont>| {
                let now: Vec<Cont> = ks_now[..=i].to_vec();
                let k: Cont = Cont::new(move |_, v2, outer| {
                    let mut all = now[1..].to_vec();
                    all.extend(outer);
                    call(&now[0], v2, all)
                });
                let mut all = saved[1..].to_vec();
                all.push(k);
                all.extend(ks_now[i + 1..].iter().cloned());
                call(&saved[0], v, all)
            });
            let mut ks2 = rt.thetas[..i].to_vec();
            ks2.extend(ks[i..].iter().cloned());
            debug_assert_eq!(ks2.len(), n + 1);
            eval(rt, t0, &env.extend(kname, HostValue::Fun(c)), ks2)
        }
        Term::Captured(_) => stuck(StuckKind::NotAFunction, "captured context in source program"),
        Term::Cons(t0, t1) => eval2(rt, t0, t1, env, ks, |v0, v1, ks2| {
            ret(&ks2, HostValue::Pair(Rc::new(v0), Rc::new(v1)))
        }),
        Term::Add(t0, t1) => eval2(rt, t0, t1, env, ks, |v0, v1, ks2| match (int_of(&v0), int_of(&v1)) {
            (Some(a), Some(b)) => ret(&ks2, HostValue::Int(a.wrapping_add(b))),
            _ => stuck(
                StuckKind::NotAnInteger,
                format!("add of {} and {}", v0.describe(), v1.describe()),
            ),
        }),
        Term::Gt(t0, t1) => eval2(rt, t0, t1, env, ks, |v0, v1, ks2| match (int_of(&v0), int_of(&v1)) {
            (Some(a), Some(b)) => ret(&ks2, HostValue::Int((a > b) as i64)),
            _ => stuck(
                StuckKind::NotAnInteger,
                format!("gt of {} and {}", v0.describe(), v1.describe()),
            ),
        }),
        Term::If0(t0, t1, t2) => {
            let (k1, t1, t2, env2) = (ks[0].clone(), t1.clone(), t2.clone(), env.clone());
            let k: Cont = Cont::new(move |rt, v, rest| {
                let branch = match int_of(&v) {
                    Some(0) => &t1,
                    Some(_) => &t2,
                    None => return stuck(StuckKind::NotAnInteger, format!("if0 on {}", v.describe())),
                };
                let mut ks = vec![k1.clone()];
                ks.extend(rest);
                eval(rt, branch, &env2, ks)
            });
            let mut ks2 = vec![k];
            ks2.extend(ks[1..].iter().cloned());
            eval(rt, t0, env, ks2)
        }
        Term::LCase {
            scrutinee,
            nil,
            head,
            tail,
            cons,
        } => {
            let (k1, env2) = (ks[0].clone(), env.clone());
            let (nil, head, tail, cons) = (nil.clone(), head.clone(), tail.clone(), cons.clone());
            let k: Cont = Cont::new(move |rt, v, rest| {
                let mut ks = vec![k1.clone()];
                ks.extend(rest);
                match v {
                    HostValue::Nil => eval(rt, &nil, &env2, ks),
                    HostValue::Pair(h, tl) => {
                        let env3 = env2.extend(&head, (*h).clone()).extend(&tail, (*tl).clone());
                        eval(rt, &cons, &env3, ks)
                    }
                    other => stuck(StuckKind::NotAList, format!("lcase on {}", other.describe())),
                }
            });
            let mut ks2 = vec![k];
            ks2.extend(ks[1..].iter().cloned());
            eval(rt, scrutinee, env, ks2)
        }
        Term::Let(x, t0, t1) => {
            let (k1, x, t1, env2) = (ks[0].clone(), x.clone(), t1.clone(), env.clone());
            let k: Cont = Cont::new(move |rt, v, rest| {
                let mut ks = vec![k1.clone()];
                ks.extend(rest);
                eval(rt, &t1, &env2.extend(&x, v), ks)
            });
            let mut ks2 = vec![k];
            ks2.extend(ks[1..].iter().cloned());
            eval(rt, t0, env, ks2)
        }
    }
}

/// Result of an instrumented run.
pub struct CpsRun {
    pub run: Run<HostValue>,
    /// Whether `k_2 .. k_{n+1}` were the initial continuations at every
    /// call of `eval`. Only tracked for programs without `shift`/`reset`.
    pub passive: Option<bool>,
}

/// `evaluate(t) = eval(t, e_empty, θ_1, …, θ_{n+1})` under a budget of
/// `fuel` calls to `eval`.
pub fn run(program: &Term, n: usize, fuel: u64) -> Run<HostValue> {
    run_instrumented(program, n, fuel).run
}

pub fn run_instrumented(program: &Term, n: usize, fuel: u64) -> CpsRun {
    let watch = !program.has_control();
    let rt = Runtime::new(n, fuel, watch);
    let t = Rc::new(program.clone());
    let mut b = eval(&rt, &t, &Env::Empty, rt.thetas.clone());
    let answer = loop {
        match b {
            Bounce::Done(a) => break a,
            Bounce::More(f) => b = f(&rt),
        }
    };
    let outcome = match answer {
        Ok(v) => Outcome::Value(v),
        Err(Halt::Stuck(s)) => Outcome::Stuck(s),
        Err(Halt::Timeout) => Outcome::Timeout,
    };
    CpsRun {
        run: Run {
            outcome,
            steps: rt.used.get(),
            trace: None,
        },
        passive: watch.then(|| rt.passive_ok.get()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn obs(src: &str, n: usize) -> Outcome<Observable> {
        run(&parse_term(src).unwrap(), n, 10_000).outcome.map(|v| v.observe())
    }

    #[test]
    fn basic_programs() {
        assert_eq!(obs("(succ 0)", 1), Outcome::Value(Observable::Int(1)));
        assert_eq!(obs("(succ (succ 0))", 3), Outcome::Value(Observable::Int(2)));
        assert_eq!(obs("(reset 1 (succ (shift 1 (k) 5)))", 1), Outcome::Value(Observable::Int(5)));
        assert_eq!(
            obs("(reset 1 (succ (shift 1 (k) (k (k 0)))))", 1),
            Outcome::Value(Observable::Int(2))
        );
        assert_eq!(obs("(reset 2 (succ (shift 2 (k) 7)))", 2), Outcome::Value(Observable::Int(7)));
    }

    #[test]
    fn level_two_reset_delimits_level_one_shift() {
        // shift_2 captures through the inner reset_1
        assert_eq!(
            obs("(add 1 (reset 2 (add 10 (reset 1 (add 100 (shift 2 (k) (k (k 0))))))))", 2),
            Outcome::Value(Observable::Int(221))
        );
        // shift_1 stops at reset_1
        assert_eq!(
            obs("(add 1 (reset 2 (add 10 (reset 1 (add 100 (shift 1 (k) (k (k 0))))))))", 2),
            Outcome::Value(Observable::Int(211))
        );
    }

    #[test]
    fn stuck_and_timeout() {
        assert!(matches!(obs("(1 2)", 1), Outcome::Stuck(s) if s.kind == StuckKind::NotAFunction));
        assert!(matches!(obs("(succ nil)", 1), Outcome::Stuck(s) if s.kind == StuckKind::NotAnInteger));
        assert!(matches!(obs("(lcase 3 0 (h t) 1)", 1), Outcome::Stuck(s) if s.kind == StuckKind::NotAList));
        assert_eq!(obs("((fix (loop x) (loop x)) 0)", 1), Outcome::Timeout);
    }

    #[test]
    fn outer_continuations_stay_initial_without_control() {
        let t = parse_term("((fix (f n) (if0 n nil (cons n (f (add n -1))))) 5)").unwrap();
        let r = run_instrumented(&t, 3, 10_000);
        assert_eq!(r.passive, Some(true));
        assert_eq!(
            r.run.outcome.value().map(HostValue::observe).unwrap().as_int_list(),
            Some(vec![5, 4, 3, 2, 1])
        );
        let t = parse_term("(reset 1 (succ 1))").unwrap();
        assert_eq!(run_instrumented(&t, 1, 100).passive, None);
    }

    #[test]
    fn counts_eval_calls() {
        // eval (succ 0), eval 0
        assert_eq!(run(&parse_term("(succ 0)").unwrap(), 1, 100).steps, 2);
    }
}
