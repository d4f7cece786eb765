//! The environment-based abstract machine for the CPS hierarchy at level `n`.

use std::rc::Rc;

use super::{drive, realize, trace_line, Config};
use crate::outcome::{Observable, Run, Stuck, StuckKind};
use crate::syntax::{print_term, Frame, Name, Term, TermRef, Tower};

#[derive(Clone, Debug)]
pub enum MValue {
    Int(i64),
    Closure(Name, TermRef, Env),
    FixClosure { fun: Name, param: Name, body: TermRef, env: Env },
    Nil,
    Cons(Rc<MValue>, Rc<MValue>),
    Captured(Rc<EnvTower>),
}

pub type EnvFrame = Frame<MValue, Env>;
pub type EnvTower = Tower<MValue, Env>;
pub type EnvConfig = Config<MValue, Env>;

/// A persistent environment; the most recent binding comes first.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Rc<(Name, MValue, Env)>>);

impl Env {
    pub fn empty() -> Env {
        Env(None)
    }

    pub fn extend(&self, x: &Name, v: MValue) -> Env {
        Env(Some(Rc::new((x.clone(), v, self.clone()))))
    }

    pub fn lookup(&self, x: &Name) -> Option<&MValue> {
        let mut cur = self;
        while let Some(b) = &cur.0 {
            if b.0 == *x {
                return Some(&b.1);
            }
            cur = &b.2;
        }
        None
    }
}

pub fn observe(v: &MValue) -> Observable {
    match v {
        MValue::Int(m) => Observable::Int(*m),
        MValue::Nil => Observable::Nil,
        MValue::Cons(h, t) => Observable::Cons(Box::new(observe(h)), Box::new(observe(t))),
        MValue::Closure(..) | MValue::FixClosure { .. } | MValue::Captured(_) => Observable::Function,
    }
}

fn describe(v: &MValue) -> String {
    realize::value(v).map(|t| print_term(&t)).unwrap_or_else(|e| e.to_string())
}

/// Evaluates a trivial term (a variable, a literal, an abstraction, a
/// recursive function, or a list of trivial terms) in one step.
fn eval_trivial(t: &TermRef, env: &Env) -> Result<MValue, Stuck> {
    Ok(match &**t {
        Term::Lit(m) => MValue::Int(*m),
        Term::Nil => MValue::Nil,
        Term::Var(x) => env
            .lookup(x)
            .cloned()
            .ok_or_else(|| Stuck::new(StuckKind::UnboundVariable, x.as_str()))?,
        Term::Lam(x, body) => MValue::Closure(x.clone(), body.clone(), env.clone()),
        Term::Fix { fun, param, body } => MValue::FixClosure {
            fun: fun.clone(),
            param: param.clone(),
            body: body.clone(),
            env: env.clone(),
        },
        Term::Cons(a, b) => MValue::Cons(Rc::new(eval_trivial(a, env)?), Rc::new(eval_trivial(b, env)?)),
        other => unreachable!("not trivial: {}", print_term(other)),
    })
}

fn int_of(v: &MValue) -> Option<i64> {
    match v {
        MValue::Int(m) => Some(*m),
        _ => None,
    }
}

fn not_int(what: &str, vs: &[&MValue]) -> Stuck {
    let shown: Vec<String> = vs.iter().map(|v| describe(v)).collect();
    Stuck::new(StuckKind::NotAnInteger, format!("{what} {}", shown.join(" ")))
}

/// One transition. `c` must not be final.
pub fn step(c: EnvConfig) -> Result<EnvConfig, Stuck> {
    match c {
        Config::Eval { term, env, mut tower } => {
            if term.is_trivial() {
                let value = eval_trivial(&term, &env)?;
                return Ok(Config::Cont { level: 1, value, tower });
            }
            let next = match &*term {
                Term::App(t0, t1) => {
                    tower.frames.push(Frame::Arg(t1.clone(), env.clone()));
                    t0.clone()
                }
                Term::Succ(t0) => {
                    tower.frames.push(Frame::Succ);
                    t0.clone()
                }
                Term::Cons(t0, t1) => {
                    tower.frames.push(Frame::ConsHead(t1.clone(), env.clone()));
                    t0.clone()
                }
                Term::Add(t0, t1) => {
                    tower.frames.push(Frame::AddLeft(t1.clone(), env.clone()));
                    t0.clone()
                }
                Term::Gt(t0, t1) => {
                    tower.frames.push(Frame::GtLeft(t1.clone(), env.clone()));
                    t0.clone()
                }
                Term::If0(t0, t1, t2) => {
                    tower.frames.push(Frame::If0 {
                        then: t1.clone(),
                        other: t2.clone(),
                        env: env.clone(),
                    });
                    t0.clone()
                }
                Term::LCase {
                    scrutinee,
                    nil,
                    head,
                    tail,
                    cons,
                } => {
                    tower.frames.push(Frame::LCase {
                        nil: nil.clone(),
                        head: head.clone(),
                        tail: tail.clone(),
                        cons: cons.clone(),
                        env: env.clone(),
                    });
                    scrutinee.clone()
                }
                Term::Let(x, t0, t1) => {
                    tower.frames.push(Frame::Let {
                        var: x.clone(),
                        body: t1.clone(),
                        env: env.clone(),
                    });
                    t0.clone()
                }
                Term::Reset(i, t0) => {
                    tower.reset(*i);
                    t0.clone()
                }
                Term::Shift(i, k, t0) => {
                    let captured = tower.capture(*i);
                    let env = env.extend(k, MValue::Captured(Rc::new(captured)));
                    return Ok(Config::Eval {
                        term: t0.clone(),
                        env,
                        tower,
                    });
                }
                Term::Captured(_) => {
                    return Err(Stuck::new(StuckKind::NotAFunction, "captured context in source program"));
                }
                _ => unreachable!("trivial terms handled above"),
            };
            Ok(Config::Eval { term: next, env, tower })
        }
        Config::Cont {
            level: 1,
            value: v,
            mut tower,
        } => {
            let Some(frame) = tower.frames.pop() else {
                return Ok(Config::Cont {
                    level: 2,
                    value: v,
                    tower,
                });
            };
            let (term, env) = match frame {
                Frame::Arg(t1, env) => {
                    tower.frames.push(Frame::Fun(v));
                    (t1, env)
                }
                Frame::Fun(f) => match f {
                    MValue::Closure(x, body, env) => (body, env.extend(&x, v)),
                    MValue::FixClosure {
                        ref fun,
                        ref param,
                        ref body,
                        ref env,
                    } => {
                        let env = env.extend(fun, f.clone()).extend(param, v);
                        (body.clone(), env)
                    }
                    MValue::Captured(c) => {
                        tower.resume((*c).clone());
                        return Ok(Config::Cont {
                            level: 1,
                            value: v,
                            tower,
                        });
                    }
                    other => {
                        return Err(Stuck::new(
                            StuckKind::NotAFunction,
                            format!("application of {} to {}", describe(&other), describe(&v)),
                        ))
                    }
                },
                Frame::Succ => {
                    let m = int_of(&v).ok_or_else(|| not_int("succ", &[&v]))?;
                    return Ok(Config::Cont {
                        level: 1,
                        value: MValue::Int(m.wrapping_add(1)),
                        tower,
                    });
                }
                Frame::ConsHead(t1, env) => {
                    tower.frames.push(Frame::ConsTail(v));
                    (t1, env)
                }
                Frame::ConsTail(v0) => {
                    return Ok(Config::Cont {
                        level: 1,
                        value: MValue::Cons(Rc::new(v0), Rc::new(v)),
                        tower,
                    })
                }
                Frame::AddLeft(t1, env) => {
                    tower.frames.push(Frame::AddRight(v));
                    (t1, env)
                }
                Frame::GtLeft(t1, env) => {
                    tower.frames.push(Frame::GtRight(v));
                    (t1, env)
                }
                Frame::AddRight(v0) => {
                    let (a, b) = int_of(&v0).zip(int_of(&v)).ok_or_else(|| not_int("add", &[&v0, &v]))?;
                    return Ok(Config::Cont {
                        level: 1,
                        value: MValue::Int(a.wrapping_add(b)),
                        tower,
                    });
                }
                Frame::GtRight(v0) => {
                    let (a, b) = int_of(&v0).zip(int_of(&v)).ok_or_else(|| not_int("gt", &[&v0, &v]))?;
                    return Ok(Config::Cont {
                        level: 1,
                        value: MValue::Int((a > b) as i64),
                        tower,
                    });
                }
                Frame::If0 { then, other, env } => match int_of(&v) {
                    Some(0) => (then, env),
                    Some(_) => (other, env),
                    None => return Err(not_int("if0 on", &[&v])),
                },
                Frame::LCase {
                    nil,
                    head,
                    tail,
                    cons,
                    env,
                } => match v {
                    MValue::Nil => (nil, env),
                    MValue::Cons(h, tl) => {
                        let env = env.extend(&head, (*h).clone()).extend(&tail, (*tl).clone());
                        (cons, env)
                    }
                    other => {
                        return Err(Stuck::new(
                            StuckKind::NotAList,
                            format!("lcase on {}", describe(&other)),
                        ))
                    }
                },
                Frame::Let { var, body, env } => {
                    let env = env.extend(&var, v);
                    (body, env)
                }
            };
            Ok(Config::Eval { term, env, tower })
        }
        Config::Cont {
            level: j,
            value,
            mut tower,
        } => {
            if tower.pop_level(j) {
                Ok(Config::Cont { level: 1, value, tower })
            } else if j == tower.height() {
                Ok(Config::Final(value))
            } else {
                Ok(Config::Cont {
                    level: j + 1,
                    value,
                    tower,
                })
            }
        }
        Config::Final(_) => panic!("no transition from a final configuration"),
    }
}

/// `t ⇒ ⟨t, e_empty, •, …, •⟩_eval`, then transitions until a final value,
/// a stuck configuration or `fuel` transitions.
pub fn run(program: &Term, n: usize, fuel: u64, trace: bool) -> Run<MValue> {
    run_with(program, n, fuel, trace, |_, _| {})
}

/// Like [`run`], calling `observe` on every configuration reached.
pub fn run_with(
    program: &Term,
    n: usize,
    fuel: u64,
    trace: bool,
    mut observe: impl FnMut(u64, &EnvConfig),
) -> Run<MValue> {
    let init = initial(program, n);
    let mut lines = trace.then(Vec::new);
    let (outcome, steps) = drive(init, fuel, step, |k, c| {
        if let Some(lines) = lines.as_mut() {
            let line = match realize::config(c) {
                Ok(sc) => trace_line(k, &sc),
                Err(e) => format!("{k}: <unrealizable: {e}>"),
            };
            lines.push(line);
        }
        observe(k, c);
    });
    Run {
        outcome,
        steps,
        trace: lines,
    }
}

pub fn initial(program: &Term, n: usize) -> EnvConfig {
    Config::Eval {
        term: Rc::new(program.clone()),
        env: Env::empty(),
        tower: Tower::empty(n + 1),
    }
}
