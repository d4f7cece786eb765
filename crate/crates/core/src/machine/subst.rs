//! The substitution-based abstract machine. Frames hold closed terms,
//! values are syntactic, and `shift_i` substitutes the captured context
//! into its body.

use std::rc::Rc;

use super::{drive, trace_line, Config, SConfig};
use crate::outcome::{Observable, Run, Stuck, StuckKind};
use crate::syntax::{concat, print_term, substitute, Frame, Name, SubstTower, Term, TermRef};

/// How applying a captured context treats the current one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// `shift`/`reset`: the current context is saved on the next level.
    Static,
    /// `F`/`#` (level 1 only): the captured frames are concatenated onto the
    /// current ones.
    Dynamic,
}

pub fn observe(v: &Term) -> Observable {
    match v {
        Term::Lit(m) => Observable::Int(*m),
        Term::Nil => Observable::Nil,
        Term::Cons(h, t) => Observable::Cons(Box::new(observe(h)), Box::new(observe(t))),
        _ => Observable::Function,
    }
}

/// `t{x := v}` for values produced by the machine.
pub(crate) fn subst_value(t: &Term, x: &Name, v: &Term) -> Term {
    substitute(t, x, v).expect("machine values are syntactic values")
}

pub(crate) fn beta(f: &Term, v: &Term) -> Option<Term> {
    match f {
        Term::Lam(x, body) => Some(subst_value(body, x, v)),
        Term::Fix { fun, param, body } => {
            let once = subst_value(body, param, v);
            Some(subst_value(&once, fun, f))
        }
        _ => None,
    }
}

pub(crate) fn int_of(v: &Term) -> Option<i64> {
    match v {
        Term::Lit(m) => Some(*m),
        _ => None,
    }
}

pub(crate) fn not_int(what: &str, vs: &[&Term]) -> Stuck {
    let shown: Vec<String> = vs.iter().map(|v| print_term(v)).collect();
    Stuck::new(StuckKind::NotAnInteger, format!("{what} {}", shown.join(" ")))
}

pub(crate) fn not_fun(f: &Term, v: &Term) -> Stuck {
    Stuck::new(
        StuckKind::NotAFunction,
        format!("application of {} to {}", print_term(f), print_term(v)),
    )
}

pub(crate) fn not_list(v: &Term) -> Stuck {
    Stuck::new(StuckKind::NotAList, format!("lcase on {}", print_term(v)))
}

/// One transition. `c` must not be final.
pub fn step(c: SConfig, control: Control) -> Result<SConfig, Stuck> {
    match c {
        Config::Eval { term, env: (), mut tower } => {
            if term.is_value() {
                return Ok(Config::Cont {
                    level: 1,
                    value: (*term).clone(),
                    tower,
                });
            }
            let next: TermRef = match &*term {
                Term::Var(x) => return Err(Stuck::new(StuckKind::UnboundVariable, x.as_str())),
                Term::App(t0, t1) => {
                    tower.frames.push(Frame::Arg(t1.clone(), ()));
                    t0.clone()
                }
                Term::Succ(t0) => {
                    tower.frames.push(Frame::Succ);
                    t0.clone()
                }
                Term::Cons(t0, t1) => {
                    tower.frames.push(Frame::ConsHead(t1.clone(), ()));
                    t0.clone()
                }
                Term::Add(t0, t1) => {
                    tower.frames.push(Frame::AddLeft(t1.clone(), ()));
                    t0.clone()
                }
                Term::Gt(t0, t1) => {
                    tower.frames.push(Frame::GtLeft(t1.clone(), ()));
                    t0.clone()
                }
                Term::If0(t0, t1, t2) => {
                    tower.frames.push(Frame::If0 {
                        then: t1.clone(),
                        other: t2.clone(),
                        env: (),
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
                        env: (),
                    });
                    scrutinee.clone()
                }
                Term::Let(x, t0, t1) => {
                    tower.frames.push(Frame::Let {
                        var: x.clone(),
                        body: t1.clone(),
                        env: (),
                    });
                    t0.clone()
                }
                Term::Reset(i, t0) => {
                    tower.reset(*i);
                    t0.clone()
                }
                Term::Shift(i, k, t0) => {
                    let captured = Term::Captured(Rc::new(tower.capture(*i)));
                    Rc::new(subst_value(t0, k, &captured))
                }
                _ => unreachable!("values handled above"),
            };
            Ok(Config::Eval {
                term: next,
                env: (),
                tower,
            })
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
            let cont = |value: Term, tower: SubstTower| Ok(Config::Cont { level: 1, value, tower });
            let next: TermRef = match frame {
                Frame::Arg(t1, ()) => {
                    tower.frames.push(Frame::Fun(v));
                    t1
                }
                Frame::Fun(Term::Captured(c)) => {
                    match control {
                        Control::Static => tower.resume((*c).clone()),
                        Control::Dynamic => tower.frames = concat(&c.frames, &tower.frames),
                    }
                    return cont(v, tower);
                }
                Frame::Fun(f) => Rc::new(beta(&f, &v).ok_or_else(|| not_fun(&f, &v))?),
                Frame::Succ => {
                    let m = int_of(&v).ok_or_else(|| not_int("succ", &[&v]))?;
                    return cont(Term::Lit(m.wrapping_add(1)), tower);
                }
                Frame::ConsHead(t1, ()) => {
                    tower.frames.push(Frame::ConsTail(v));
                    t1
                }
                Frame::ConsTail(v0) => return cont(Term::Cons(Rc::new(v0), Rc::new(v)), tower),
                Frame::AddLeft(t1, ()) => {
                    tower.frames.push(Frame::AddRight(v));
                    t1
                }
                Frame::GtLeft(t1, ()) => {
                    tower.frames.push(Frame::GtRight(v));
                    t1
                }
                Frame::AddRight(v0) => {
                    let (a, b) = int_of(&v0).zip(int_of(&v)).ok_or_else(|| not_int("add", &[&v0, &v]))?;
                    return cont(Term::Lit(a.wrapping_add(b)), tower);
                }
                Frame::GtRight(v0) => {
                    let (a, b) = int_of(&v0).zip(int_of(&v)).ok_or_else(|| not_int("gt", &[&v0, &v]))?;
                    return cont(Term::Lit((a > b) as i64), tower);
                }
                Frame::If0 { then, other, .. } => match int_of(&v) {
                    Some(0) => then,
                    Some(_) => other,
                    None => return Err(not_int("if0 on", &[&v])),
                },
                Frame::LCase {
                    nil, head, tail, cons, ..
                } => match &v {
                    Term::Nil => nil,
                    Term::Cons(h, tl) => {
                        let once = subst_value(&cons, &tail, tl);
                        Rc::new(subst_value(&once, &head, h))
                    }
                    _ => return Err(not_list(&v)),
                },
                Frame::Let { var, body, .. } => Rc::new(subst_value(&body, &var, &v)),
            };
            Ok(Config::Eval {
                term: next,
                env: (),
                tower,
            })
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

pub fn initial(program: &Term, n: usize) -> SConfig {
    Config::Eval {
        term: Rc::new(program.clone()),
        env: (),
        tower: SubstTower::empty(n + 1),
    }
}

pub fn run(program: &Term, n: usize, fuel: u64, trace: bool) -> Run<Term> {
    run_with(program, n, fuel, trace, Control::Static, |_, _| {})
}

/// Runs the machine, calling `observe` on every configuration reached.
pub fn run_with(
    program: &Term,
    n: usize,
    fuel: u64,
    trace: bool,
    control: Control,
    mut observe: impl FnMut(u64, &SConfig),
) -> Run<Term> {
    let mut lines = trace.then(Vec::new);
    let (outcome, steps) = drive(
        initial(program, n),
        fuel,
        |c| step(c, control),
        |k, c| {
            if let Some(lines) = lines.as_mut() {
                lines.push(trace_line(k, c));
            }
            observe(k, c);
        },
    );
    Run {
        outcome,
        steps,
        trace: lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::Outcome;
    use crate::syntax::parse_term;

    fn run_src(src: &str, n: usize) -> Run<Term> {
        run(&parse_term(src).unwrap(), n, 10_000, true)
    }

    #[test]
    fn examples() {
        assert_eq!(run_src("(succ (succ 0))", 1).outcome, Outcome::Value(Term::lit(2)));
        assert_eq!(
            run_src("(reset 1 (succ (shift 1 (k) (k (k 0)))))", 1).outcome,
            Outcome::Value(Term::lit(2))
        );
        assert_eq!(run_src("(reset 2 (succ (shift 2 (k) 7)))", 2).outcome, Outcome::Value(Term::lit(7)));
    }

    #[test]
    fn beta_on_identity() {
        let c = initial(&parse_term("((lambda (x) x) 1)").unwrap(), 1);
        let mut c = step(c, Control::Static).unwrap();
        for _ in 0..4 {
            c = step(c, Control::Static).unwrap();
        }
        match c {
            Config::Eval { term, tower, .. } => {
                assert_eq!(*term, Term::lit(1));
                assert!(tower.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_empties_level_one() {
        let mut tower = SubstTower::empty(2);
        tower.frames.push(Frame::Succ);
        let c = Config::Eval {
            term: Rc::new(Term::shift(1, "k", Term::lit(5))),
            env: (),
            tower,
        };
        match step(c, Control::Static).unwrap() {
            Config::Eval { term, tower, .. } => {
                assert_eq!(*term, Term::lit(5));
                assert!(tower.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trace_shape() {
        let r = run_src("(succ 0)", 1);
        let t = r.trace.unwrap();
        assert_eq!(t[0], "0: eval | 0:{} | 0:[] [ (succ 0) ]");
        assert_eq!(t[1], "1: eval | 0:{} | 1:[SUCC] [ 0 ]");
        assert_eq!(t.last().unwrap(), "5: final [ 1 ]");
        assert_eq!(r.steps, 4);
    }
}
