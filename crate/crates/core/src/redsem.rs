//! Reduction semantics: decompose a closed term into a context tower and a
//! potential redex, contract the redex, plug the result back.
//!
//! `dec` is read off the substitution machine: its transitions that leave
//! the plugged term unchanged are decomposition steps, the others are
//! contractions. A value meeting a non-empty level `j >= 2` crosses the
//! boundary of a `reset_{j-1}`, so that pop is where a `Reset` redex is found.

use std::fmt;
use std::rc::Rc;

use crate::machine::subst::{beta, int_of, not_fun, not_int, not_list, subst_value};
use crate::outcome::{Outcome, Run, Stuck, StuckKind};
use crate::syntax::{print_term, Frame, Name, SubstFrame, SubstTower, Term, TermRef};

/// A potential redex: the focus of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub enum Redex {
    Succ(Term),
    App(Term, Term),
    Shift(usize, Name, TermRef),
    /// `reset_i v`.
    Reset(usize, Term),
    Add(Term, Term),
    Gt(Term, Term),
    If0(Term, TermRef, TermRef),
    LCase {
        value: Term,
        nil: TermRef,
        head: Name,
        tail: Name,
        cons: TermRef,
    },
    Let(Name, Term, TermRef),
    /// A free variable; impossible in closed terms.
    Unbound(Name),
}

impl Redex {
    pub fn to_term(&self) -> Term {
        let r = |t: &Term| Rc::new(t.clone());
        match self {
            Redex::Succ(v) => Term::Succ(r(v)),
            Redex::App(f, v) => Term::App(r(f), r(v)),
            Redex::Shift(i, k, t) => Term::Shift(*i, k.clone(), t.clone()),
            Redex::Reset(i, v) => Term::Reset(*i, r(v)),
            Redex::Add(a, b) => Term::Add(r(a), r(b)),
            Redex::Gt(a, b) => Term::Gt(r(a), r(b)),
            Redex::If0(v, a, b) => Term::If0(r(v), a.clone(), b.clone()),
            Redex::LCase {
                value,
                nil,
                head,
                tail,
                cons,
            } => Term::LCase {
                scrutinee: r(value),
                nil: nil.clone(),
                head: head.clone(),
                tail: tail.clone(),
                cons: cons.clone(),
            },
            Redex::Let(x, v, b) => Term::Let(x.clone(), r(v), b.clone()),
            Redex::Unbound(x) => Term::Var(x.clone()),
        }
    }

    /// `Ok` for actual redexes; the reason for stuck ones.
    pub fn classify(&self) -> Result<(), Stuck> {
        match self {
            Redex::Succ(v) => int_of(v).map(|_| ()).ok_or_else(|| not_int("succ", &[v])),
            Redex::App(f, v) => match f {
                Term::Lam(..) | Term::Fix { .. } | Term::Captured(_) => Ok(()),
                _ => Err(not_fun(f, v)),
            },
            Redex::Shift(..) | Redex::Reset(..) | Redex::Let(..) => Ok(()),
            Redex::Add(a, b) => int_of(a).zip(int_of(b)).map(|_| ()).ok_or_else(|| not_int("add", &[a, b])),
            Redex::Gt(a, b) => int_of(a).zip(int_of(b)).map(|_| ()).ok_or_else(|| not_int("gt", &[a, b])),
            Redex::If0(v, ..) => int_of(v).map(|_| ()).ok_or_else(|| not_int("if0 on", &[v])),
            Redex::LCase { value, .. } => match value {
                Term::Nil | Term::Cons(..) => Ok(()),
                other => Err(not_list(other)),
            },
            Redex::Unbound(x) => Err(Stuck::new(StuckKind::UnboundVariable, x.as_str())),
        }
    }

    pub fn is_actual(&self) -> bool {
        self.classify().is_ok()
    }
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(&self.to_term()))
    }
}

/// A term split into a context tower of height `n + 1` and a potential
/// redex.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub tower: SubstTower,
    pub redex: Redex,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decomposed {
    Value(Term),
    Found(Decomposition),
}

fn plug_frame(f: SubstFrame, t: TermRef) -> TermRef {
    Rc::new(match f {
        Frame::Arg(t1, ()) => Term::App(t, t1),
        Frame::Fun(v) => Term::App(Rc::new(v), t),
        Frame::Succ => Term::Succ(t),
        Frame::ConsHead(t1, ()) => Term::Cons(t, t1),
        Frame::ConsTail(v) => Term::Cons(Rc::new(v), t),
        Frame::AddLeft(t1, ()) => Term::Add(t, t1),
        Frame::AddRight(v) => Term::Add(Rc::new(v), t),
        Frame::GtLeft(t1, ()) => Term::Gt(t, t1),
        Frame::GtRight(v) => Term::Gt(Rc::new(v), t),
        Frame::If0 { then, other, .. } => Term::If0(t, then, other),
        Frame::LCase {
            nil, head, tail, cons, ..
        } => Term::LCase {
            scrutinee: t,
            nil,
            head,
            tail,
            cons,
        },
        Frame::Let { var, body, .. } => Term::Let(var, t, body),
    })
}

/// Reconstructs the term `C_{n+1} · … · C_1[t]`.
pub fn plug(tower: &SubstTower, t: &Term) -> Term {
    let mut tower = tower.clone();
    let mut t = Rc::new(t.clone());
    loop {
        while let Some(f) = tower.frames.pop() {
            t = plug_frame(f, t);
        }
        match (2..=tower.height()).find(|&j| !tower.level_is_empty(j)) {
            None => return Rc::unwrap_or_clone(t),
            Some(j) => {
                tower.pop_level(j);
                t = Rc::new(Term::Reset(j - 1, t));
            }
        }
    }
}

pub fn plug_decomposition(d: &Decomposition) -> Term {
    plug(&d.tower, &d.redex.to_term())
}

/// `dec(t, C_1, …, C_{n+1})`: continues decomposing from a term in a tower.
pub fn refocus(t: &Term, tower: SubstTower) -> Decomposed {
    dec(Rc::new(t.clone()), tower)
}

/// Decomposes a closed term at level `n`.
pub fn decompose(t: &Term, n: usize) -> Decomposed {
    refocus(t, SubstTower::empty(n + 1))
}

fn found(tower: SubstTower, redex: Redex) -> Decomposed {
    Decomposed::Found(Decomposition { tower, redex })
}

fn dec(mut t: TermRef, mut tower: SubstTower) -> Decomposed {
    loop {
        if t.is_value() {
            return dec_cont(Rc::unwrap_or_clone(t), tower);
        }
        t = match &*t {
            Term::Var(x) => return found(tower, Redex::Unbound(x.clone())),
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
            Term::Shift(i, k, t0) => return found(tower, Redex::Shift(*i, k.clone(), t0.clone())),
            _ => unreachable!("values handled above"),
        };
    }
}

fn dec_cont(mut v: Term, mut tower: SubstTower) -> Decomposed {
    loop {
        let Some(frame) = tower.frames.pop() else {
            // a value with empty lower levels meets the next saved context
            return match (2..=tower.height()).find(|&j| !tower.level_is_empty(j)) {
                None => Decomposed::Value(v),
                Some(j) => {
                    tower.pop_level(j);
                    found(tower, Redex::Reset(j - 1, v))
                }
            };
        };
        match frame {
            Frame::Arg(t1, ()) => {
                tower.frames.push(Frame::Fun(v));
                return dec(t1, tower);
            }
            Frame::ConsHead(t1, ()) => {
                tower.frames.push(Frame::ConsTail(v));
                return dec(t1, tower);
            }
            Frame::AddLeft(t1, ()) => {
                tower.frames.push(Frame::AddRight(v));
                return dec(t1, tower);
            }
            Frame::GtLeft(t1, ()) => {
                tower.frames.push(Frame::GtRight(v));
                return dec(t1, tower);
            }
            Frame::ConsTail(v0) => v = Term::Cons(Rc::new(v0), Rc::new(v)),
            Frame::Fun(f) => return found(tower, Redex::App(f, v)),
            Frame::Succ => return found(tower, Redex::Succ(v)),
            Frame::AddRight(v0) => return found(tower, Redex::Add(v0, v)),
            Frame::GtRight(v0) => return found(tower, Redex::Gt(v0, v)),
            Frame::If0 { then, other, .. } => return found(tower, Redex::If0(v, then, other)),
            Frame::LCase {
                nil, head, tail, cons, ..
            } => {
                return found(
                    tower,
                    Redex::LCase {
                        value: v,
                        nil,
                        head,
                        tail,
                        cons,
                    },
                )
            }
            Frame::Let { var, body, .. } => return found(tower, Redex::Let(var, v, body)),
        }
    }
}

/// Applies the reduction rule for `d.redex`, returning the contractum and
/// the (possibly rearranged) tower around it.
pub fn contract(d: Decomposition) -> Result<(Term, SubstTower), Stuck> {
    d.redex.classify()?;
    let mut tower = d.tower;
    let t = match d.redex {
        Redex::Succ(v) => Term::Lit(int_of(&v).expect("classified").wrapping_add(1)),
        Redex::App(Term::Captured(c), v) => {
            tower.resume((*c).clone());
            v
        }
        Redex::App(f, v) => beta(&f, &v).expect("classified"),
        Redex::Shift(i, k, body) => {
            let c = Term::Captured(Rc::new(tower.capture(i)));
            subst_value(&body, &k, &c)
        }
        Redex::Reset(_, v) => v,
        Redex::Add(a, b) => Term::Lit(int_of(&a).unwrap().wrapping_add(int_of(&b).unwrap())),
        Redex::Gt(a, b) => Term::Lit((int_of(&a).unwrap() > int_of(&b).unwrap()) as i64),
        Redex::If0(v, then, other) => {
            if int_of(&v) == Some(0) {
                (*then).clone()
            } else {
                (*other).clone()
            }
        }
        Redex::LCase {
            value,
            nil,
            head,
            tail,
            cons,
        } => match value {
            Term::Cons(h, tl) => subst_value(&subst_value(&cons, &tail, &tl), &head, &h),
            _ => (*nil).clone(),
        },
        Redex::Let(x, v, body) => subst_value(&body, &x, &v),
        Redex::Unbound(_) => unreachable!("classified as stuck"),
    };
    Ok((t, tower))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reduct {
    Next(Term),
    Done(Term),
    StuckAt(Decomposition, Stuck),
}

/// One step: decompose, contract, plug.
pub fn reduce_step(t: &Term, n: usize) -> Reduct {
    match decompose(t, n) {
        Decomposed::Value(v) => Reduct::Done(v),
        Decomposed::Found(d) => match contract(d.clone()) {
            Ok((t2, tower)) => Reduct::Next(plug(&tower, &t2)),
            Err(s) => Reduct::StuckAt(d, s),
        },
    }
}

/// Iterates [`reduce_step`]; `steps` counts contractions.
pub fn evaluate(t: &Term, n: usize, fuel: u64) -> Run<Term> {
    let (run, _) = reduction_sequence(t, n, fuel, false);
    run
}

/// Like [`evaluate`], also returning, when `keep` is set, every non-value
/// term of the reduction sequence from the start term on.
pub fn reduction_sequence(t: &Term, n: usize, fuel: u64, keep: bool) -> (Run<Term>, Vec<Term>) {
    let mut cur = t.clone();
    let mut seen = Vec::new();
    let mut steps = 0;
    loop {
        if keep {
            seen.push(cur.clone());
        }
        let outcome = match reduce_step(&cur, n) {
            Reduct::Done(v) => Outcome::Value(v),
            Reduct::StuckAt(_, s) => Outcome::Stuck(s),
            Reduct::Next(_) if steps >= fuel => Outcome::Timeout,
            Reduct::Next(next) => {
                cur = next;
                steps += 1;
                continue;
            }
        };
        if keep && matches!(outcome, Outcome::Value(_)) {
            seen.pop();
        }
        return (
            Run {
                outcome,
                steps,
                trace: None,
            },
            seen,
        );
    }
}

/// Statistics of a refocusing run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefocusCheck {
    pub checked: u64,
    pub violations: u64,
}

/// Evaluates by contract-and-refocus without plugging, checking at every
/// step that `dec(t, tower) = decompose(plug(tower, t))`.
pub fn evaluate_refocusing(t: &Term, n: usize, fuel: u64) -> (Run<Term>, RefocusCheck) {
    let mut check = RefocusCheck::default();
    let mut state = decompose(t, n);
    let mut steps = 0;
    let outcome = loop {
        match state {
            Decomposed::Value(v) => break Outcome::Value(v),
            Decomposed::Found(d) => {
                if steps >= fuel && d.redex.is_actual() {
                    break Outcome::Timeout;
                }
                match contract(d) {
                    Err(s) => break Outcome::Stuck(s),
                    Ok((t2, tower)) => {
                        steps += 1;
                        let whole = plug(&tower, &t2);
                        state = refocus(&t2, tower);
                        check.checked += 1;
                        if state != decompose(&whole, n) {
                            check.violations += 1;
                        }
                    }
                }
            }
        }
    };
    (
        Run {
            outcome,
            steps,
            trace: None,
        },
        check,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn p(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(&Term::lit(5), 1), Decomposed::Value(Term::lit(5)));
        assert_eq!(
            decompose(&p("(succ 0)"), 1),
            Decomposed::Found(Decomposition {
                tower: SubstTower::empty(2),
                redex: Redex::Succ(Term::lit(0)),
            })
        );
        let Decomposed::Found(d) = decompose(&p("(reset 1 (succ (shift 1 (k) 5)))"), 1) else {
            panic!("expected a redex")
        };
        assert_eq!(d.redex, Redex::Shift(1, Name::new("k"), Rc::new(Term::lit(5))));
        assert_eq!(d.tower.frames, vec![Frame::Succ]);
        assert_eq!(d.tower.stack(2).len(), 1);
        assert!(d.tower.stack(2)[0].is_empty());
    }

    #[test]
    fn plug_examples() {
        assert_eq!(plug(&SubstTower::empty(2), &Term::lit(5)), Term::lit(5));
        let mut t = SubstTower::empty(2);
        t.frames.push(Frame::Succ);
        assert_eq!(plug(&t, &Term::lit(0)), p("(succ 0)"));
    }

    #[test]
    fn contraction_rules() {
        let c = |r: Redex| contract(Decomposition { tower: SubstTower::empty(2), redex: r }).map(|(t, _)| t);
        assert_eq!(c(Redex::Succ(Term::lit(4))), Ok(Term::lit(5)));
        assert_eq!(c(Redex::App(p("(lambda (x) x)"), Term::lit(9))), Ok(Term::lit(9)));
        assert_eq!(c(Redex::Reset(1, Term::lit(3))), Ok(Term::lit(3)));
        assert!(c(Redex::App(Term::lit(1), Term::lit(2))).is_err());
    }

    #[test]
    fn single_steps() {
        assert_eq!(reduce_step(&p("(succ (succ 0))"), 1), Reduct::Next(p("(succ 1)")));
        assert_eq!(reduce_step(&p("(reset 1 3)"), 1), Reduct::Next(Term::lit(3)));
        match reduce_step(&p("(1 2)"), 1) {
            Reduct::StuckAt(d, s) => {
                assert_eq!(d.redex, Redex::App(Term::lit(1), Term::lit(2)));
                assert_eq!(s.kind, StuckKind::NotAFunction);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn evaluation() {
        let r = evaluate(&p("(reset 1 (succ (shift 1 (k) (k (k 0)))))"), 1, 1000);
        assert_eq!(r.outcome, Outcome::Value(Term::lit(2)));
        let r = evaluate(&Term::lit(4), 1, 1000);
        assert_eq!((r.outcome, r.steps), (Outcome::Value(Term::lit(4)), 0));
        let (r, check) = evaluate_refocusing(&p("(reset 2 (add 1 (reset 1 (shift 2 (k) (k (k 1))))))"), 2, 1000);
        assert_eq!(r.outcome, Outcome::Value(Term::lit(3)));
        assert_eq!(check.violations, 0);
    }
}
