//! Arithmetic expressions: a direct evaluator, a CPS evaluator, a term-based
//! abstract machine, and a reduction semantics, all over a generic natural
//! number type.

use std::fmt;
use std::str::FromStr;

use num_traits::CheckedAdd;
use thiserror::Error;

use crate::sexpr::{read_one, SExpr, SyntaxError};

/// Numbers the arithmetic language can use.
pub trait Natural: Clone + PartialEq + fmt::Debug + fmt::Display + CheckedAdd {}

impl<N: Clone + PartialEq + fmt::Debug + fmt::Display + CheckedAdd> Natural for N {}

#[derive(Clone, Debug, PartialEq)]
pub enum AExp<N = u64> {
    Num(N),
    Plus(Box<AExp<N>>, Box<AExp<N>>),
}

impl<N> AExp<N> {
    pub fn plus(a: AExp<N>, b: AExp<N>) -> Self {
        AExp::Plus(Box::new(a), Box::new(b))
    }
}

impl<N: fmt::Display> fmt::Display for AExp<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AExp::Num(m) => write!(f, "{m}"),
            AExp::Plus(a, b) => write!(f, "(+ {a} {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("addition overflowed")]
    Overflow,
}

fn add<N: Natural>(a: &N, b: &N) -> Result<N, ArithError> {
    a.checked_add(b).ok_or(ArithError::Overflow)
}

pub fn eval_direct<N: Natural>(e: &AExp<N>) -> Result<N, ArithError> {
    match e {
        AExp::Num(m) => Ok(m.clone()),
        AExp::Plus(a, b) => add(&eval_direct(a)?, &eval_direct(b)?),
    }
}

type Cont<'a, N> = Box<dyn FnOnce(N) -> Result<N, ArithError> + 'a>;

/// Continuation-passing evaluator: every call is a tail call.
pub fn eval_cps<N: Natural>(e: &AExp<N>) -> Result<N, ArithError> {
    fn go<'a, N: Natural + 'a>(e: &'a AExp<N>, k: Cont<'a, N>) -> Result<N, ArithError> {
        match e {
            AExp::Num(m) => k(m.clone()),
            AExp::Plus(a, b) => go(a, Box::new(move |m1| go(b, Box::new(move |m2| k(add(&m1, &m2)?))))),
        }
    }
    go(e, Box::new(Ok))
}

/// Evaluation-context frames; a context is a frame list, innermost last.
#[derive(Clone, Debug, PartialEq)]
pub enum AFrame<N = u64> {
    /// `AAdd1(e)`: the left operand is being evaluated, `e` is pending.
    Add1(AExp<N>),
    /// `AAdd2(m)`: the left operand evaluated to `m`.
    Add2(N),
}

pub type ACtx<N = u64> = Vec<AFrame<N>>;

pub fn plug<N: Clone>(ctx: &[AFrame<N>], e: AExp<N>) -> AExp<N> {
    ctx.iter().rev().fold(e, |acc, f| match f {
        AFrame::Add1(r) => AExp::plus(acc, r.clone()),
        AFrame::Add2(m) => AExp::plus(AExp::Num(m.clone()), acc),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MachineState<N = u64> {
    Eval(AExp<N>, ACtx<N>),
    Apply(ACtx<N>, N),
    Final(N),
}

/// One transition of the term-based machine.
pub fn machine_step<N: Natural>(s: MachineState<N>) -> Result<MachineState<N>, ArithError> {
    Ok(match s {
        MachineState::Eval(AExp::Num(m), c) => MachineState::Apply(c, m),
        MachineState::Eval(AExp::Plus(a, b), mut c) => {
            c.push(AFrame::Add1(*b));
            MachineState::Eval(*a, c)
        }
        MachineState::Apply(mut c, v) => match c.pop() {
            None => MachineState::Final(v),
            Some(AFrame::Add1(e2)) => {
                c.push(AFrame::Add2(v));
                MachineState::Eval(e2, c)
            }
            Some(AFrame::Add2(m1)) => MachineState::Apply(c, add(&m1, &v)?),
        },
        MachineState::Final(v) => MachineState::Final(v),
    })
}

/// A machine run: the result and the number of transitions after the
/// initial injection, the final unloading included.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineRun<N = u64> {
    pub value: N,
    pub transitions: usize,
    /// The term `C[m1 + m2]` at every addition, in order.
    pub redexes: Vec<AExp<N>>,
}

pub fn run_machine<N: Natural>(e: &AExp<N>) -> Result<MachineRun<N>, ArithError> {
    let mut s = MachineState::Eval(e.clone(), Vec::new());
    let mut transitions = 0;
    let mut redexes = Vec::new();
    loop {
        if let MachineState::Final(v) = s {
            return Ok(MachineRun {
                value: v,
                transitions,
                redexes,
            });
        }
        if let MachineState::Apply(c, v) = &s {
            if let Some(AFrame::Add2(m1)) = c.last() {
                let redex = AExp::plus(AExp::Num(m1.clone()), AExp::Num(v.clone()));
                redexes.push(plug(&c[..c.len() - 1], redex));
            }
        }
        s = machine_step(s)?;
        transitions += 1;
    }
}

/// Splits a non-value into its leftmost-innermost redex `m1 + m2` and the
/// surrounding context. Values yield `Err(m)`.
pub fn decompose<N: Clone>(e: &AExp<N>) -> Result<(ACtx<N>, N, N), N> {
    let mut ctx = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            AExp::Num(m) => return Err(m.clone()),
            AExp::Plus(a, b) => match (&**a, &**b) {
                (AExp::Num(m1), AExp::Num(m2)) => return Ok((ctx, m1.clone(), m2.clone())),
                (AExp::Num(m1), _) => {
                    ctx.push(AFrame::Add2(m1.clone()));
                    cur = b;
                }
                _ => {
                    ctx.push(AFrame::Add1((**b).clone()));
                    cur = a;
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reduct<N = u64> {
    Next(AExp<N>),
    Done(N),
}

/// One step of reduction: decompose, apply the addition rule, plug.
pub fn reduce_step<N: Natural>(e: &AExp<N>) -> Result<Reduct<N>, ArithError> {
    match decompose(e) {
        Err(m) => Ok(Reduct::Done(m)),
        Ok((ctx, m1, m2)) => Ok(Reduct::Next(plug(&ctx, AExp::Num(add(&m1, &m2)?)))),
    }
}

/// Iterates `reduce_step` to a value, also returning every intermediate
/// non-value term.
pub fn reduce_all<N: Natural>(e: &AExp<N>) -> Result<(N, Vec<AExp<N>>), ArithError> {
    let mut cur = e.clone();
    let mut seen = Vec::new();
    loop {
        match reduce_step(&cur)? {
            Reduct::Done(m) => return Ok((m, seen)),
            Reduct::Next(next) => {
                seen.push(std::mem::replace(&mut cur, next));
            }
        }
    }
}

pub fn eval_by_reduction<N: Natural>(e: &AExp<N>) -> Result<N, ArithError> {
    reduce_all(e).map(|(m, _)| m)
}

/// Parses `INT` or `(+ e e)`.
pub fn parse_aexp<N: FromStr>(text: &str) -> Result<AExp<N>, SyntaxError> {
    fn go<N: FromStr>(e: &SExpr) -> Result<AExp<N>, SyntaxError> {
        match e {
            SExpr::Atom(s, pos) => s
                .parse()
                .map(AExp::Num)
                .map_err(|_| SyntaxError::new(*pos, format!("expected a natural number, found `{s}`"))),
            SExpr::List(items, pos) => match items.as_slice() {
                [SExpr::Atom(op, _), a, b] if op == "+" => Ok(AExp::plus(go(a)?, go(b)?)),
                _ => Err(SyntaxError::new(*pos, "expected `(+ e e)`")),
            },
        }
    }
    go(&read_one(text)?)
}
