//! The translation ℛ from environment-machine values, contexts and
//! configurations to their substitution-machine counterparts. A closure
//! `[x, t, e]` becomes `λx.t` with every free variable replaced by the
//! translation of its value in `e`.

use std::rc::Rc;

use thiserror::Error;

use super::env::{Env, EnvConfig, EnvFrame, EnvTower, MValue};
use super::{Config, SConfig};
use crate::syntax::{free_vars, instantiate, Frame, Name, SubstFrame, SubstTower, Term, TermRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("internal error: `{0}` is not bound in a closure environment")]
    Unbound(Name),
}

pub fn value(v: &MValue) -> Result<Term, RealizeError> {
    Ok(match v {
        MValue::Int(m) => Term::Lit(*m),
        MValue::Nil => Term::Nil,
        MValue::Cons(h, t) => Term::Cons(Rc::new(value(h)?), Rc::new(value(t)?)),
        MValue::Closure(x, body, env) => Term::Lam(x.clone(), close(body, env, &[x])?),
        MValue::FixClosure { fun, param, body, env } => Term::Fix {
            fun: fun.clone(),
            param: param.clone(),
            body: close(body, env, &[fun, param])?,
        },
        MValue::Captured(tower) => Term::Captured(Rc::new(self::tower(tower)?)),
    })
}

/// Substitutes the realized values of `env` for the free variables of `t`
/// that are not among `bound`.
pub fn close(t: &TermRef, env: &Env, bound: &[&Name]) -> Result<TermRef, RealizeError> {
    let mut map = Vec::new();
    for y in free_vars(t) {
        if bound.contains(&&y) {
            continue;
        }
        let v = env.lookup(&y).ok_or_else(|| RealizeError::Unbound(y.clone()))?;
        map.push((y, value(v)?));
    }
    Ok(instantiate(t, &map))
}

pub fn frame(f: &EnvFrame) -> Result<SubstFrame, RealizeError> {
    Ok(match f {
        Frame::Arg(t, e) => Frame::Arg(close(t, e, &[])?, ()),
        Frame::Fun(v) => Frame::Fun(value(v)?),
        Frame::Succ => Frame::Succ,
        Frame::ConsHead(t, e) => Frame::ConsHead(close(t, e, &[])?, ()),
        Frame::ConsTail(v) => Frame::ConsTail(value(v)?),
        Frame::AddLeft(t, e) => Frame::AddLeft(close(t, e, &[])?, ()),
        Frame::AddRight(v) => Frame::AddRight(value(v)?),
        Frame::GtLeft(t, e) => Frame::GtLeft(close(t, e, &[])?, ()),
        Frame::GtRight(v) => Frame::GtRight(value(v)?),
        Frame::If0 { then, other, env } => Frame::If0 {
            then: close(then, env, &[])?,
            other: close(other, env, &[])?,
            env: (),
        },
        Frame::LCase {
            nil,
            head,
            tail,
            cons,
            env,
        } => Frame::LCase {
            nil: close(nil, env, &[])?,
            head: head.clone(),
            tail: tail.clone(),
            cons: close(cons, env, &[head, tail])?,
            env: (),
        },
        Frame::Let { var, body, env } => Frame::Let {
            var: var.clone(),
            body: close(body, env, &[var])?,
            env: (),
        },
    })
}

pub fn tower(t: &EnvTower) -> Result<SubstTower, RealizeError> {
    t.try_map(&mut frame)
}

pub fn config(c: &EnvConfig) -> Result<SConfig, RealizeError> {
    Ok(match c {
        Config::Eval { term, env, tower } => Config::Eval {
            term: close(term, env, &[])?,
            env: (),
            tower: self::tower(tower)?,
        },
        Config::Cont { level, value: v, tower } => Config::Cont {
            level: *level,
            value: value(v)?,
            tower: self::tower(tower)?,
        },
        Config::Final(v) => Config::Final(value(v)?),
    })
}
