//! Capture-avoiding substitution of values for variables.

use std::collections::BTreeSet;
use std::rc::Rc;

use thiserror::Error;

use super::{free_vars, print_term, Name, Term, TermRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("cannot substitute non-value `{0}`")]
    NotAValue(String),
}

/// `t{x := v}`. A binder that would capture a free variable of `v` is
/// renamed to the least `y1`, `y2`, … not occurring anywhere in `t` or `v`.
pub fn substitute(t: &Term, x: &Name, v: &Term) -> Result<Term, SubstError> {
    if !v.is_value() {
        return Err(SubstError::NotAValue(print_term(v)));
    }
    let root = Rc::new(t.clone());
    let mut s = Subst::new(&root, vec![(x.clone(), v.clone())]);
    Ok(Rc::unwrap_or_clone(s.go(&root)))
}

/// Simultaneous substitution of closed values. Since nothing can be
/// captured, no binder is ever renamed.
pub fn instantiate(t: &TermRef, map: &[(Name, Term)]) -> TermRef {
    if map.is_empty() {
        return t.clone();
    }
    Subst::new(t, map.to_vec()).go(t)
}

struct Subst<'a> {
    root: &'a TermRef,
    map: Vec<(Name, Term)>,
    value_fv: BTreeSet<Name>,
    used: Option<BTreeSet<Name>>,
}

fn all_names(t: &Term, out: &mut BTreeSet<Name>) {
    t.visit(&mut |n| match n {
        Term::Var(x) | Term::Lam(x, _) | Term::Shift(_, x, _) => {
            out.insert(x.clone());
        }
        Term::Let(x, _, _) => {
            out.insert(x.clone());
        }
        Term::Fix { fun, param, .. } => {
            out.insert(fun.clone());
            out.insert(param.clone());
        }
        Term::LCase { head, tail, .. } => {
            out.insert(head.clone());
            out.insert(tail.clone());
        }
        _ => {}
    });
}

impl<'a> Subst<'a> {
    fn new(root: &'a TermRef, map: Vec<(Name, Term)>) -> Self {
        let value_fv = map.iter().flat_map(|(_, v)| free_vars(v)).collect();
        Subst {
            root,
            map,
            value_fv,
            used: None,
        }
    }

    fn fresh(&mut self, y: &Name) -> Name {
        let used = self.used.get_or_insert_with(|| {
            let mut s = BTreeSet::new();
            all_names(self.root, &mut s);
            for (_, v) in &self.map {
                all_names(v, &mut s);
            }
            s
        });
        (1..)
            .map(|k| Name::new(&format!("{y}{k}")))
            .find(|cand| !used.contains(cand))
            .expect("an unused name exists")
    }

    /// Substitutes under `binders`, renaming any that would capture.
    /// `bodies` share the binders; returns the (possibly renamed) binders and
    /// the new bodies.
    fn under(&mut self, binders: &[&Name], bodies: &[&TermRef]) -> (Vec<Name>, Vec<TermRef>) {
        let saved = self.map.clone();
        self.map.retain(|(k, _)| !binders.contains(&k));
        let mut names: Vec<Name> = binders.iter().map(|b| (*b).clone()).collect();
        let mut bodies: Vec<TermRef> = bodies.iter().map(|b| (*b).clone()).collect();
        if !self.map.is_empty() {
            for idx in 0..names.len() {
                let b = names[idx].clone();
                if !self.value_fv.contains(&b) {
                    continue;
                }
                let needed = bodies.iter().any(|body| {
                    let fv = free_vars(body);
                    self.map.iter().any(|(k, _)| fv.contains(k))
                });
                if !needed {
                    continue;
                }
                let fresh = self.fresh(&b);
                let var = Term::Var(fresh.clone());
                for body in bodies.iter_mut() {
                    *body = Subst::new(body, vec![(b.clone(), var.clone())]).go(body);
                }
                names[idx] = fresh;
            }
            bodies = bodies.iter().map(|body| self.go(body)).collect();
        }
        self.map = saved;
        (names, bodies)
    }

    fn go(&mut self, t: &TermRef) -> TermRef {
        if self.map.is_empty() {
            return t.clone();
        }
        let same2 = |a: &TermRef, a2: &TermRef, b: &TermRef, b2: &TermRef| Rc::ptr_eq(a, a2) && Rc::ptr_eq(b, b2);
        match &**t {
            Term::Lit(_) | Term::Nil | Term::Captured(_) => t.clone(),
            Term::Var(y) => match self.map.iter().find(|(k, _)| k == y) {
                Some((_, v)) => Rc::new(v.clone()),
                None => t.clone(),
            },
            Term::Lam(y, b) => {
                let (ns, bs) = self.under(&[y], &[b]);
                if ns[0] == *y && Rc::ptr_eq(&bs[0], b) {
                    t.clone()
                } else {
                    Rc::new(Term::Lam(ns[0].clone(), bs[0].clone()))
                }
            }
            Term::Shift(i, k, b) => {
                let (ns, bs) = self.under(&[k], &[b]);
                if ns[0] == *k && Rc::ptr_eq(&bs[0], b) {
                    t.clone()
                } else {
                    Rc::new(Term::Shift(*i, ns[0].clone(), bs[0].clone()))
                }
            }
            Term::Fix { fun, param, body } => {
                let (ns, bs) = self.under(&[fun, param], &[body]);
                if ns[0] == *fun && ns[1] == *param && Rc::ptr_eq(&bs[0], body) {
                    t.clone()
                } else {
                    Rc::new(Term::Fix {
                        fun: ns[0].clone(),
                        param: ns[1].clone(),
                        body: bs[0].clone(),
                    })
                }
            }
            Term::Succ(b) => {
                let b2 = self.go(b);
                if Rc::ptr_eq(&b2, b) {
                    t.clone()
                } else {
                    Rc::new(Term::Succ(b2))
                }
            }
            Term::Reset(i, b) => {
                let b2 = self.go(b);
                if Rc::ptr_eq(&b2, b) {
                    t.clone()
                } else {
                    Rc::new(Term::Reset(*i, b2))
                }
            }
            Term::App(a, b) | Term::Cons(a, b) | Term::Add(a, b) | Term::Gt(a, b) => {
                let (a2, b2) = (self.go(a), self.go(b));
                if same2(a, &a2, b, &b2) {
                    return t.clone();
                }
                Rc::new(match &**t {
                    Term::App(..) => Term::App(a2, b2),
                    Term::Cons(..) => Term::Cons(a2, b2),
                    Term::Add(..) => Term::Add(a2, b2),
                    _ => Term::Gt(a2, b2),
                })
            }
            Term::Let(y, a, b) => {
                let a2 = self.go(a);
                let (ns, bs) = self.under(&[y], &[b]);
                if Rc::ptr_eq(&a2, a) && ns[0] == *y && Rc::ptr_eq(&bs[0], b) {
                    t.clone()
                } else {
                    Rc::new(Term::Let(ns[0].clone(), a2, bs[0].clone()))
                }
            }
            Term::If0(a, b, c) => {
                let (a2, b2, c2) = (self.go(a), self.go(b), self.go(c));
                if same2(a, &a2, b, &b2) && Rc::ptr_eq(c, &c2) {
                    t.clone()
                } else {
                    Rc::new(Term::If0(a2, b2, c2))
                }
            }
            Term::LCase {
                scrutinee,
                nil,
                head,
                tail,
                cons,
            } => {
                let (s2, n2) = (self.go(scrutinee), self.go(nil));
                let (ns, bs) = self.under(&[head, tail], &[cons]);
                if same2(scrutinee, &s2, nil, &n2) && ns[0] == *head && ns[1] == *tail && Rc::ptr_eq(&bs[0], cons) {
                    t.clone()
                } else {
                    Rc::new(Term::LCase {
                        scrutinee: s2,
                        nil: n2,
                        head: ns[0].clone(),
                        tail: ns[1].clone(),
                        cons: bs[0].clone(),
                    })
                }
            }
        }
    }
}
