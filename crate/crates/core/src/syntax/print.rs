use std::fmt::Write;

use super::{Frame, SubstFrame, SubstTower, Term};

/// Prints a term in the surface syntax. Captured contexts print as
/// `#ctx<i>{C_i / … / C_1}`, which is diagnostic output only.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Lit(m) => write!(out, "{m}").unwrap(),
        Term::Var(x) => out.push_str(x.as_str()),
        Term::Nil => out.push_str("nil"),
        Term::Lam(x, b) => {
            write!(out, "(lambda ({x}) ").unwrap();
            write_term(out, b);
            out.push(')');
        }
        Term::App(a, b) => {
            out.push('(');
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Term::Succ(b) => {
            out.push_str("(succ ");
            write_term(out, b);
            out.push(')');
        }
        Term::Reset(i, b) => {
            write!(out, "(reset {i} ").unwrap();
            write_term(out, b);
            out.push(')');
        }
        Term::Shift(i, k, b) => {
            write!(out, "(shift {i} ({k}) ").unwrap();
            write_term(out, b);
            out.push(')');
        }
        Term::Captured(tower) => write_captured(out, tower),
        Term::Cons(a, b) | Term::Add(a, b) | Term::Gt(a, b) => {
            let op = match t {
                Term::Cons(..) => "cons",
                Term::Add(..) => "add",
                _ => "gt",
            };
            write!(out, "({op} ").unwrap();
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Term::LCase {
            scrutinee,
            nil,
            head,
            tail,
            cons,
        } => {
            out.push_str("(lcase ");
            write_term(out, scrutinee);
            out.push(' ');
            write_term(out, nil);
            write!(out, " ({head} {tail}) ").unwrap();
            write_term(out, cons);
            out.push(')');
        }
        Term::If0(a, b, c) => {
            out.push_str("(if0 ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(' ');
            write_term(out, c);
            out.push(')');
        }
        Term::Let(x, a, b) => {
            write!(out, "(let ({x} ").unwrap();
            write_term(out, a);
            out.push_str(") ");
            write_term(out, b);
            out.push(')');
        }
        Term::Fix { fun, param, body } => {
            write!(out, "(fix ({fun} {param}) ").unwrap();
            write_term(out, body);
            out.push(')');
        }
    }
}

fn write_captured(out: &mut String, tower: &SubstTower) {
    write!(out, "#ctx{}{{", tower.height()).unwrap();
    write_levels(out, tower, " / ");
    out.push('}');
}

/// Levels from the outermost `C_h` down to `C_1`, separated by `sep`.
fn write_levels(out: &mut String, tower: &SubstTower, sep: &str) {
    for j in (2..=tower.height()).rev() {
        write_stack(out, tower.stack(j));
        out.push_str(sep);
    }
    write_frames(out, &tower.frames);
}

fn write_stack(out: &mut String, stack: &[SubstTower]) {
    write!(out, "{}:{{", stack.len()).unwrap();
    for (idx, t) in stack.iter().rev().enumerate() {
        if idx > 0 {
            out.push_str(", ");
        }
        out.push('<');
        write_levels(out, t, " / ");
        out.push('>');
    }
    out.push('}');
}

fn write_frames(out: &mut String, frames: &[SubstFrame]) {
    write!(out, "{}:[", frames.len()).unwrap();
    for (idx, f) in frames.iter().rev().enumerate() {
        if idx > 0 {
            out.push_str(", ");
        }
        write_frame(out, f);
    }
    out.push(']');
}

fn write_frame(out: &mut String, f: &SubstFrame) {
    out.push_str(f.tag());
    match f {
        Frame::Succ => {}
        Frame::Arg(t, ()) | Frame::ConsHead(t, ()) | Frame::AddLeft(t, ()) | Frame::GtLeft(t, ()) => {
            out.push('(');
            write_term(out, t);
            out.push(')');
        }
        Frame::Fun(v) | Frame::ConsTail(v) | Frame::AddRight(v) | Frame::GtRight(v) => {
            out.push('(');
            write_term(out, v);
            out.push(')');
        }
        Frame::If0 { then, other, .. } => {
            out.push('(');
            write_term(out, then);
            out.push_str(", ");
            write_term(out, other);
            out.push(')');
        }
        Frame::LCase {
            nil, head, tail, cons, ..
        } => {
            out.push('(');
            write_term(out, nil);
            write!(out, ", ({head} {tail}) ").unwrap();
            write_term(out, cons);
            out.push(')');
        }
        Frame::Let { var, body, .. } => {
            write!(out, "({var}, ").unwrap();
            write_term(out, body);
            out.push(')');
        }
    }
}

pub fn print_frame(f: &SubstFrame) -> String {
    let mut out = String::new();
    write_frame(&mut out, f);
    out
}

/// A frame list, innermost frame first, prefixed by its length.
pub fn print_frames(frames: &[SubstFrame]) -> String {
    let mut out = String::new();
    write_frames(&mut out, frames);
    out
}

/// The levels of a machine tower for a trace line:
/// `C_{n+1} | … | C_2 | C_1`.
pub fn print_tower_levels(tower: &SubstTower) -> String {
    let mut out = String::new();
    write_levels(&mut out, tower, " | ");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{alpha_eq, parse_term};

    #[test]
    fn simple_terms() {
        assert_eq!(print_term(&Term::lit(5)), "5");
        assert_eq!(print_term(&Term::succ(Term::lit(0))), "(succ 0)");
    }

    #[test]
    fn round_trip() {
        let src = "(let (p (lambda (m) (gt m 2))) (lcase (cons 1 nil) (shift 2 (k) (k 0)) (h t) (reset 1 (if0 h (fix (f x) (f x)) (add h -1)))))";
        let t = parse_term(src).unwrap();
        assert_eq!(print_term(&t), src);
        assert!(alpha_eq(&parse_term(&print_term(&t)).unwrap(), &t));
    }

    #[test]
    fn towers() {
        let mut t = SubstTower::empty(2);
        t.frames.push(Frame::Succ);
        t.frames.push(Frame::Arg(std::rc::Rc::new(Term::lit(1)), ()));
        assert_eq!(print_tower_levels(&t), "0:{} | 2:[ARG(1), SUCC]");
        let inner = t.capture(1);
        t.stack_mut(2).push(inner.clone());
        assert_eq!(print_tower_levels(&t), "1:{<2:[ARG(1), SUCC]>} | 0:[]");
        assert_eq!(print_term(&Term::Captured(std::rc::Rc::new(inner))), "#ctx1{2:[ARG(1), SUCC]}");
    }
}
