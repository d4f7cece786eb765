use std::rc::Rc;

use super::{Name, Term};
use crate::sexpr::{atom_int, read_one, SExpr, SyntaxError};

/// Words that cannot be used as variable names.
pub const KEYWORDS: &[&str] = &[
    "lambda", "succ", "reset", "shift", "nil", "cons", "lcase", "if0", "let", "fix", "add", "gt",
];

/// Parses one program in the S-expression surface syntax.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    from_sexpr(&read_one(text)?)
}

fn err<T>(e: &SExpr, msg: impl Into<String>) -> Result<T, SyntaxError> {
    Err(SyntaxError::new(e.pos(), msg))
}

fn name(e: &SExpr) -> Result<Name, SyntaxError> {
    match e {
        SExpr::Atom(s, _) if atom_int(s).is_none() && !KEYWORDS.contains(&s.as_str()) && !s.starts_with('#') => {
            Ok(Name::new(s))
        }
        _ => err(e, "expected a variable name"),
    }
}

fn names<const N: usize>(e: &SExpr) -> Result<[Name; N], SyntaxError> {
    match e {
        SExpr::List(items, _) if items.len() == N => {
            let v = items.iter().map(name).collect::<Result<Vec<_>, _>>()?;
            Ok(v.try_into().unwrap_or_else(|_| unreachable!()))
        }
        _ => err(e, format!("expected a list of {N} name(s)")),
    }
}

fn level(e: &SExpr) -> Result<usize, SyntaxError> {
    match e {
        SExpr::Atom(s, _) => match atom_int(s) {
            Some(i) if i >= 1 => Ok(i as usize),
            Some(_) => err(e, "level index must be at least 1"),
            None => err(e, "expected a level index"),
        },
        _ => err(e, "expected a level index"),
    }
}

fn arity(e: &SExpr, items: &[SExpr], want: usize, form: &str) -> Result<(), SyntaxError> {
    if items.len() == want + 1 {
        Ok(())
    } else {
        err(e, format!("`{form}` takes {want} argument(s)"))
    }
}

fn sub(e: &SExpr) -> Result<Rc<Term>, SyntaxError> {
    from_sexpr(e).map(Rc::new)
}

fn from_sexpr(e: &SExpr) -> Result<Term, SyntaxError> {
    match e {
        SExpr::Atom(s, _) => {
            if let Some(m) = atom_int(s) {
                Ok(Term::Lit(m))
            } else if s == "nil" {
                Ok(Term::Nil)
            } else {
                name(e).map(Term::Var)
            }
        }
        SExpr::List(items, _) => {
            let head = match items.first() {
                Some(SExpr::Atom(s, _)) => s.as_str(),
                Some(_) => "",
                None => return err(e, "empty application"),
            };
            match head {
                "lambda" => {
                    arity(e, items, 2, head)?;
                    let [x] = names::<1>(&items[1])?;
                    Ok(Term::Lam(x, sub(&items[2])?))
                }
                "succ" => {
                    arity(e, items, 1, head)?;
                    Ok(Term::Succ(sub(&items[1])?))
                }
                "reset" => {
                    arity(e, items, 2, head)?;
                    Ok(Term::Reset(level(&items[1])?, sub(&items[2])?))
                }
                "shift" => {
                    arity(e, items, 3, head)?;
                    let [k] = names::<1>(&items[2])?;
                    Ok(Term::Shift(level(&items[1])?, k, sub(&items[3])?))
                }
                "cons" | "add" | "gt" => {
                    arity(e, items, 2, head)?;
                    let (a, b) = (sub(&items[1])?, sub(&items[2])?);
                    Ok(match head {
                        "cons" => Term::Cons(a, b),
                        "add" => Term::Add(a, b),
                        _ => Term::Gt(a, b),
                    })
                }
                "lcase" => {
                    arity(e, items, 4, head)?;
                    let [h, tl] = names::<2>(&items[3])?;
                    Ok(Term::LCase {
                        scrutinee: sub(&items[1])?,
                        nil: sub(&items[2])?,
                        head: h,
                        tail: tl,
                        cons: sub(&items[4])?,
                    })
                }
                "if0" => {
                    arity(e, items, 3, head)?;
                    Ok(Term::If0(sub(&items[1])?, sub(&items[2])?, sub(&items[3])?))
                }
                "let" => {
                    arity(e, items, 2, head)?;
                    match &items[1] {
                        SExpr::List(b, _) if b.len() == 2 => Ok(Term::Let(name(&b[0])?, sub(&b[1])?, sub(&items[2])?)),
                        other => err(other, "expected `(NAME term)` binding"),
                    }
                }
                "fix" => {
                    arity(e, items, 2, head)?;
                    let [f, x] = names::<2>(&items[1])?;
                    Ok(Term::Fix {
                        fun: f,
                        param: x,
                        body: sub(&items[2])?,
                    })
                }
                "nil" => err(e, "`nil` is not a function"),
                _ => {
                    if items.len() != 2 {
                        return err(e, "application takes exactly one argument");
                    }
                    Ok(Term::App(sub(&items[0])?, sub(&items[1])?))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_eq;

    #[test]
    fn literal_and_lambda() {
        assert_eq!(parse_term("5").unwrap(), Term::Lit(5));
        assert_eq!(parse_term("(lambda (x) x)").unwrap(), Term::lam("x", Term::var("x")));
    }

    #[test]
    fn reset_shift() {
        let t = parse_term("(reset 1 (succ (shift 1 (k) 5)))").unwrap();
        assert_eq!(t, Term::reset(1, Term::succ(Term::shift(1, "k", Term::lit(5)))));
    }

    #[test]
    fn extended_forms() {
        let t = parse_term("(let (f (fix (f n) (if0 n 0 (f (add n -1))))) (lcase (cons 1 nil) 0 (h t) (gt h 0)))").unwrap();
        let want = Term::let_(
            "f",
            Term::fix(
                "f",
                "n",
                Term::if0(
                    Term::var("n"),
                    Term::lit(0),
                    Term::app(Term::var("f"), Term::add(Term::var("n"), Term::lit(-1))),
                ),
            ),
            Term::lcase(
                Term::cons(Term::lit(1), Term::Nil),
                Term::lit(0),
                "h",
                "t",
                Term::gt(Term::var("h"), Term::lit(0)),
            ),
        );
        assert!(alpha_eq(&t, &want));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_term("(reset 0 1)").is_err());
        assert!(parse_term("(f 1 2)").is_err());
        assert!(parse_term("(lambda (succ) 1)").is_err());
        assert!(parse_term("()").is_err());
        let e = parse_term("(succ\n  (shift 1 k 5))").unwrap_err();
        assert_eq!((e.pos.line, e.pos.col), (2, 12));
    }
}
