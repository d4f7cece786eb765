//! Results shared by every backend.

use std::fmt;

/// Why a program got stuck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StuckKind {
    UnboundVariable,
    NotAFunction,
    NotAnInteger,
    NotAList,
}

impl fmt::Display for StuckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StuckKind::UnboundVariable => "unbound variable",
            StuckKind::NotAFunction => "not a function",
            StuckKind::NotAnInteger => "not an integer",
            StuckKind::NotAList => "not a list",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stuck {
    pub kind: StuckKind,
    /// Human-readable description of the offending construct.
    pub detail: String,
}

impl Stuck {
    pub fn new(kind: StuckKind, detail: impl Into<String>) -> Self {
        Stuck {
            kind,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Stuck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stuck ({}): {}", self.kind, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<V> {
    Value(V),
    Stuck(Stuck),
    /// The step budget ran out.
    Timeout,
}

impl<V> Outcome<V> {
    pub fn class(&self) -> OutcomeClass {
        match self {
            Outcome::Value(_) => OutcomeClass::Value,
            Outcome::Stuck(s) => OutcomeClass::Stuck(s.kind),
            Outcome::Timeout => OutcomeClass::Timeout,
        }
    }

    pub fn map<W>(self, f: impl FnOnce(V) -> W) -> Outcome<W> {
        match self {
            Outcome::Value(v) => Outcome::Value(f(v)),
            Outcome::Stuck(s) => Outcome::Stuck(s),
            Outcome::Timeout => Outcome::Timeout,
        }
    }

    pub fn value(&self) -> Option<&V> {
        match self {
            Outcome::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Process exit code for this outcome: 0 value, 1 stuck, 2 timeout.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Value(_) => 0,
            Outcome::Stuck(_) => 1,
            Outcome::Timeout => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutcomeClass {
    Value,
    Stuck(StuckKind),
    Timeout,
}

/// What every backend's final value looks like from the outside: integers
/// and list structure are visible, functions are opaque.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Int(i64),
    Nil,
    Cons(Box<Observable>, Box<Observable>),
    Function,
}

impl Observable {
    pub fn from_int_list(xs: &[i64]) -> Observable {
        xs.iter().rev().fold(Observable::Nil, |acc, &x| {
            Observable::Cons(Box::new(Observable::Int(x)), Box::new(acc))
        })
    }

    pub fn from_int_lists(xss: &[Vec<i64>]) -> Observable {
        xss.iter().rev().fold(Observable::Nil, |acc, xs| {
            Observable::Cons(Box::new(Observable::from_int_list(xs)), Box::new(acc))
        })
    }

    pub fn as_int_list(&self) -> Option<Vec<i64>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Observable::Nil => return Some(out),
                Observable::Cons(h, t) => {
                    match **h {
                        Observable::Int(m) => out.push(m),
                        _ => return None,
                    }
                    cur = t;
                }
                _ => return None,
            }
        }
    }

    pub fn as_int_list_list(&self) -> Option<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Observable::Nil => return Some(out),
                Observable::Cons(h, t) => {
                    out.push(h.as_int_list()?);
                    cur = t;
                }
                _ => return None,
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Int(m) => write!(f, "{m}"),
            Observable::Function => f.write_str("<function>"),
            Observable::Nil | Observable::Cons(..) => {
                f.write_str("[")?;
                let mut cur = self;
                let mut first = true;
                while let Observable::Cons(h, t) = cur {
                    if !first {
                        f.write_str(", ")?;
                    }
                    first = false;
                    write!(f, "{h}")?;
                    cur = t;
                }
                if !matches!(cur, Observable::Nil) {
                    write!(f, " . {cur}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// A finished run: outcome, number of steps taken, and the trace if one
/// was requested.
#[derive(Clone, Debug)]
pub struct Run<V> {
    pub outcome: Outcome<V>,
    pub steps: u64,
    pub trace: Option<Vec<String>>,
}

/// Runs `f` on a thread with a large stack. Deeply nested terms and long
/// continuation chains are traversed and dropped recursively; this is the
/// recursion guard for all backends.
pub fn with_stack<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    with_stack_size(STACK_SIZE, f)
}

/// Default stack size used by [`with_stack`].
pub const STACK_SIZE: usize = 512 << 20;

pub fn with_stack_size<R: Send>(bytes: usize, f: impl FnOnce() -> R + Send) -> R {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(bytes)
            .spawn_scoped(s, f)
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_display() {
        let l = Observable::Cons(
            Box::new(Observable::Int(1)),
            Box::new(Observable::Cons(Box::new(Observable::Int(2)), Box::new(Observable::Nil))),
        );
        assert_eq!(l.to_string(), "[1, 2]");
        assert_eq!(l.as_int_list(), Some(vec![1, 2]));
        assert_eq!(Observable::Nil.to_string(), "[]");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Value(()).exit_code(), 0);
        assert_eq!(Outcome::<()>::Stuck(Stuck::new(StuckKind::NotAList, "x")).exit_code(), 1);
        assert_eq!(Outcome::<()>::Timeout.exit_code(), 2);
    }
}
