//! The in-repository corpus of object-language programs and host reference
//! implementations of the prefix functions.
//!
//! A corpus file holds one program, preceded by comment lines of the form
//! `; level: N` and `; expect: RESULT`, where `RESULT` is a printed
//! observable, `stuck` or `timeout`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::rc::Rc;

use thiserror::Error;

use crate::outcome::{Observable, Outcome};
use crate::syntax::{parse_term, validate_program, Name, Term};
use crate::SyntaxError;

/// Directory holding the corpus shipped with the sources.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    /// The printed observable, e.g. `[0, 3]` or `14`.
    Value(String),
    Stuck,
    Timeout,
}

impl Expect {
    pub fn matches(&self, outcome: &Outcome<Observable>) -> bool {
        match (self, outcome) {
            (Expect::Value(s), Outcome::Value(v)) => *s == v.to_string(),
            (Expect::Stuck, Outcome::Stuck(_)) | (Expect::Timeout, Outcome::Timeout) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Value(s) => f.write_str(s),
            Expect::Stuck => f.write_str("stuck"),
            Expect::Timeout => f.write_str("timeout"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusProgram {
    pub name: String,
    /// The least level at which the program is meaningful.
    pub level: usize,
    pub expect: Option<Expect>,
    pub term: Term,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{}:{}: {}", .source.pos.line, .source.pos.col, .source.message)]
    Syntax { path: String, source: SyntaxError },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn header(text: &str, key: &str) -> Option<String> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.starts_with(';') || l.is_empty())
        .filter_map(|l| l.trim_start_matches(';').trim().strip_prefix(key))
        .map(|rest| rest.trim_start_matches(':').trim().to_string())
        .next()
}

/// The level stated in a `; level: N` header, if any and well-formed.
pub fn declared_level(text: &str) -> Option<usize> {
    header(text, "level").and_then(|s| s.parse().ok())
}

/// Parses one corpus file's text.
pub fn parse_program(name: &str, text: &str) -> Result<CorpusProgram, CorpusError> {
    let term = parse_term(text).map_err(|source| CorpusError::Syntax {
        path: name.to_string(),
        source,
    })?;
    let invalid = |message: String| CorpusError::Invalid {
        path: name.to_string(),
        message,
    };
    let level = match header(text, "level") {
        Some(s) => s.parse().map_err(|_| invalid(format!("bad level `{s}`")))?,
        None => term.max_level().max(1),
    };
    validate_program(&term, level).map_err(|e| invalid(e.to_string()))?;
    let expect = header(text, "expect").map(|s| match s.as_str() {
        "stuck" => Expect::Stuck,
        "timeout" => Expect::Timeout,
        _ => Expect::Value(s),
    });
    Ok(CorpusProgram {
        name: name.to_string(),
        level,
        expect,
        term,
    })
}

pub fn load(path: &Path) -> Result<CorpusProgram, CorpusError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: shown.clone(),
        source,
    })?;
    let name = path.file_stem().map_or(shown, |s| s.to_string_lossy().into_owned());
    parse_program(&name, &text)
}

/// Every `*.cps` file in `dir`, sorted by name.
pub fn load_dir(dir: &Path) -> Result<Vec<CorpusProgram>, CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths = Vec::new();
    for e in entries {
        let e = e.map_err(|source| CorpusError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let p = e.path();
        if p.extension().is_some_and(|x| x == "cps") {
            paths.push(p);
        }
    }
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}

/// Replaces the values of the leading `let`-bindings of `p` (by the
/// predicate `λm. m > threshold`) and of `xs` (by the list `xs`). `None`
/// when a requested binding is missing.
pub fn with_inputs(program: &Term, threshold: Option<i64>, xs: &[i64]) -> Option<Term> {
    fn go(t: &Term, threshold: Option<i64>, xs: &[i64], seen: (bool, bool)) -> Option<Term> {
        match t {
            Term::Let(x, v, body) => {
                let (mut p_seen, mut xs_seen) = seen;
                let v = match x.as_str() {
                    "p" if threshold.is_some() => {
                        p_seen = true;
                        Rc::new(predicate(threshold.unwrap()))
                    }
                    "xs" => {
                        xs_seen = true;
                        Rc::new(Term::int_list(xs))
                    }
                    _ => v.clone(),
                };
                if p_seen == threshold.is_some() && xs_seen {
                    return Some(Term::Let(x.clone(), v, body.clone()));
                }
                Some(Term::Let(x.clone(), v, Rc::new(go(body, threshold, xs, (p_seen, xs_seen))?)))
            }
            _ => None,
        }
    }
    go(program, threshold, xs, (false, false))
}

/// `(lambda (m) (gt m threshold))`.
pub fn predicate(threshold: i64) -> Term {
    Term::Lam(Name::new("m"), Rc::new(Term::gt(Term::var("m"), Term::lit(threshold))))
}

/// The first prefix of `xs` whose last element satisfies `p`, or the empty
/// list.
pub fn ref_find_first_prefix(p: impl Fn(i64) -> bool, xs: &[i64]) -> Vec<i64> {
    let mut acc = Vec::new();
    for &x in xs {
        acc.push(x);
        if p(x) {
            return acc;
        }
    }
    Vec::new()
}

/// Every prefix of `xs` whose last element satisfies `p`, shortest first.
pub fn ref_find_all_prefixes(p: impl Fn(i64) -> bool, xs: &[i64]) -> Vec<Vec<i64>> {
    fn visit(p: &dyn Fn(i64) -> bool, xs: &[i64], acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if let Some((&x, rest)) = xs.split_first() {
            acc.push(x);
            if p(x) {
                out.push(acc.clone());
            }
            visit(p, rest, acc, out);
        }
    }
    let mut out = Vec::new();
    visit(&p, xs, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_prefix() {
        let gt2 = |m| m > 2;
        assert_eq!(ref_find_first_prefix(gt2, &[0, 3, 1, 4, 2, 5]), vec![0, 3]);
        assert_eq!(ref_find_first_prefix(gt2, &[]), Vec::<i64>::new());
        assert_eq!(ref_find_first_prefix(|m| m > 9, &[1, 2, 3]), Vec::<i64>::new());
    }

    #[test]
    fn all_prefixes() {
        let gt2 = |m| m > 2;
        assert_eq!(
            ref_find_all_prefixes(gt2, &[0, 3, 1, 4, 2, 5]),
            vec![vec![0, 3], vec![0, 3, 1, 4], vec![0, 3, 1, 4, 2, 5]]
        );
        assert!(ref_find_all_prefixes(gt2, &[]).is_empty());
        assert_eq!(ref_find_all_prefixes(|m| m > 0, &[1]), vec![vec![1]]);
    }

    #[test]
    fn headers() {
        let p = parse_program("t", "; level: 2\n; expect: [1, 2]\n(reset 2 nil)").unwrap();
        assert_eq!(p.level, 2);
        assert_eq!(p.expect, Some(Expect::Value("[1, 2]".into())));
        assert!(parse_program("t", "; level: 1\n(reset 2 nil)").is_err());
    }

    #[test]
    fn inputs_are_replaced() {
        let t = parse_term("(let (p 0) (let (xs nil) (let (q xs) q)))").unwrap();
        let got = with_inputs(&t, Some(5), &[7]).unwrap();
        let want = Term::let_(
            "p",
            predicate(5),
            Term::let_("xs", Term::int_list(&[7]), parse_term("(let (q xs) q)").unwrap()),
        );
        assert_eq!(got, want);
        assert!(with_inputs(&parse_term("(let (xs nil) xs)").unwrap(), Some(1), &[]).is_none());
    }
}
