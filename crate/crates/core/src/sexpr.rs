//! A small S-expression reader shared by the term, arithmetic and monoid
//! parsers. `;` starts a comment that runs to the end of the line.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Atom(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at {pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<SExpr, SyntaxError> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek() {
            None => Err(SyntaxError::new(start, "unexpected end of input")),
            Some(')') => Err(SyntaxError::new(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(SyntaxError::new(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(SExpr::Atom(s, start))
            }
        }
    }
}

/// Reads exactly one S-expression from `text`.
pub fn read_one(text: &str) -> Result<SExpr, SyntaxError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let e = r.read()?;
    r.skip_blank();
    if r.chars.peek().is_some() {
        return Err(SyntaxError::new(r.pos, "trailing input after expression"));
    }
    Ok(e)
}

/// Parses an atom as a (possibly negative) decimal integer.
pub fn atom_int(s: &str) -> Option<i64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_comments() {
        let e = read_one("; header\n(a (b 1) ; trailing\n c)").unwrap();
        match e {
            SExpr::List(items, pos) => {
                assert_eq!(pos, Pos { line: 2, col: 1 });
                assert_eq!(items.len(), 3);
                assert_eq!(items[2].pos(), Pos { line: 3, col: 2 });
            }
            _ => panic!("expected a list"),
        }
    }

    #[test]
    fn reports_positions() {
        let err = read_one("(a\n  (b").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
        assert!(read_one("a b").is_err());
        assert!(read_one(")").is_err());
    }

    #[test]
    fn integers() {
        assert_eq!(atom_int("42"), Some(42));
        assert_eq!(atom_int("-3"), Some(-3));
        assert_eq!(atom_int("-"), None);
        assert_eq!(atom_int("4a"), None);
        assert_eq!(atom_int("99999999999999999999"), None);
    }
}
