//! Minimal s-expressions for the line-oriented text formats.
//!
//! Three kinds of element: parenthesized lists, double-quoted strings
//! (with `\"` and `\\` escapes) and bare atoms such as `???`, `leaf` or `17`.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    List(Vec<Sexp>),
    Str(String),
    Atom(String),
}

impl Sexp {
    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Sexp::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// Appends `s` to `out` as a quoted string.
pub fn write_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

impl std::fmt::Display for Sexp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::Str(s) => {
                let mut out = String::with_capacity(s.len() + 2);
                write_quoted(&mut out, s);
                f.write_str(&out)
            }
            Sexp::List(items) => {
                f.write_char('(')?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_char(' ')?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_char(')')
            }
        }
    }
}

/// Position-annotated failure from [`parse`]; `column` is a 1-based char offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SexpError {
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for SexpError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> SexpError {
        SexpError { column: self.pos + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn parse_expr(&mut self) -> Result<Sexp, SexpError> {
        self.skip_ws();
        match self.chars.get(self.pos) {
            None => Err(self.err("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.chars.get(self.pos) {
                        None => return Err(self.err("unbalanced parenthesis: missing `)`")),
                        Some(')') => {
                            self.pos += 1;
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(self.parse_expr()?),
                    }
                }
            }
            Some(')') => Err(self.err("unbalanced parenthesis: unexpected `)`")),
            Some('"') => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    match self.chars.get(self.pos) {
                        None => return Err(self.err("unterminated string")),
                        Some('\\') => {
                            let Some(&next) = self.chars.get(self.pos + 1) else {
                                return Err(self.err("dangling escape"));
                            };
                            s.push(next);
                            self.pos += 2;
                        }
                        Some('"') => {
                            self.pos += 1;
                            return Ok(Sexp::Str(s));
                        }
                        Some(&c) => {
                            s.push(c);
                            self.pos += 1;
                        }
                    }
                }
            }
            Some(_) => {
                let start = self.pos;
                while let Some(&c) = self.chars.get(self.pos) {
                    if c.is_whitespace() || c == '(' || c == ')' || c == '"' {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Sexp::Atom(self.chars[start..self.pos].iter().collect()))
            }
        }
    }
}

/// Parses exactly one expression from `src`; trailing non-whitespace is an error.
pub fn parse(src: &str) -> Result<Sexp, SexpError> {
    let mut p = Parser { chars: src.chars().collect(), pos: 0, _src: src };
    let expr = p.parse_expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(if p.chars[p.pos] == ')' {
            p.err("unbalanced parenthesis: unexpected `)`")
        } else {
            p.err("trailing input after expression")
        });
    }
    Ok(expr)
}
