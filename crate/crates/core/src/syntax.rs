//! Concrete syntax for L terms.
//!
//! ```text
//! term ::= nat | "\" term | term term | "(" term ")"
//! ```
//! Application associates to the left and `\` (or `λ`) extends as far right
//! as possible.

use std::fmt::Write as _;

use thiserror::Error;

use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct TermSyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    /// `λλ(1 (λλ1) 0)`
    DeBruijn,
    /// Like [`Style::DeBruijn`] with `\` for the binder.
    Ascii,
    /// `λa b. a`
    Named,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Nat(usize),
    Lam,
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>, TermSyntaxError> {
    let mut toks = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, cc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '\\' | 'λ' => {
                chars.next();
                toks.push((Tok::Lam, l, cc));
            }
            '(' => {
                chars.next();
                toks.push((Tok::Open, l, cc));
            }
            ')' => {
                chars.next();
                toks.push((Tok::Close, l, cc));
            }
            c if c.is_ascii_digit() => {
                let mut n: usize = 0;
                while let Some(&d) = chars.peek() {
                    let Some(v) = d.to_digit(10) else { break };
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(v as usize))
                        .ok_or(TermSyntaxError {
                            line: l,
                            column: cc,
                            message: "index too large".into(),
                        })?;
                    chars.next();
                    col += 1;
                }
                toks.push((Tok::Nat(n), l, cc));
                continue;
            }
            other => {
                return Err(TermSyntaxError {
                    line: l,
                    column: cc,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
        col += 1;
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn err(&self, message: &str) -> TermSyntaxError {
        let (line, column) = self.toks.get(self.pos).map(|(_, l, c)| (*l, *c)).unwrap_or(self.end);
        TermSyntaxError {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn term(&mut self) -> Result<Term, TermSyntaxError> {
        let mut head: Option<Term> = None;
        loop {
            let atom = match self.peek() {
                None | Some(Tok::Close) => break,
                Some(Tok::Lam) => {
                    self.pos += 1;
                    Term::lam(self.term()?)
                }
                Some(Tok::Nat(n)) => {
                    let n = *n;
                    self.pos += 1;
                    Term::var(n)
                }
                Some(Tok::Open) => {
                    self.pos += 1;
                    let t = self.term()?;
                    if self.peek() != Some(&Tok::Close) {
                        return Err(self.err("expected ')'"));
                    }
                    self.pos += 1;
                    t
                }
            };
            head = Some(match head {
                None => atom,
                Some(h) => Term::app(h, atom),
            });
        }
        head.ok_or_else(|| self.err("expected a term"))
    }
}

pub fn parse_term(text: &str) -> Result<Term, TermSyntaxError> {
    let toks = tokenize(text)?;
    let line = text.lines().count().max(1);
    let column = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser {
        toks,
        pos: 0,
        end: (line, column),
    };
    let t = p.term()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unbalanced ')'"));
    }
    Ok(t)
}

pub fn print_term(t: &Term, style: Style) -> String {
    let mut out = String::new();
    match style {
        Style::DeBruijn => db(t, "λ", &mut out),
        Style::Ascii => db(t, "\\", &mut out),
        Style::Named => named(t, &mut Vec::new(), &mut out),
    }
    out
}

fn db(t: &Term, lam: &str, out: &mut String) {
    match t {
        Term::Var(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Lam(b) => {
            out.push_str(lam);
            if matches!(**b, Term::App(..)) {
                out.push('(');
                db(b, lam, out);
                out.push(')');
            } else {
                db(b, lam, out);
            }
        }
        Term::App(f, a) => {
            if f.is_lam() {
                out.push('(');
                db(f, lam, out);
                out.push(')');
            } else {
                db(f, lam, out);
            }
            out.push(' ');
            if matches!(**a, Term::Var(_)) {
                db(a, lam, out);
            } else {
                out.push('(');
                db(a, lam, out);
                out.push(')');
            }
        }
    }
}

/// `a`, `b`, ..., `z`, `a1`, `b1`, ...
pub fn fresh_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    match i / 26 {
        0 => letter.to_string(),
        k => format!("{letter}{k}"),
    }
}

fn named(t: &Term, scope: &mut Vec<String>, out: &mut String) {
    match t {
        Term::Var(n) => match scope.len().checked_sub(n + 1) {
            Some(i) => out.push_str(&scope[i]),
            None => {
                let _ = write!(out, "#{}", n - scope.len());
            }
        },
        Term::Lam(_) => {
            out.push('λ');
            let before = scope.len();
            let mut body = t;
            while let Term::Lam(b) = body {
                let name = fresh_name(scope.len());
                if scope.len() > before {
                    out.push(' ');
                }
                out.push_str(&name);
                scope.push(name);
                body = b;
            }
            out.push_str(". ");
            named(body, scope, out);
            scope.truncate(before);
        }
        Term::App(f, a) => {
            if f.is_lam() {
                out.push('(');
                named(f, scope, out);
                out.push(')');
            } else {
                named(f, scope, out);
            }
            out.push(' ');
            if matches!(**a, Term::Var(_)) {
                named(a, scope, out);
            } else {
                out.push('(');
                named(a, scope, out);
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_term("\\ \\ 1").unwrap(), Term::lam(Term::lam(Term::var(1))));
        let w = Term::lam(Term::app(Term::var(0), Term::var(0)));
        assert_eq!(parse_term("(\\ 0 0) (\\ 0 0)").unwrap(), Term::app(w.clone(), w));
        assert_eq!(parse_term("λλ1").unwrap(), parse_term("\\\\1").unwrap());
    }

    #[test]
    fn prints_named() {
        let t = Term::lam(Term::lam(Term::var(1)));
        assert_eq!(print_term(&t, Style::Named), "λa b. a");
        assert_eq!(print_term(&t, Style::DeBruijn), "λλ1");
        assert_eq!(print_term(&t, Style::Ascii), "\\\\1");
    }

    #[test]
    fn prints_lambda_style() {
        let orb = parse_term("\\\\ 1 (\\\\1) 0").unwrap();
        assert_eq!(print_term(&orb, Style::DeBruijn), "λλ(1 (λλ1) 0)");
    }

    #[test]
    fn fresh_names_wrap() {
        assert_eq!(fresh_name(0), "a");
        assert_eq!(fresh_name(25), "z");
        assert_eq!(fresh_name(26), "a1");
        assert_eq!(fresh_name(27), "b1");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_term("(\\0").unwrap_err();
        assert_eq!((e.line, e.column), (1, 4));
        let e = parse_term("\\0\n )").unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
        assert!(parse_term("").is_err());
        assert!(parse_term("x").is_err());
    }

    pub(crate) fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = (0usize..4).prop_map(Term::var);
        leaf.prop_recursive(6, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Term::lam),
                (inner.clone(), inner).prop_map(|(f, a)| Term::app(f, a)),
            ]
        })
    }

    proptest! {
        #[test]
        fn round_trip(t in arb_term()) {
            prop_assert_eq!(parse_term(&print_term(&t, Style::DeBruijn)).unwrap(), t.clone());
            prop_assert_eq!(parse_term(&print_term(&t, Style::Ascii)).unwrap(), t);
        }
    }
}
