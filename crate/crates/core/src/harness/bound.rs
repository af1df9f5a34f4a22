//! Time bounds written as one expression per curried application:
//! `5; 15*min(x,y)+8`. The `i`-th expression may mention the first `i`
//! argument names.
//!
//! ```text
//! expr ::= term (('+' | '-') term)*
//! term ::= pow ('*' pow)*
//! pow  ::= atom ('^' atom)?
//! atom ::= NUM | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! A name stands for the argument's measure: a natural number is itself, a
//! list its length, a boolean 0 or 1, other data its node count, and a
//! function 0. Functions: `min`, `max`, `len`, `size` (node count).

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::{Reference, TimeBound};
use crate::scott::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bound spec, column {column}: {message}")]
pub struct BoundError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Expr {
    Num(i128),
    Name(String),
    Call(String, Vec<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundSpec {
    exprs: Vec<Expr>,
}

/// Numeric measure of a datum.
pub fn measure(v: &Value) -> i128 {
    if let Some(n) = v.as_nat() {
        n as i128
    } else if let Some(l) = v.as_list() {
        l.len() as i128
    } else if let Some(b) = v.as_bool() {
        b as i128
    } else {
        v.node_count() as i128
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    i: usize,
}

impl Lexer<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, BoundError> {
        Err(BoundError {
            column: self.i + 1,
            message: message.into(),
        })
    }

    fn skip(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, BoundError> {
        let mut e = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            e = Expr::Bin(op as char, Box::new(e), Box::new(self.term()?));
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, BoundError> {
        let mut e = self.pow()?;
        while self.eat(b'*') {
            e = Expr::Bin('*', Box::new(e), Box::new(self.pow()?));
        }
        Ok(e)
    }

    fn pow(&mut self) -> Result<Expr, BoundError> {
        let e = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin('^', Box::new(e), Box::new(self.atom()?)));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, BoundError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.i;
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
                match text.parse() {
                    Ok(n) => Ok(Expr::Num(n)),
                    Err(_) => self.err("number too large"),
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).expect("ascii").to_string();
                if !self.eat(b'(') {
                    return Ok(Expr::Name(name));
                }
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if !self.eat(b')') {
                    return self.err("expected ')' after arguments");
                }
                let ok = match name.as_str() {
                    "min" | "max" => args.len() >= 2,
                    "len" | "size" => args.len() == 1 && matches!(args[0], Expr::Name(_)),
                    _ => return self.err(format!("unknown function `{name}`")),
                };
                if !ok {
                    return self.err(format!("wrong arguments to `{name}`"));
                }
                Ok(Expr::Call(name, args))
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end"),
        }
    }
}

impl Expr {
    fn names(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Name(n) => out.push(n.clone()),
            Expr::Call(_, args) => args.iter().for_each(|a| a.names(out)),
            Expr::Bin(_, a, b) => {
                a.names(out);
                b.names(out);
            }
        }
    }

    fn eval(&self, env: &BTreeMap<String, Option<Value>>) -> i128 {
        let datum = |n: &str| env.get(n).cloned().flatten();
        match self {
            Expr::Num(n) => *n,
            Expr::Name(n) => datum(n).as_ref().map_or(0, measure),
            Expr::Call(f, args) => match f.as_str() {
                "min" => args.iter().map(|a| a.eval(env)).min().expect("arity checked"),
                "max" => args.iter().map(|a| a.eval(env)).max().expect("arity checked"),
                _ => {
                    let Expr::Name(n) = &args[0] else {
                        unreachable!("checked at parse")
                    };
                    match (f.as_str(), datum(n)) {
                        ("len", Some(v)) => v.as_list().map_or(0, |l| l.len() as i128),
                        ("size", Some(v)) => v.node_count() as i128,
                        _ => 0,
                    }
                }
            },
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(env), b.eval(env));
                match op {
                    '+' => x.saturating_add(y),
                    '-' => x.saturating_sub(y),
                    '*' => x.saturating_mul(y),
                    _ => x.saturating_pow(y.clamp(0, 64) as u32),
                }
            }
        }
    }
}

impl BoundSpec {
    pub fn parse(text: &str) -> Result<BoundSpec, BoundError> {
        let mut exprs = Vec::new();
        let mut offset = 0;
        for part in text.split(';') {
            let mut lx = Lexer {
                s: part.as_bytes(),
                i: 0,
            };
            let e = lx.expr().map_err(|e| BoundError {
                column: e.column + offset,
                ..e
            })?;
            if lx.peek().is_some() {
                return Err(BoundError {
                    column: lx.i + 1 + offset,
                    message: "trailing input".into(),
                });
            }
            exprs.push(e);
            offset += part.len() + 1;
        }
        Ok(BoundSpec { exprs })
    }

    pub fn applications(&self) -> usize {
        self.exprs.len()
    }

    /// Checks that expression `i` only mentions the first `i+1` names.
    pub fn check_names(&self, names: &[String]) -> Result<(), BoundError> {
        for (i, e) in self.exprs.iter().enumerate() {
            let mut used = Vec::new();
            e.names(&mut used);
            for n in used {
                if !names.iter().take(i + 1).any(|m| *m == n) {
                    return Err(BoundError {
                        column: 0,
                        message: format!("application {} cannot mention `{n}`", i + 1),
                    });
                }
            }
        }
        Ok(())
    }

    /// The curried bound: application `i` costs expression `i`, evaluated
    /// with the arguments supplied so far bound to `names`.
    pub fn to_time_bound(&self, names: &[String]) -> TimeBound {
        let exprs: Arc<[Expr]> = self.exprs.clone().into();
        let names: Arc<[String]> = names.to_vec().into();
        chain(exprs, names, 0, BTreeMap::new())
    }
}

fn chain(exprs: Arc<[Expr]>, names: Arc<[String]>, i: usize, env: BTreeMap<String, Option<Value>>) -> TimeBound {
    if i >= exprs.len() {
        return TimeBound::Unit;
    }
    TimeBound::arrow(move |arg: &Reference, _: &TimeBound| {
        let mut env = env.clone();
        if let Some(n) = names.get(i) {
            let datum = match arg {
                Reference::Data(v) => Some(v.clone()),
                _ => None,
            };
            env.insert(n.clone(), datum);
        }
        let n = exprs[i].eval(&env).max(0);
        let n = u64::try_from(n).unwrap_or(u64::MAX);
        (n, chain(exprs.clone(), names.clone(), i + 1, env))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(b: &TimeBound, args: &[Value]) -> Vec<u64> {
        let mut b = b.clone();
        let mut out = Vec::new();
        for a in args {
            let (n, next) = b.apply(&Reference::Data(a.clone()), &TimeBound::Unit).unwrap();
            out.push(n);
            b = next;
        }
        out
    }

    #[test]
    fn eqb_shaped_bound() {
        let s = BoundSpec::parse("5; 15*min(x,y)+8").unwrap();
        let names = vec!["x".to_string(), "y".to_string()];
        s.check_names(&names).unwrap();
        let b = s.to_time_bound(&names);
        assert_eq!(apply(&b, &[Value::nat(3), Value::nat(7)]), vec![5, 53]);
    }

    #[test]
    fn precedence_and_functions() {
        let s = BoundSpec::parse("2 + 3 * len(l) ^ 2 - (1)").unwrap();
        let b = s.to_time_bound(&["l".to_string()]);
        assert_eq!(apply(&b, &[Value::nat_list(&[1, 2])]), vec![13]);
    }

    #[test]
    fn errors_carry_columns() {
        let e = BoundSpec::parse("1; 2 +").unwrap_err();
        assert_eq!(e.column, 7);
        assert!(BoundSpec::parse("foo(x)").is_err());
        let s = BoundSpec::parse("y; 1").unwrap();
        assert!(s.check_names(&["x".into(), "y".into()]).is_err());
    }
}
