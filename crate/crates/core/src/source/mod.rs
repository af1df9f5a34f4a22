//! The source language: algebraic datatypes and simply typed, prenex
//! polymorphic definitions with structural recursion.
//!
//! Variables are de Bruijn indices. Every binder of the source (`lam`, the
//! self binder of `fix`, match pattern variables) corresponds to exactly one
//! binder of the extracted term.

mod check;
mod interp;
mod parse;
pub mod sexp;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::scott::{AdtDef, Value};
use crate::types::SrcType;

pub(crate) use check::type_of_with;
pub use check::{guardedness_check, monomorphize, type_of, typecheck, CheckedProgram};
pub use interp::{interp, Interp, RVal, DEFAULT_FUEL};
pub use parse::{parse_program, parse_type};
pub use sexp::Pos;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SrcExpr {
    Var(usize),
    Lam {
        name: Option<String>,
        ty: SrcType,
        body: Arc<SrcExpr>,
    },
    App(Arc<SrcExpr>, Arc<SrcExpr>),
    /// Constructor `ctor` of `adt`, curried over its fields.
    Ctor {
        adt: String,
        ctor: usize,
        type_args: Vec<SrcType>,
    },
    Match {
        scrutinee: Arc<SrcExpr>,
        adt: String,
        branches: Vec<Branch>,
    },
    /// Recursive function; `body` sees itself as variable 0. `arg` is the
    /// position of the structurally decreasing parameter among the
    /// abstractions heading `body`.
    Fix {
        name: Option<String>,
        arg: usize,
        ty: SrcType,
        body: Arc<SrcExpr>,
    },
    Const {
        name: String,
        type_args: Vec<SrcType>,
    },
    Lit {
        ty: SrcType,
        value: Value,
    },
}

/// A match arm binding `arity` fields, the first field outermost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub arity: usize,
    pub body: SrcExpr,
}

impl SrcExpr {
    pub fn app(f: SrcExpr, a: SrcExpr) -> SrcExpr {
        SrcExpr::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(head: SrcExpr, args: impl IntoIterator<Item = SrcExpr>) -> SrcExpr {
        args.into_iter().fold(head, SrcExpr::app)
    }

    pub fn lam(ty: SrcType, body: SrcExpr) -> SrcExpr {
        SrcExpr::Lam {
            name: None,
            ty,
            body: Arc::new(body),
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&SrcExpr, Vec<&SrcExpr>) {
        let mut args = Vec::new();
        let mut e = self;
        while let SrcExpr::App(f, a) = e {
            args.push(&**a);
            e = f;
        }
        args.reverse();
        (e, args)
    }

    /// Applies `f` to every type annotation and type argument.
    pub fn map_types(&self, f: &impl Fn(&SrcType) -> SrcType) -> SrcExpr {
        match self {
            SrcExpr::Var(_) => self.clone(),
            SrcExpr::Lam { name, ty, body } => SrcExpr::Lam {
                name: name.clone(),
                ty: f(ty),
                body: Arc::new(body.map_types(f)),
            },
            SrcExpr::App(a, b) => SrcExpr::App(Arc::new(a.map_types(f)), Arc::new(b.map_types(f))),
            SrcExpr::Ctor { adt, ctor, type_args } => SrcExpr::Ctor {
                adt: adt.clone(),
                ctor: *ctor,
                type_args: type_args.iter().map(f).collect(),
            },
            SrcExpr::Match {
                scrutinee,
                adt,
                branches,
            } => SrcExpr::Match {
                scrutinee: Arc::new(scrutinee.map_types(f)),
                adt: adt.clone(),
                branches: branches
                    .iter()
                    .map(|b| Branch {
                        arity: b.arity,
                        body: b.body.map_types(f),
                    })
                    .collect(),
            },
            SrcExpr::Fix { name, arg, ty, body } => SrcExpr::Fix {
                name: name.clone(),
                arg: *arg,
                ty: f(ty),
                body: Arc::new(body.map_types(f)),
            },
            SrcExpr::Const { name, type_args } => SrcExpr::Const {
                name: name.clone(),
                type_args: type_args.iter().map(f).collect(),
            },
            SrcExpr::Lit { ty, value } => SrcExpr::Lit {
                ty: f(ty),
                value: value.clone(),
            },
        }
    }

    /// Every `(name, type args)` referenced by a `Const` node.
    pub fn const_refs(&self, out: &mut Vec<(String, Vec<SrcType>)>) {
        match self {
            SrcExpr::Var(_) | SrcExpr::Ctor { .. } | SrcExpr::Lit { .. } => {}
            SrcExpr::Lam { body, .. } | SrcExpr::Fix { body, .. } => body.const_refs(out),
            SrcExpr::App(a, b) => {
                a.const_refs(out);
                b.const_refs(out);
            }
            SrcExpr::Match {
                scrutinee, branches, ..
            } => {
                scrutinee.const_refs(out);
                for b in branches {
                    b.body.const_refs(out);
                }
            }
            SrcExpr::Const { name, type_args } => out.push((name.clone(), type_args.clone())),
        }
    }

    /// Every `(adt, ctor, type args)` referenced by a `Ctor` node.
    pub fn ctor_refs(&self, out: &mut Vec<(String, usize, Vec<SrcType>)>) {
        match self {
            SrcExpr::Var(_) | SrcExpr::Const { .. } | SrcExpr::Lit { .. } => {}
            SrcExpr::Lam { body, .. } | SrcExpr::Fix { body, .. } => body.ctor_refs(out),
            SrcExpr::App(a, b) => {
                a.ctor_refs(out);
                b.ctor_refs(out);
            }
            SrcExpr::Match {
                scrutinee, branches, ..
            } => {
                scrutinee.ctor_refs(out);
                for b in branches {
                    b.body.ctor_refs(out);
                }
            }
            SrcExpr::Ctor { adt, ctor, type_args } => out.push((adt.clone(), *ctor, type_args.clone())),
        }
    }
}

impl std::fmt::Display for SrcExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let targs = |ts: &[SrcType]| ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            SrcExpr::Var(i) => write!(f, "(var {i})"),
            SrcExpr::Lam { ty, body, .. } => write!(f, "(lam {ty} {body})"),
            SrcExpr::App(..) => {
                let (head, args) = self.spine();
                write!(f, "({head}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            SrcExpr::Ctor { adt, ctor, type_args } if type_args.is_empty() => {
                write!(f, "(ctor {adt}.{ctor})")
            }
            SrcExpr::Ctor { adt, ctor, type_args } => {
                write!(f, "(ctor {adt}.{ctor} ({}))", targs(type_args))
            }
            SrcExpr::Match {
                scrutinee,
                adt,
                branches,
            } => {
                write!(f, "(match {scrutinee} {adt} (")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "({} {})", b.arity, b.body)?;
                }
                write!(f, "))")
            }
            SrcExpr::Fix { arg, ty, body, .. } => write!(f, "(fix {arg} {ty} {body})"),
            SrcExpr::Const { name, type_args } if type_args.is_empty() => write!(f, "{name}"),
            SrcExpr::Const { name, type_args } => {
                write!(f, "(const {name} ({}))", targs(type_args))
            }
            SrcExpr::Lit { value, .. } => match value.as_nat() {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "{value:?}"),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Def {
    pub name: String,
    pub params: Vec<String>,
    pub ty: SrcType,
    pub body: SrcExpr,
    pub pos: Pos,
}

impl Def {
    /// Names given to the leading abstractions, if any.
    pub fn arg_names(&self) -> Vec<Option<String>> {
        let mut names = Vec::new();
        let mut e = &self.body;
        loop {
            match e {
                SrcExpr::Lam { name, body, .. } => {
                    names.push(name.clone());
                    e = body;
                }
                SrcExpr::Fix { body, .. } => e = body,
                _ => return names,
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceProgram {
    pub adts: Vec<AdtDef>,
    pub defs: Vec<Def>,
}

impl SourceProgram {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn def_index(&self) -> BTreeMap<&str, usize> {
        self.defs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.name.as_str(), i))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SourceError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("type error in `{def}`: {message}")]
    Type { def: String, message: String },
    #[error("`{def}` is not admissible: {message}")]
    Admissibility { def: String, message: String },
    #[error("unguarded recursion in `{def}`: {message}")]
    Guard { def: String, message: String },
    #[error("`{def}` expects {expected} type arguments, got {found}")]
    TypeArity { def: String, expected: usize, found: usize },
    #[error("datatype error: {0}")]
    Adt(#[from] crate::scott::ScottError),
    #[error("evaluation error: {0}")]
    Eval(String),
}
