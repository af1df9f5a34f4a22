//! Surface syntax.
//!
//! ```text
//! top   ::= (data NAME [(PARAM*)] CTOR*)  |  (def NAME [(PARAM*)] TYPE EXPR)
//! CTOR  ::= (NAME TYPE*)
//! TYPE  ::= NAME | PARAM | (NAME TYPE+) | (-> TYPE TYPE+)
//! EXPR  ::= (var N) | IDENT | NAT | #t | #f
//!         | (lam TYPE EXPR) | (lam (x TYPE)+ EXPR)
//!         | (app EXPR EXPR+) | (EXPR EXPR+)
//!         | (ctor ADT.CTOR [(TYPE*)] EXPR*) | (const NAME [(TYPE*)] EXPR*)
//!         | (match EXPR ADT (BRANCH*))
//!         | (fix N TYPE EXPR) | (fix NAME N TYPE EXPR)
//!         | (let x TYPE EXPR EXPR) | (if EXPR EXPR EXPR) | (list TYPE EXPR*)
//! BRANCH ::= (N EXPR) | (CTOR EXPR) | (_ EXPR) | ((CTOR x*) EXPR)
//! ```
//!
//! A type-argument list is present exactly when the datatype or definition
//! has parameters. The parameter list of `data` is recognised as a list of
//! capitalised names that all occur in the constructor field types.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::sexp::{read_all, Pos, Sexp};
use super::{Branch, Def, SourceError, SourceProgram, SrcExpr};
use crate::scott::{prelude_adts, AdtDef, CtorDef, Value};
use crate::types::SrcType;

const KEYWORDS: &[&str] = &[
    "var", "lam", "app", "ctor", "const", "match", "fix", "let", "if", "list",
];

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, SourceError> {
    Err(SourceError::Syntax {
        pos,
        message: message.into(),
    })
}

struct Parser {
    adts: Vec<AdtDef>,
    def_params: BTreeMap<String, usize>,
    type_params: Vec<String>,
    scope: Vec<Option<String>>,
}

pub fn parse_program(text: &str) -> Result<SourceProgram, SourceError> {
    let forms = read_all(text).map_err(|e| SourceError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    let mut p = Parser {
        adts: prelude_adts(),
        def_params: BTreeMap::new(),
        type_params: Vec::new(),
        scope: Vec::new(),
    };
    let mut prog = SourceProgram::default();
    for form in &forms {
        match form.head() {
            Some("data") => {
                let def = p.data(form)?;
                p.adts.retain(|a| a.name != def.name);
                p.adts.push(def.clone());
                prog.adts.push(def);
            }
            Some("def") => {
                let def = p.def(form)?;
                if p.def_params.contains_key(&def.name) {
                    return err(form.pos(), format!("`{}` defined twice", def.name));
                }
                p.def_params.insert(def.name.clone(), def.params.len());
                prog.defs.push(def);
            }
            _ => return err(form.pos(), "expected (data ...) or (def ...)"),
        }
    }
    Ok(prog)
}

/// Parses a type; names in `params` are type parameters.
pub fn parse_type(text: &str, params: &[String]) -> Result<SrcType, SourceError> {
    let forms = read_all(text).map_err(|e| SourceError::Syntax {
        pos: e.pos,
        message: e.message,
    })?;
    let [form] = forms.as_slice() else {
        return err(Pos { line: 1, column: 1 }, "expected exactly one type");
    };
    let p = Parser {
        adts: prelude_adts(),
        def_params: BTreeMap::new(),
        type_params: params.to_vec(),
        scope: Vec::new(),
    };
    p.ty(form)
}

fn is_capitalised(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn atoms(items: &[Sexp]) -> Option<Vec<&str>> {
    items.iter().map(Sexp::atom).collect()
}

fn mentions_atom(s: &Sexp, name: &str) -> bool {
    match s {
        Sexp::Atom(a, _) => a == name,
        Sexp::List(items, _) => items.iter().any(|i| mentions_atom(i, name)),
    }
}

impl Parser {
    fn data(&mut self, form: &Sexp) -> Result<AdtDef, SourceError> {
        let items = form.list().expect("data form is a list");
        let Some(name) = items.get(1).and_then(Sexp::atom) else {
            return err(form.pos(), "expected a datatype name");
        };
        let mut rest = &items[2..];
        let mut params = Vec::new();
        if let Some(first) = rest.first() {
            if let Some(ps) = first.list().and_then(atoms) {
                let is_params = ps.is_empty()
                    || ps.iter().all(|p| {
                        is_capitalised(p)
                            && rest[1..]
                                .iter()
                                .any(|c| c.list().is_some_and(|c| c[1..].iter().any(|t| mentions_atom(t, p))))
                    });
                if is_params {
                    params = ps.iter().map(|s| s.to_string()).collect();
                    rest = &rest[1..];
                }
            }
        }
        self.type_params = params.clone();
        let mut ctors = Vec::new();
        for c in rest {
            let (cname, fields) = match c {
                Sexp::Atom(a, _) => (a.as_str(), &[][..]),
                Sexp::List(xs, p) => match xs.split_first() {
                    Some((Sexp::Atom(a, _), fs)) => (a.as_str(), fs),
                    _ => return err(*p, "expected (CONSTRUCTOR TYPE*)"),
                },
            };
            let fields = fields.iter().map(|t| self.ty(t)).collect::<Result<_, _>>()?;
            ctors.push(CtorDef {
                name: cname.to_string(),
                fields,
            });
        }
        self.type_params.clear();
        Ok(AdtDef {
            name: name.to_string(),
            params,
            ctors,
        })
    }

    fn def(&mut self, form: &Sexp) -> Result<Def, SourceError> {
        let items = form.list().expect("def form is a list");
        let Some(name) = items.get(1).and_then(Sexp::atom) else {
            return err(form.pos(), "expected a definition name");
        };
        let (params, ty, body) = match items.len() {
            4 => (Vec::new(), &items[2], &items[3]),
            5 => {
                let Some(ps) = items[2].list().and_then(atoms) else {
                    return err(items[2].pos(), "expected a type parameter list");
                };
                (ps.iter().map(|s| s.to_string()).collect(), &items[3], &items[4])
            }
            _ => return err(form.pos(), "expected (def NAME [(PARAM*)] TYPE EXPR)"),
        };
        self.type_params = params;
        let ty = self.ty(ty)?;
        self.scope.clear();
        let body = self.expr(body)?;
        Ok(Def {
            name: name.to_string(),
            params: std::mem::take(&mut self.type_params),
            ty,
            body,
            pos: form.pos(),
        })
    }

    fn ty(&self, s: &Sexp) -> Result<SrcType, SourceError> {
        match s {
            Sexp::Atom(a, _) if a == "Type" => Ok(SrcType::Sort),
            Sexp::Atom(a, _) if self.type_params.contains(a) => Ok(SrcType::Param(a.clone())),
            Sexp::Atom(a, p) if a.parse::<u64>().is_ok() || KEYWORDS.contains(&a.as_str()) => {
                err(*p, format!("`{a}` is not a type"))
            }
            Sexp::Atom(a, _) => Ok(SrcType::base(a)),
            Sexp::List(items, p) => match items.split_first() {
                Some((Sexp::Atom(h, _), rest)) if h == "->" => {
                    if rest.len() < 2 {
                        return err(*p, "(-> ...) needs at least two types");
                    }
                    let tys = rest.iter().map(|t| self.ty(t)).collect::<Result<Vec<_>, _>>()?;
                    let (last, init) = tys.split_last().expect("two or more");
                    Ok(SrcType::arrows(init.to_vec(), last.clone()))
                }
                Some((Sexp::Atom(h, _), rest)) if h == "forall" => {
                    let [vars, body] = rest else {
                        return err(*p, "expected (forall (PARAM*) TYPE)");
                    };
                    let Some(vs) = vars.list().and_then(atoms) else {
                        return err(vars.pos(), "expected a parameter list");
                    };
                    let vs: Vec<String> = vs.iter().map(|s| s.to_string()).collect();
                    let inner = Parser {
                        adts: Vec::new(),
                        def_params: BTreeMap::new(),
                        type_params: self.type_params.iter().chain(&vs).cloned().collect(),
                        scope: Vec::new(),
                    };
                    Ok(SrcType::Forall(vs, Box::new(inner.ty(body)?)))
                }
                Some((Sexp::Atom(h, _), rest)) if !rest.is_empty() => Ok(SrcType::Adt(
                    h.clone(),
                    rest.iter().map(|t| self.ty(t)).collect::<Result<_, _>>()?,
                )),
                _ => err(*p, "malformed type"),
            },
        }
    }

    fn type_args(&self, s: &Sexp) -> Result<Vec<SrcType>, SourceError> {
        let Some(items) = s.list() else {
            return err(s.pos(), "expected a type-argument list");
        };
        items.iter().map(|t| self.ty(t)).collect()
    }

    fn adt(&self, name: &str, pos: Pos) -> Result<&AdtDef, SourceError> {
        match self.adts.iter().rev().find(|a| a.name == name) {
            Some(a) => Ok(a),
            None => err(pos, format!("unknown datatype `{name}`")),
        }
    }

    /// Resolves `adt.ctor` or a bare constructor name.
    fn ctor_name(&self, name: &str, pos: Pos) -> Result<Option<(&AdtDef, usize)>, SourceError> {
        if let Some((a, c)) = name.rsplit_once('.') {
            let def = self.adt(a, pos)?;
            return match def.ctor_index(c) {
                Some(i) => Ok(Some((def, i))),
                None => err(pos, format!("`{a}` has no constructor `{c}`")),
            };
        }
        let hits: Vec<_> = self
            .adts
            .iter()
            .filter_map(|a| a.ctor_index(name).map(|i| (a, i)))
            .collect();
        match hits.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(*one)),
            _ => err(pos, format!("constructor `{name}` is ambiguous; qualify it")),
        }
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.scope.iter().rev().position(|n| n.as_deref() == Some(name))
    }

    fn with_binders<T>(
        &mut self,
        names: impl IntoIterator<Item = Option<String>>,
        f: impl FnOnce(&mut Self) -> Result<T, SourceError>,
    ) -> Result<T, SourceError> {
        let before = self.scope.len();
        self.scope.extend(names);
        let out = f(self);
        self.scope.truncate(before);
        out
    }

    fn expr(&mut self, s: &Sexp) -> Result<SrcExpr, SourceError> {
        match s {
            Sexp::Atom(a, p) => self.atom_expr(a, *p),
            Sexp::List(items, p) => {
                let Some(head) = items.first() else {
                    return err(*p, "empty expression");
                };
                match head.atom() {
                    Some(k) if KEYWORDS.contains(&k) && self.lookup(k).is_none() => self.form(k, items, *p),
                    _ => {
                        if items.len() < 2 {
                            return err(*p, "application needs an argument");
                        }
                        let f = self.expr(head)?;
                        let args = items[1..].iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                        Ok(SrcExpr::apps(f, args))
                    }
                }
            }
        }
    }

    fn atom_expr(&self, a: &str, p: Pos) -> Result<SrcExpr, SourceError> {
        if let Ok(n) = a.parse::<u64>() {
            return Ok(SrcExpr::Lit {
                ty: SrcType::nat(),
                value: Value::nat(n),
            });
        }
        match a {
            "#t" | "#f" => {
                return Ok(SrcExpr::Lit {
                    ty: SrcType::bool(),
                    value: Value::bool(a == "#t"),
                })
            }
            _ => {}
        }
        if let Some(i) = self.lookup(a) {
            return Ok(SrcExpr::Var(i));
        }
        if let Some(&n) = self.def_params.get(a) {
            if n > 0 {
                return err(p, format!("`{a}` is polymorphic; use (const {a} (TYPE*) ...)"));
            }
            return Ok(SrcExpr::Const {
                name: a.to_string(),
                type_args: Vec::new(),
            });
        }
        if let Some((def, i)) = self.ctor_name(a, p)? {
            if !def.params.is_empty() {
                return err(
                    p,
                    format!(
                        "`{a}` is polymorphic; use (ctor {}.{} (TYPE*) ...)",
                        def.name, def.ctors[i].name
                    ),
                );
            }
            return Ok(SrcExpr::Ctor {
                adt: def.name.clone(),
                ctor: i,
                type_args: Vec::new(),
            });
        }
        err(p, format!("unknown identifier `{a}`"))
    }

    fn form(&mut self, k: &str, items: &[Sexp], p: Pos) -> Result<SrcExpr, SourceError> {
        let args = &items[1..];
        match k {
            "var" => match args {
                [Sexp::Atom(n, np)] => match n.parse() {
                    Ok(i) => Ok(SrcExpr::Var(i)),
                    Err(_) => err(*np, "expected a variable index"),
                },
                _ => err(p, "expected (var N)"),
            },
            "app" => {
                if args.len() < 2 {
                    return err(p, "expected (app EXPR EXPR+)");
                }
                let es = args.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                let mut it = es.into_iter();
                let head = it.next().expect("non-empty");
                Ok(SrcExpr::apps(head, it))
            }
            "lam" => self.lam(args, p),
            "ctor" => {
                let Some((Sexp::Atom(name, np), rest)) = args.split_first() else {
                    return err(p, "expected (ctor ADT.CTOR ...)");
                };
                let Some((def, i)) = self.ctor_name(name, *np)? else {
                    return err(*np, format!("unknown constructor `{name}`"));
                };
                let (adt, nparams) = (def.name.clone(), def.params.len());
                let (type_args, rest) = if nparams > 0 {
                    let Some((ta, rest)) = rest.split_first() else {
                        return err(p, "missing type arguments");
                    };
                    (self.type_args(ta)?, rest)
                } else {
                    (Vec::new(), rest)
                };
                let fs = rest.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(SrcExpr::apps(
                    SrcExpr::Ctor {
                        adt,
                        ctor: i,
                        type_args,
                    },
                    fs,
                ))
            }
            "const" => {
                let Some((Sexp::Atom(name, np), rest)) = args.split_first() else {
                    return err(p, "expected (const NAME ...)");
                };
                let Some(&nparams) = self.def_params.get(name) else {
                    return err(*np, format!("unknown definition `{name}`"));
                };
                let (type_args, rest) = if nparams > 0 {
                    let Some((ta, rest)) = rest.split_first() else {
                        return err(p, "missing type arguments");
                    };
                    (self.type_args(ta)?, rest)
                } else {
                    (Vec::new(), rest)
                };
                let fs = rest.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                Ok(SrcExpr::apps(
                    SrcExpr::Const {
                        name: name.clone(),
                        type_args,
                    },
                    fs,
                ))
            }
            "match" => {
                let [scrut, Sexp::Atom(adt, ap), Sexp::List(bs, _)] = args else {
                    return err(p, "expected (match EXPR ADT (BRANCH*))");
                };
                let scrutinee = Arc::new(self.expr(scrut)?);
                let def = self.adt(adt, *ap)?.clone();
                let mut branches = Vec::new();
                for (i, b) in bs.iter().enumerate() {
                    branches.push(self.branch(&def, i, b)?);
                }
                Ok(SrcExpr::Match {
                    scrutinee,
                    adt: adt.clone(),
                    branches,
                })
            }
            "if" => {
                let [c, a, b] = args else {
                    return err(p, "expected (if EXPR EXPR EXPR)");
                };
                Ok(SrcExpr::Match {
                    scrutinee: Arc::new(self.expr(c)?),
                    adt: "bool".into(),
                    branches: vec![
                        Branch {
                            arity: 0,
                            body: self.expr(a)?,
                        },
                        Branch {
                            arity: 0,
                            body: self.expr(b)?,
                        },
                    ],
                })
            }
            "fix" => {
                let (name, rest) = match args {
                    [Sexp::Atom(n, _), r @ ..] if n.parse::<usize>().is_err() => (Some(n.clone()), r),
                    r => (None, r),
                };
                let [Sexp::Atom(n, np), ty, body] = rest else {
                    return err(p, "expected (fix [NAME] N TYPE EXPR)");
                };
                let Ok(arg) = n.parse() else {
                    return err(*np, "expected the index of the decreasing argument");
                };
                let ty = self.ty(ty)?;
                let body = self.with_binders([name.clone()], |s| s.expr(body))?;
                Ok(SrcExpr::Fix {
                    name,
                    arg,
                    ty,
                    body: Arc::new(body),
                })
            }
            "let" => {
                let [Sexp::Atom(x, _), ty, e1, e2] = args else {
                    return err(p, "expected (let x TYPE EXPR EXPR)");
                };
                let ty = self.ty(ty)?;
                let bound = self.expr(e1)?;
                let body = self.with_binders([Some(x.clone())], |s| s.expr(e2))?;
                Ok(SrcExpr::app(
                    SrcExpr::Lam {
                        name: Some(x.clone()),
                        ty,
                        body: Arc::new(body),
                    },
                    bound,
                ))
            }
            "list" => {
                let Some((ty, elems)) = args.split_first() else {
                    return err(p, "expected (list TYPE EXPR*)");
                };
                let ty = self.ty(ty)?;
                let ctor = |i| SrcExpr::Ctor {
                    adt: "list".into(),
                    ctor: i,
                    type_args: vec![ty.clone()],
                };
                let es = elems.iter().map(|e| self.expr(e)).collect::<Result<Vec<_>, _>>()?;
                Ok(es
                    .into_iter()
                    .rev()
                    .fold(ctor(0), |tl, hd| SrcExpr::apps(ctor(1), [hd, tl])))
            }
            _ => unreachable!("keyword list and dispatch agree"),
        }
    }

    fn is_binder(&self, s: &Sexp) -> bool {
        match s.list() {
            Some([Sexp::Atom(x, _), _]) => x != "->" && x != "forall" && !self.adts.iter().any(|a| &a.name == x),
            _ => false,
        }
    }

    fn lam(&mut self, args: &[Sexp], p: Pos) -> Result<SrcExpr, SourceError> {
        let Some((body, binders)) = args.split_last() else {
            return err(p, "expected (lam TYPE EXPR)");
        };
        if binders.is_empty() {
            return err(p, "expected (lam TYPE EXPR)");
        }
        let mut bs: Vec<(Option<String>, SrcType)> = Vec::new();
        if binders.len() == 1 && !self.is_binder(&binders[0]) {
            bs.push((None, self.ty(&binders[0])?));
        } else {
            for b in binders {
                if !self.is_binder(b) {
                    return err(b.pos(), "expected a binder (x TYPE)");
                }
                let items = b.list().expect("binder is a list");
                bs.push((items[0].atom().map(str::to_string), self.ty(&items[1])?));
            }
        }
        let names: Vec<_> = bs.iter().map(|(n, _)| n.clone()).collect();
        let body = self.with_binders(names, |s| s.expr(body))?;
        Ok(bs.into_iter().rev().fold(body, |b, (name, ty)| SrcExpr::Lam {
            name,
            ty,
            body: Arc::new(b),
        }))
    }

    fn branch(&mut self, def: &AdtDef, i: usize, b: &Sexp) -> Result<Branch, SourceError> {
        let Some([pat, body]) = b.list() else {
            return err(b.pos(), "expected (PATTERN EXPR)");
        };
        let expect_ctor = |name: &str, pos: Pos| -> Result<usize, SourceError> {
            match def.ctors.get(i) {
                Some(c) if c.name == name => Ok(c.fields.len()),
                Some(c) => err(pos, format!("branch {i} of `{}` must match `{}`", def.name, c.name)),
                None => err(pos, format!("`{}` has only {} constructors", def.name, def.ctors.len())),
            }
        };
        let (arity, names) = match pat {
            Sexp::Atom(a, ap) => {
                if let Ok(n) = a.parse::<usize>() {
                    (n, vec![None; n])
                } else if a == "_" {
                    let n = def.ctors.get(i).map_or(0, |c| c.fields.len());
                    (n, vec![None; n])
                } else {
                    let n = expect_ctor(a, *ap)?;
                    if n != 0 {
                        return err(*ap, format!("`{a}` has {n} fields; bind them"));
                    }
                    (0, Vec::new())
                }
            }
            Sexp::List(xs, lp) => {
                let Some((Sexp::Atom(c, cp), vars)) = xs.split_first() else {
                    return err(*lp, "expected (CONSTRUCTOR x*)");
                };
                let n = expect_ctor(c, *cp)?;
                let Some(vs) = atoms(vars) else {
                    return err(*lp, "pattern variables must be names");
                };
                if vs.len() != n {
                    return err(*lp, format!("`{c}` has {n} fields, pattern binds {}", vs.len()));
                }
                let names = vs.iter().map(|v| (*v != "_").then(|| v.to_string())).collect();
                (n, names)
            }
        };
        let body = self.with_binders(names, |s| s.expr(body))?;
        Ok(Branch { arity, body })
    }
}
