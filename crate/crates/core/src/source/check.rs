//! Type checking, admissibility, guardedness and monomorphization.

use std::collections::{BTreeMap, BTreeSet};

use super::{Def, SourceError, SourceProgram, SrcExpr};
use crate::scott::{prelude_adts, Registry};
use crate::types::{param_map, SrcType};

/// A program that passed [`typecheck`], with its datatypes declared.
#[derive(Clone, Debug)]
pub struct CheckedProgram {
    pub program: SourceProgram,
    pub registry: Registry,
}

impl CheckedProgram {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.program.def(name)
    }

    /// `(type parameters, type)` of every definition.
    pub fn signatures(&self) -> BTreeMap<String, (Vec<String>, SrcType)> {
        self.program
            .defs
            .iter()
            .map(|d| (d.name.clone(), (d.params.clone(), d.ty.clone())))
            .collect()
    }
}

pub fn typecheck(p: &SourceProgram) -> Result<CheckedProgram, SourceError> {
    let mut registry = Registry::new();
    let prelude = prelude_adts();
    for d in &prelude {
        registry.declare(d.clone())?;
    }
    for d in &p.adts {
        match prelude.iter().find(|q| q.name == d.name) {
            Some(q) if q == d => {}
            Some(_) => {
                return Err(SourceError::Type {
                    def: d.name.clone(),
                    message: "conflicts with the built-in datatype of that name".into(),
                })
            }
            None => registry.declare(d.clone())?,
        }
    }
    let mut sigs: BTreeMap<String, (Vec<String>, SrcType)> = BTreeMap::new();
    for def in &p.defs {
        if sigs.contains_key(&def.name) {
            return Err(SourceError::Type {
                def: def.name.clone(),
                message: "defined twice".into(),
            });
        }
        let typer = Typer {
            registry: &registry,
            sigs: &sigs,
            params: &def.params,
        };
        typer
            .admissible(&def.ty)
            .map_err(|message| SourceError::Admissibility {
                def: def.name.clone(),
                message,
            })?;
        let tyerr = |message| SourceError::Type {
            def: def.name.clone(),
            message,
        };
        let got = typer.synth(&mut Vec::new(), &def.body).map_err(tyerr)?;
        if got != def.ty {
            return Err(tyerr(format!("body has type {got}, declared {}", def.ty)));
        }
        guardedness_check(def)?;
        sigs.insert(def.name.clone(), (def.params.clone(), def.ty.clone()));
    }
    Ok(CheckedProgram {
        program: p.clone(),
        registry,
    })
}

/// Type of `e` in context `ctx` (innermost binder last) inside a definition
/// with type parameters `params`.
pub fn type_of(checked: &CheckedProgram, params: &[String], ctx: &[SrcType], e: &SrcExpr) -> Result<SrcType, String> {
    let sigs = checked.signatures();
    let typer = Typer {
        registry: &checked.registry,
        sigs: &sigs,
        params,
    };
    typer.synth(&mut ctx.to_vec(), e)
}

/// [`type_of`] against precomputed signatures.
pub(crate) fn type_of_with(
    registry: &Registry,
    sigs: &BTreeMap<String, (Vec<String>, SrcType)>,
    ctx: &[SrcType],
    e: &SrcExpr,
) -> Result<SrcType, String> {
    let typer = Typer {
        registry,
        sigs,
        params: &[],
    };
    typer.synth(&mut ctx.to_vec(), e)
}

struct Typer<'a> {
    registry: &'a Registry,
    sigs: &'a BTreeMap<String, (Vec<String>, SrcType)>,
    params: &'a [String],
}

impl Typer<'_> {
    fn admissible(&self, t: &SrcType) -> Result<(), String> {
        match t {
            SrcType::Sort => Err("`Type` may not occur in an extractable type".into()),
            SrcType::Forall(..) => Err(format!("`{t}` is not in prenex form")),
            _ => self.well_formed(t),
        }
    }

    fn well_formed(&self, t: &SrcType) -> Result<(), String> {
        match t {
            SrcType::Param(p) if self.params.contains(p) => Ok(()),
            SrcType::Param(p) => Err(format!("unbound type parameter `{p}`")),
            SrcType::Adt(n, args) => {
                let def = self.registry.adt(n).ok_or_else(|| format!("unknown datatype `{n}`"))?;
                if def.params.len() != args.len() {
                    return Err(format!(
                        "`{n}` takes {} type arguments, got {}",
                        def.params.len(),
                        args.len()
                    ));
                }
                args.iter().try_for_each(|a| self.well_formed(a))
            }
            SrcType::Arrow(a, b) => {
                self.well_formed(a)?;
                self.well_formed(b)
            }
            SrcType::Sort | SrcType::Forall(..) => self.admissible(t),
        }
    }

    fn type_args(&self, what: &str, expected: usize, args: &[SrcType]) -> Result<(), String> {
        if args.len() != expected {
            return Err(format!("`{what}` needs {expected} type arguments, got {}", args.len()));
        }
        args.iter().try_for_each(|a| self.admissible(a))
    }

    fn synth(&self, ctx: &mut Vec<SrcType>, e: &SrcExpr) -> Result<SrcType, String> {
        match e {
            SrcExpr::Var(i) => ctx
                .len()
                .checked_sub(i + 1)
                .map(|k| ctx[k].clone())
                .ok_or_else(|| format!("unbound variable {i}")),
            SrcExpr::Lam { ty, body, .. } => {
                self.admissible(ty)?;
                ctx.push(ty.clone());
                let b = self.synth(ctx, body);
                ctx.pop();
                Ok(SrcType::arrow(ty.clone(), b?))
            }
            SrcExpr::App(f, a) => {
                let tf = self.synth(ctx, f)?;
                let ta = self.synth(ctx, a)?;
                match tf {
                    SrcType::Arrow(dom, cod) if *dom == ta => Ok(*cod),
                    SrcType::Arrow(dom, _) => Err(format!("argument has type {ta}, expected {dom}")),
                    other => Err(format!("applying a value of type {other}")),
                }
            }
            SrcExpr::Ctor { adt, ctor, type_args } => {
                let def = self
                    .registry
                    .adt(adt)
                    .ok_or_else(|| format!("unknown datatype `{adt}`"))?;
                self.type_args(adt, def.params.len(), type_args)?;
                if *ctor >= def.ctors.len() {
                    return Err(format!("`{adt}` has no constructor {ctor}"));
                }
                Ok(SrcType::arrows(
                    def.field_types(*ctor, type_args),
                    SrcType::Adt(adt.clone(), type_args.clone()),
                ))
            }
            SrcExpr::Match {
                scrutinee,
                adt,
                branches,
            } => {
                let ts = self.synth(ctx, scrutinee)?;
                let SrcType::Adt(n, args) = &ts else {
                    return Err(format!("matching on a value of type {ts}"));
                };
                if n != adt {
                    return Err(format!("matching a {ts} as `{adt}`"));
                }
                let def = self
                    .registry
                    .adt(adt)
                    .ok_or_else(|| format!("unknown datatype `{adt}`"))?;
                if branches.len() != def.ctors.len() {
                    return Err(format!(
                        "match on `{adt}` needs {} branches, got {}",
                        def.ctors.len(),
                        branches.len()
                    ));
                }
                let mut result: Option<SrcType> = None;
                for (i, b) in branches.iter().enumerate() {
                    let fields = def.field_types(i, args);
                    if fields.len() != b.arity {
                        return Err(format!(
                            "branch `{}` binds {} fields, constructor has {}",
                            def.ctors[i].name,
                            b.arity,
                            fields.len()
                        ));
                    }
                    let before = ctx.len();
                    ctx.extend(fields);
                    let t = self.synth(ctx, &b.body);
                    ctx.truncate(before);
                    let t = t?;
                    match &result {
                        None => result = Some(t),
                        Some(r) if *r == t => {}
                        Some(r) => return Err(format!("match branches have types {r} and {t}")),
                    }
                }
                Ok(result.expect("datatypes have at least one constructor"))
            }
            SrcExpr::Fix { arg, ty, body, .. } => {
                self.admissible(ty)?;
                let (args, _) = ty.uncurry();
                if *arg >= args.len() {
                    return Err(format!("fix argument {arg} out of range for {ty}"));
                }
                let mut lams = 0;
                let mut b = &**body;
                while let SrcExpr::Lam { body, .. } = b {
                    lams += 1;
                    b = body;
                }
                if lams <= *arg {
                    return Err(format!("fix body must abstract at least {} arguments", arg + 1));
                }
                ctx.push(ty.clone());
                let t = self.synth(ctx, body);
                ctx.pop();
                let t = t?;
                if t != *ty {
                    return Err(format!("fix body has type {t}, annotated {ty}"));
                }
                Ok(t)
            }
            SrcExpr::Const { name, type_args } => {
                let (params, ty) = self
                    .sigs
                    .get(name)
                    .ok_or_else(|| format!("`{name}` is not defined before its use"))?;
                self.type_args(name, params.len(), type_args)?;
                Ok(ty.substitute(&param_map(params, type_args)))
            }
            SrcExpr::Lit { ty, value } => {
                self.admissible(ty)?;
                if ty.is_concrete() {
                    self.registry.check_value(ty, value).map_err(|e| e.to_string())?;
                }
                Ok(ty.clone())
            }
        }
    }
}

struct FixFrame {
    name: String,
    self_level: usize,
    arg: usize,
    formal: usize,
    smaller: BTreeSet<usize>,
}

/// Every recursive call must pass, in its decreasing position, a pattern
/// variable obtained by (repeatedly) matching the decreasing parameter.
pub fn guardedness_check(def: &Def) -> Result<(), SourceError> {
    let mut frames = Vec::new();
    guard(&def.body, 0, &mut frames).map_err(|message| SourceError::Guard {
        def: def.name.clone(),
        message,
    })
}

fn level(depth: usize, i: usize) -> Option<usize> {
    depth.checked_sub(i + 1)
}

fn guard(e: &SrcExpr, depth: usize, frames: &mut Vec<FixFrame>) -> Result<(), String> {
    match e {
        SrcExpr::Var(i) => {
            if let Some(f) = frames.iter().find(|f| level(depth, *i) == Some(f.self_level)) {
                return Err(format!(
                    "`{}` is used other than in a call with its decreasing argument",
                    f.name
                ));
            }
            Ok(())
        }
        SrcExpr::App(..) => {
            let (head, args) = e.spine();
            if let SrcExpr::Var(i) = head {
                if let Some(f) = frames.iter().find(|f| level(depth, *i) == Some(f.self_level)) {
                    let ok = match args.get(f.arg) {
                        Some(SrcExpr::Var(j)) => level(depth, *j).is_some_and(|l| f.smaller.contains(&l)),
                        _ => false,
                    };
                    if !ok {
                        return Err(format!(
                            "call `{e}` does not pass a structural subterm of argument {}",
                            f.arg
                        ));
                    }
                    for a in args {
                        guard(a, depth, frames)?;
                    }
                    return Ok(());
                }
            }
            guard(head, depth, frames)?;
            args.into_iter().try_for_each(|a| guard(a, depth, frames))
        }
        SrcExpr::Lam { body, .. } => guard(body, depth + 1, frames),
        SrcExpr::Fix { name, arg, body, .. } => {
            frames.push(FixFrame {
                name: name.clone().unwrap_or_else(|| "self".into()),
                self_level: depth,
                arg: *arg,
                formal: depth + 1 + arg,
                smaller: BTreeSet::new(),
            });
            let r = guard(body, depth + 1, frames);
            frames.pop();
            r
        }
        SrcExpr::Match {
            scrutinee, branches, ..
        } => {
            guard(scrutinee, depth, frames)?;
            let scrut_level = match &**scrutinee {
                SrcExpr::Var(i) => level(depth, *i),
                _ => None,
            };
            for b in branches {
                let fields: Vec<usize> = (depth..depth + b.arity).collect();
                let mut added = Vec::new();
                for (k, f) in frames.iter_mut().enumerate() {
                    if let Some(l) = scrut_level {
                        if l == f.formal || f.smaller.contains(&l) {
                            f.smaller.extend(fields.iter().copied());
                            added.push(k);
                        }
                    }
                }
                let r = guard(&b.body, depth + b.arity, frames);
                for k in added {
                    for l in &fields {
                        frames[k].smaller.remove(l);
                    }
                }
                r?;
            }
            Ok(())
        }
        SrcExpr::Ctor { .. } | SrcExpr::Const { .. } | SrcExpr::Lit { .. } => Ok(()),
    }
}

/// Instantiates the type parameters of `def`.
pub fn monomorphize(def: &Def, type_args: &[SrcType]) -> Result<Def, SourceError> {
    if type_args.len() != def.params.len() {
        return Err(SourceError::TypeArity {
            def: def.name.clone(),
            expected: def.params.len(),
            found: type_args.len(),
        });
    }
    let m = param_map(&def.params, type_args);
    let subst = |t: &SrcType| t.substitute(&m);
    Ok(Def {
        name: def.name.clone(),
        params: Vec::new(),
        ty: subst(&def.ty),
        body: def.body.map_types(&subst),
        pos: def.pos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::parse_program;

    fn check(src: &str) -> Result<CheckedProgram, SourceError> {
        typecheck(&parse_program(src).unwrap())
    }

    const MAP: &str = "
      (def map (A B) (-> (-> A B) (list A) (list B))
        (lam (f (-> A B))
          (fix go 0 (-> (list A) (list B))
            (lam (l (list A))
              (match l list
                ((nil (ctor list.nil (B)))
                 ((cons h t) (ctor list.cons (B) (f h) (go t)))))))))";

    #[test]
    fn map_typechecks_and_monomorphizes() {
        let c = check(MAP).unwrap();
        let m = monomorphize(c.def("map").unwrap(), &[SrcType::nat(), SrcType::bool()]).unwrap();
        assert!(m.ty.is_concrete());
        assert_eq!(
            m.ty,
            SrcType::arrows(
                [
                    SrcType::arrow(SrcType::nat(), SrcType::bool()),
                    SrcType::list(SrcType::nat())
                ],
                SrcType::list(SrcType::bool())
            )
        );
        assert!(matches!(
            monomorphize(c.def("map").unwrap(), &[SrcType::nat()]),
            Err(SourceError::TypeArity { .. })
        ));
    }

    #[test]
    fn rejects_ill_typed_application() {
        let e = check("(def f nat ((lam (x nat) x) #t))").unwrap_err();
        assert!(matches!(e, SourceError::Type { .. }), "{e}");
    }

    #[test]
    fn rejects_sort_results() {
        let e = check("(def f (-> nat Type) (lam (x nat) x))").unwrap_err();
        assert!(matches!(e, SourceError::Admissibility { .. }), "{e}");
        let e = check("(def g (-> (forall (A) (-> A A)) nat) (lam (x nat) 0))").unwrap_err();
        assert!(matches!(e, SourceError::Admissibility { .. }), "{e}");
    }

    #[test]
    fn rejects_partial_instantiation() {
        let src = format!("{MAP} (def m2 (-> (list nat) (list nat)) (const map (nat) S))");
        let e = check(&src).unwrap_err();
        assert!(matches!(e, SourceError::Type { .. }), "{e}");
    }

    #[test]
    fn non_decreasing_recursion_is_rejected() {
        let e = check("(def f (-> nat nat) (fix f 0 (-> nat nat) (lam (x nat) (f x))))").unwrap_err();
        let SourceError::Guard { message, .. } = e else {
            panic!("{e}")
        };
        assert!(message.contains("((var 1) (var 0))"), "{message}");
    }

    #[test]
    fn nested_descent_is_accepted() {
        check(
            "(def half (-> nat nat)
               (fix half 0 (-> nat nat)
                 (lam (n nat)
                   (match n nat
                     ((O 0)
                      ((S m) (match m nat ((O 0) ((S k) (S (half k)))))))))))",
        )
        .unwrap();
    }

    #[test]
    fn escaping_self_reference_is_rejected() {
        let e = check(
            "(def f (-> nat nat)
               (fix f 0 (-> nat nat) (lam (x nat) ((lam (g (-> nat nat)) (g x)) f))))",
        )
        .unwrap_err();
        assert!(matches!(e, SourceError::Guard { .. }), "{e}");
    }
}
