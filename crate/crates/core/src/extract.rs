//! Syntax-directed compilation of checked source definitions into L.
//!
//! Variables map to variables, abstractions to abstractions, `fix` to `ρ`,
//! constructors to their Scott constructor terms, matches to applications
//! of the discriminee, and references to previously extracted definitions
//! to their dictionary entries.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::combinators::rho_open;
use crate::scott::{gen_constructor, match_lower, Registry, ScottError};
use crate::source::{monomorphize, type_of_with, CheckedProgram, SourceError, SrcExpr};
use crate::syntax::{print_term, Style};
use crate::term::Term;
use crate::types::SrcType;

/// Expression nesting allowed before extraction gives up.
pub const MAX_DEPTH: usize = 4_096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("no extracted term for `{0}`; extract it first")]
    MissingEntry(String),
    #[error("unknown definition `{0}`")]
    UnknownDef(String),
    #[error("`{0}` is instantiated with a type variable")]
    TypeVariable(String),
    #[error(
        "in `{def}`: function argument `{arg}` is not built from extracted names; \
         give it a top-level definition"
    )]
    HigherOrderArgument { def: String, arg: String },
    #[error("in `{def}`: {message}")]
    Ill { def: String, message: String },
    #[error("expression nesting exceeds {MAX_DEPTH}")]
    TooDeep,
    #[error("extracted term for `{0}` is not closed")]
    NotClosed(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Scott(#[from] ScottError),
}

/// Dictionary key: a definition or `adt.ctor`, with its type arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub name: String,
    pub type_args: Vec<SrcType>,
}

impl Key {
    pub fn new(name: &str, type_args: &[SrcType]) -> Key {
        Key {
            name: name.to_string(),
            type_args: type_args.to_vec(),
        }
    }
}

impl std::fmt::Display for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.type_args.is_empty() {
            let args: Vec<String> = self.type_args.iter().map(|t| t.to_string()).collect();
            write!(f, "[{}]", args.join(" "))?;
        }
        Ok(())
    }
}

/// The lifting environment: where each source variable lands in the term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexEnv {
    // indices past the end map to themselves
    map: Vec<usize>,
}

impl IndexEnv {
    pub fn identity() -> IndexEnv {
        IndexEnv::default()
    }

    pub fn get(&self, n: usize) -> usize {
        self.map.get(n).copied().unwrap_or(n)
    }

    /// Environment under one more binder: `0 ↦ 0`, `n+1 ↦ E(n)+1`.
    pub fn lift(&self) -> IndexEnv {
        let mut map = Vec::with_capacity(self.map.len() + 1);
        map.push(0);
        map.extend(self.map.iter().map(|i| i + 1));
        IndexEnv { map }
    }

    pub fn lift_n(&self, n: usize) -> IndexEnv {
        (0..n).fold(self.clone(), |e, _| e.lift())
    }
}

/// Extracted closed terms keyed by definition and instance, plus the
/// encoders of every datatype instance they use.
#[derive(Clone, Debug, Default)]
pub struct ExtractionEnv {
    pub registry: Registry,
    entries: BTreeMap<Key, Term>,
    order: Vec<Key>,
}

impl ExtractionEnv {
    /// An empty dictionary over the datatypes of `program`.
    pub fn new(program: &CheckedProgram) -> ExtractionEnv {
        ExtractionEnv {
            registry: program.registry.clone(),
            entries: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    pub fn get(&self, name: &str, type_args: &[SrcType]) -> Option<&Term> {
        self.entries.get(&Key::new(name, type_args))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entries in extraction order.
    pub fn entries(&self) -> impl Iterator<Item = (&Key, &Term)> {
        self.order.iter().map(|k| (k, &self.entries[k]))
    }

    fn insert(&mut self, key: Key, t: Term) {
        if self.entries.insert(key.clone(), t).is_none() {
            self.order.push(key);
        }
    }

    /// One `name<TAB>term` line per entry, in extraction order.
    pub fn dump(&self, style: Style) -> String {
        let mut out = String::new();
        for (k, t) in self.entries() {
            let _ = writeln!(out, "{k}\t{}", print_term(t, style));
        }
        out
    }
}

struct Extractor<'a> {
    env: &'a ExtractionEnv,
    sigs: BTreeMap<String, (Vec<String>, SrcType)>,
    def: &'a str,
}

impl Extractor<'_> {
    fn ill(&self, message: String) -> ExtractError {
        ExtractError::Ill {
            def: self.def.to_string(),
            message,
        }
    }

    fn type_of(&self, ctx: &[SrcType], e: &SrcExpr) -> Result<SrcType, ExtractError> {
        type_of_with(&self.env.registry, &self.sigs, ctx, e).map_err(|m| self.ill(m))
    }

    fn concrete(&self, name: &str, type_args: &[SrcType]) -> Result<(), ExtractError> {
        if type_args.iter().all(SrcType::is_concrete) {
            Ok(())
        } else {
            Err(ExtractError::TypeVariable(name.to_string()))
        }
    }

    fn lookup(&self, name: &str, type_args: &[SrcType]) -> Result<Term, ExtractError> {
        self.concrete(name, type_args)?;
        self.env
            .get(name, type_args)
            .cloned()
            .ok_or_else(|| ExtractError::MissingEntry(Key::new(name, type_args).to_string()))
    }

    fn extract(
        &self,
        ienv: &IndexEnv,
        ctx: &mut Vec<SrcType>,
        e: &SrcExpr,
        depth: usize,
    ) -> Result<Term, ExtractError> {
        if depth > MAX_DEPTH {
            return Err(ExtractError::TooDeep);
        }
        let d = depth + 1;
        match e {
            SrcExpr::Var(n) => Ok(Term::var(ienv.get(*n))),
            SrcExpr::Lam { ty, body, .. } => {
                ctx.push(ty.clone());
                let b = self.extract(&ienv.lift(), ctx, body, d);
                ctx.pop();
                Ok(Term::lam(b?))
            }
            SrcExpr::Fix { ty, body, .. } => {
                ctx.push(ty.clone());
                let b = self.extract(&ienv.lift(), ctx, body, d);
                ctx.pop();
                Ok(rho_open(&Term::lam(b?)))
            }
            SrcExpr::App(..) => {
                let (head, args) = e.spine();
                let mut out = self.extract(ienv, ctx, head, d)?;
                for a in args {
                    if let SrcType::Arrow(..) = self.type_of(ctx, a)? {
                        let (h, _) = a.spine();
                        if !matches!(h, SrcExpr::Const { .. } | SrcExpr::Ctor { .. } | SrcExpr::Var(_)) {
                            return Err(ExtractError::HigherOrderArgument {
                                def: self.def.to_string(),
                                arg: a.to_string(),
                            });
                        }
                    }
                    out = Term::app(out, self.extract(ienv, ctx, a, d)?);
                }
                Ok(out)
            }
            SrcExpr::Ctor { adt, ctor, type_args } => {
                let def = self
                    .env
                    .registry
                    .adt(adt)
                    .ok_or_else(|| self.ill(format!("unknown datatype `{adt}`")))?;
                self.lookup(&format!("{adt}.{}", def.ctors[*ctor].name), type_args)
            }
            SrcExpr::Match {
                scrutinee,
                adt,
                branches,
            } => {
                let ts = self.type_of(ctx, scrutinee)?;
                let SrcType::Adt(_, args) = &ts else {
                    return Err(self.ill(format!("matching on {ts}")));
                };
                let def = self
                    .env
                    .registry
                    .adt(adt)
                    .ok_or_else(|| self.ill(format!("unknown datatype `{adt}`")))?;
                let disc = self.extract(ienv, ctx, scrutinee, d)?;
                let mut lowered = Vec::with_capacity(branches.len());
                for (i, b) in branches.iter().enumerate() {
                    let before = ctx.len();
                    ctx.extend(def.field_types(i, args));
                    let body = self.extract(&ienv.lift_n(b.arity), ctx, &b.body, d);
                    ctx.truncate(before);
                    lowered.push((b.arity, body?));
                }
                Ok(match_lower(disc, lowered, &def.arities())?)
            }
            SrcExpr::Const { name, type_args } => self.lookup(name, type_args),
            SrcExpr::Lit { ty, value } => {
                self.concrete("literal", std::slice::from_ref(ty))?;
                Ok(self.env.registry.encode(ty, value)?)
            }
        }
    }
}

/// Extracts `e` in a context whose variable types are `ctx` (innermost
/// last). Every referenced definition and constructor must already be in
/// `env`, and every literal's datatype registered.
pub fn extract_expr(
    env: &ExtractionEnv,
    program: &CheckedProgram,
    ienv: &IndexEnv,
    ctx: &[SrcType],
    e: &SrcExpr,
) -> Result<Term, ExtractError> {
    let x = Extractor {
        env,
        sigs: program.signatures(),
        def: "<expr>",
    };
    x.extract(ienv, &mut ctx.to_vec(), e, 0)
}

/// Stores the Scott constructor term of `adt.ctor` at `type_args`,
/// registering the datatype instance.
pub fn extract_ctor(
    env: &mut ExtractionEnv,
    adt: &str,
    ctor: usize,
    type_args: &[SrcType],
) -> Result<Term, ExtractError> {
    let def = env
        .registry
        .adt(adt)
        .ok_or_else(|| ScottError::UnknownAdt(adt.to_string()))?
        .clone();
    let c = def.ctors.get(ctor).ok_or(ScottError::CtorIndex {
        index: ctor,
        count: def.ctors.len(),
    })?;
    let key = Key::new(&format!("{adt}.{}", c.name), type_args);
    if let Some(t) = env.entries.get(&key) {
        return Ok(t.clone());
    }
    if !type_args.iter().all(SrcType::is_concrete) {
        return Err(ExtractError::TypeVariable(key.name));
    }
    env.registry
        .register_with_deps(&SrcType::Adt(adt.to_string(), type_args.to_vec()))?;
    let t = gen_constructor(c.fields.len(), def.ctors.len(), ctor)?;
    env.insert(key, t.clone());
    Ok(t)
}

fn literal_types(e: &SrcExpr, out: &mut Vec<SrcType>) {
    match e {
        SrcExpr::Lit { ty, .. } => out.push(ty.clone()),
        SrcExpr::Var(_) | SrcExpr::Ctor { .. } | SrcExpr::Const { .. } => {}
        SrcExpr::Lam { body, .. } | SrcExpr::Fix { body, .. } => literal_types(body, out),
        SrcExpr::App(a, b) => {
            literal_types(a, out);
            literal_types(b, out);
        }
        SrcExpr::Match {
            scrutinee, branches, ..
        } => {
            literal_types(scrutinee, out);
            for b in branches {
                literal_types(&b.body, out);
            }
        }
    }
}

/// Monomorphizes and extracts one definition, storing the result.
/// Re-extracting an existing entry returns it unchanged.
pub fn extract_def(
    env: &mut ExtractionEnv,
    program: &CheckedProgram,
    name: &str,
    type_args: &[SrcType],
) -> Result<Term, ExtractError> {
    if let Some(t) = env.get(name, type_args) {
        return Ok(t.clone());
    }
    let def = program
        .def(name)
        .ok_or_else(|| ExtractError::UnknownDef(name.to_string()))?;
    if !type_args.iter().all(SrcType::is_concrete) {
        return Err(ExtractError::TypeVariable(name.to_string()));
    }
    let mono = monomorphize(def, type_args)?;
    let mut lits = Vec::new();
    literal_types(&mono.body, &mut lits);
    for ty in lits {
        env.registry.register_with_deps(&ty)?;
    }
    let x = Extractor {
        env,
        sigs: program.signatures(),
        def: name,
    };
    let t = x.extract(&IndexEnv::identity(), &mut Vec::new(), &mono.body, 0)?;
    if !t.is_closed() {
        return Err(ExtractError::NotClosed(name.to_string()));
    }
    env.insert(Key::new(name, type_args), t.clone());
    Ok(t)
}

/// Extracts every requested `(definition, type arguments)` pair after
/// everything it depends on. A request may also name a constructor as
/// `adt.ctor`.
pub fn extract_program(
    env: &mut ExtractionEnv,
    program: &CheckedProgram,
    requests: &[(String, Vec<SrcType>)],
) -> Result<(), ExtractError> {
    for (name, args) in requests {
        require(env, program, name, args)?;
    }
    Ok(())
}

fn require(
    env: &mut ExtractionEnv,
    program: &CheckedProgram,
    name: &str,
    type_args: &[SrcType],
) -> Result<(), ExtractError> {
    if env.get(name, type_args).is_some() {
        return Ok(());
    }
    if program.def(name).is_none() {
        if let Some((adt, c)) = name.rsplit_once('.') {
            if let Some(i) = program.registry.adt(adt).and_then(|d| d.ctor_index(c)) {
                extract_ctor(env, adt, i, type_args)?;
                return Ok(());
            }
        }
        return Err(ExtractError::UnknownDef(name.to_string()));
    }
    let def = program.def(name).expect("checked above");
    let mono = monomorphize(def, type_args)?;
    let mut ctors = Vec::new();
    mono.body.ctor_refs(&mut ctors);
    for (adt, i, args) in ctors {
        extract_ctor(env, &adt, i, &args)?;
    }
    let mut consts = Vec::new();
    mono.body.const_refs(&mut consts);
    for (n, args) in consts {
        require(env, program, &n, &args)?;
    }
    extract_def(env, program, name, type_args)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{parse_program, typecheck};
    use crate::syntax::parse_term;

    const SRC: &str = "
      (def orb (-> bool bool bool) (lam (x bool) (y bool) (if x #t y)))
      (def succ (-> nat nat) (lam (n nat) (S n)))
      (def map (A B) (-> (-> A B) (list A) (list B))
        (lam (f (-> A B))
          (fix go 0 (-> (list A) (list B))
            (lam (l (list A))
              (match l list
                ((nil (ctor list.nil (B)))
                 ((cons h t) (ctor list.cons (B) (f h) (go t)))))))))
      (def bad (-> (list nat) (list nat))
        (lam (l (list nat)) (const map (nat nat) (lam (x nat) x) l)))";

    fn program() -> CheckedProgram {
        typecheck(&parse_program(SRC).unwrap()).unwrap()
    }

    #[test]
    fn orb_extracts_to_its_scott_form() {
        let p = program();
        let mut env = ExtractionEnv::new(&p);
        let t = extract_def(&mut env, &p, "orb", &[]).unwrap();
        assert_eq!(t, parse_term("\\\\1 (\\\\1) 0").unwrap());
        assert_eq!(print_term(&t, Style::DeBruijn), "λλ(1 (λλ1) 0)");
    }

    #[test]
    fn variables_under_empty_environment() {
        let p = program();
        let env = ExtractionEnv::new(&p);
        let t = extract_expr(&env, &p, &IndexEnv::identity(), &[SrcType::nat()], &SrcExpr::Var(0)).unwrap();
        assert_eq!(t, Term::var(0));
    }

    #[test]
    fn index_env_lifts() {
        let e = IndexEnv::identity().lift();
        assert_eq!((e.get(0), e.get(1), e.get(5)), (0, 1, 5));
    }

    #[test]
    fn map_needs_constructors_first() {
        let p = program();
        let mut env = ExtractionEnv::new(&p);
        let nn = [SrcType::nat(), SrcType::nat()];
        assert!(matches!(
            extract_def(&mut env, &p, "map", &nn),
            Err(ExtractError::MissingEntry(_))
        ));
        extract_ctor(&mut env, "list", 0, &[SrcType::nat()]).unwrap();
        extract_ctor(&mut env, "list", 1, &[SrcType::nat()]).unwrap();
        let t = extract_def(&mut env, &p, "map", &nn).unwrap();
        assert!(t.is_proc());
        // λf. ρ(...)
        let Term::Lam(body) = &t else { panic!() };
        assert!(body.is_lam());
        assert_eq!(extract_def(&mut env, &p, "map", &nn).unwrap(), t);
        assert_eq!(env.len(), 3);
    }

    #[test]
    fn program_driver_collects_dependencies() {
        let p = program();
        let mut env = ExtractionEnv::new(&p);
        extract_program(
            &mut env,
            &p,
            &[
                ("map".into(), vec![SrcType::nat(), SrcType::nat()]),
                ("succ".into(), vec![]),
            ],
        )
        .unwrap();
        assert!(env.get("succ", &[]).is_some());
        assert!(env.get("nat.S", &[]).is_some());
        let before = env.dump(Style::DeBruijn);
        extract_program(&mut env, &p, &[]).unwrap();
        assert_eq!(env.dump(Style::DeBruijn), before);
        assert!(before.lines().all(|l| l.split('\t').count() == 2));
    }

    #[test]
    fn lambda_arguments_are_refused() {
        let p = program();
        let mut env = ExtractionEnv::new(&p);
        let e = extract_program(&mut env, &p, &[("bad".into(), vec![])]).unwrap_err();
        assert!(matches!(e, ExtractError::HigherOrderArgument { .. }), "{e}");
    }

    #[test]
    fn polymorphic_instances_need_concrete_types() {
        let p = program();
        let mut env = ExtractionEnv::new(&p);
        let e = extract_def(&mut env, &p, "map", &[SrcType::param("A"), SrcType::nat()]).unwrap_err();
        assert!(matches!(e, ExtractError::TypeVariable(_)));
    }
}
