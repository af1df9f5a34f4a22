//! Scott encodings of algebraic datatypes.
//!
//! Constructor `i` of an `n`-constructor type with fields `x1 .. xa` is
//! encoded as `λy1 .. yn. y_i (enc x1) .. (enc xa)`. Applying an encoding to
//! `n` branch values therefore selects a branch in exactly `n` beta steps.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::term::Term;
use crate::types::{param_map, SrcType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScottError {
    #[error("constructor index {index} out of range for {count} constructors")]
    CtorIndex { index: usize, count: usize },
    #[error("unknown datatype `{0}`")]
    UnknownAdt(String),
    #[error("datatype `{0}` declared twice")]
    DuplicateAdt(String),
    #[error("invalid datatype `{name}`: {reason}")]
    InvalidDefinition { name: String, reason: String },
    #[error("`{0}` is not a registered instance")]
    NotRegistered(SrcType),
    #[error("`{inst}` depends on unregistered instance `{dep}`")]
    UnregisteredDependency { inst: SrcType, dep: SrcType },
    #[error("`{0}` is not a fully instantiated datatype")]
    NotAnInstance(SrcType),
    #[error("value does not fit `{0}`")]
    IllFormedValue(SrcType),
    #[error("expected {expected} branches, found {found}")]
    BranchCount { expected: usize, found: usize },
    #[error("branch {branch} binds {found} fields, constructor has {expected}")]
    BranchArity {
        branch: usize,
        expected: usize,
        found: usize,
    },
    #[error("injection for `{inst}` is not injective: {a} and {b} collide")]
    InjectivityViolation { inst: SrcType, a: String, b: String },
    #[error("injection for `{inst}` has no inverse on {value}")]
    ProjectionMismatch { inst: SrcType, value: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDef {
    pub name: String,
    /// Field types; the datatype itself appears as `Adt(name, params)`.
    pub fields: Vec<SrcType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdtDef {
    pub name: String,
    pub params: Vec<String>,
    pub ctors: Vec<CtorDef>,
}

impl AdtDef {
    pub fn new(name: &str, params: &[&str], ctors: Vec<(&str, Vec<SrcType>)>) -> AdtDef {
        AdtDef {
            name: name.to_string(),
            params: params.iter().map(|p| p.to_string()).collect(),
            ctors: ctors
                .into_iter()
                .map(|(n, fields)| CtorDef {
                    name: n.to_string(),
                    fields,
                })
                .collect(),
        }
    }

    /// The datatype applied to its own parameters.
    pub fn self_type(&self) -> SrcType {
        SrcType::Adt(
            self.name.clone(),
            self.params.iter().map(|p| SrcType::Param(p.clone())).collect(),
        )
    }

    pub fn ctor_index(&self, name: &str) -> Option<usize> {
        self.ctors.iter().position(|c| c.name == name)
    }

    pub fn arities(&self) -> Vec<usize> {
        self.ctors.iter().map(|c| c.fields.len()).collect()
    }

    /// Field types of constructor `i` at the instance `args`.
    pub fn field_types(&self, i: usize, args: &[SrcType]) -> Vec<SrcType> {
        let m = param_map(&self.params, args);
        self.ctors[i].fields.iter().map(|f| f.substitute(&m)).collect()
    }

    pub fn is_recursive_field(&self, t: &SrcType) -> bool {
        *t == self.self_type()
    }
}

/// A constructor tree. Which datatype it inhabits is tracked externally.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Value {
    pub ctor: usize,
    pub args: Vec<Value>,
}

// Constructor orders of the standard datatypes:
// bool = true | false, nat = O | S, list = nil | cons, option = none | some,
// prod = pair.
impl Value {
    pub fn new(ctor: usize, args: Vec<Value>) -> Value {
        Value { ctor, args }
    }

    pub fn leaf(ctor: usize) -> Value {
        Value { ctor, args: Vec::new() }
    }

    pub fn bool(b: bool) -> Value {
        Value::leaf(if b { 0 } else { 1 })
    }

    pub fn nat(n: u64) -> Value {
        (0..n).fold(Value::leaf(0), |v, _| Value::new(1, vec![v]))
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Value {
        let items: Vec<_> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(Value::leaf(0), |tl, hd| Value::new(1, vec![hd, tl]))
    }

    pub fn nat_list(ns: &[u64]) -> Value {
        Value::list(ns.iter().map(|&n| Value::nat(n)))
    }

    pub fn none() -> Value {
        Value::leaf(0)
    }

    pub fn some(v: Value) -> Value {
        Value::new(1, vec![v])
    }

    pub fn option(v: Option<Value>) -> Value {
        v.map_or_else(Value::none, Value::some)
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::new(0, vec![a, b])
    }

    pub fn as_bool(&self) -> Option<bool> {
        match (self.ctor, self.args.len()) {
            (0, 0) => Some(true),
            (1, 0) => Some(false),
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        let mut n = 0;
        let mut v = self;
        loop {
            match (v.ctor, v.args.as_slice()) {
                (0, []) => return Some(n),
                (1, [p]) => {
                    n += 1;
                    v = p;
                }
                _ => return None,
            }
        }
    }

    pub fn as_list(&self) -> Option<Vec<&Value>> {
        let mut out = Vec::new();
        let mut v = self;
        loop {
            match (v.ctor, v.args.as_slice()) {
                (0, []) => return Some(out),
                (1, [hd, tl]) => {
                    out.push(hd);
                    v = tl;
                }
                _ => return None,
            }
        }
    }

    pub fn as_option(&self) -> Option<Option<&Value>> {
        match (self.ctor, self.args.as_slice()) {
            (0, []) => Some(None),
            (1, [x]) => Some(Some(x)),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match (self.ctor, self.args.as_slice()) {
            (0, [a, b]) => Some((a, b)),
            _ => None,
        }
    }

    /// Number of constructor nodes.
    pub fn node_count(&self) -> usize {
        let mut stack = vec![self];
        let mut n = 0;
        while let Some(v) = stack.pop() {
            n += 1;
            stack.extend(v.args.iter());
        }
        n
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return write!(f, "#{}", self.ctor);
        }
        write!(f, "(#{}", self.ctor)?;
        for a in &self.args {
            write!(f, " {a:?}")?;
        }
        write!(f, ")")
    }
}

/// `λx1 .. xa. λy1 .. yn. y_i x1 .. xa`, with `i` counted from 0.
pub fn gen_constructor(a: usize, n: usize, i: usize) -> Result<Term, ScottError> {
    if i >= n {
        return Err(ScottError::CtorIndex { index: i, count: n });
    }
    let head = Term::var(n - 1 - i);
    let fields = (0..a).map(|j| Term::var(n + a - 1 - j));
    Ok(Term::lams(a + n, Term::apps(head, fields)))
}

/// Applies `discriminee` to the branches in constructor order. A branch of
/// arity `a > 0` is wrapped in `a` binders, its first field outermost;
/// nullary branches are passed unchanged.
pub fn match_lower(
    discriminee: Term,
    branches: Vec<(usize, Term)>,
    ctor_arities: &[usize],
) -> Result<Term, ScottError> {
    if branches.len() != ctor_arities.len() {
        return Err(ScottError::BranchCount {
            expected: ctor_arities.len(),
            found: branches.len(),
        });
    }
    let mut out = discriminee;
    for (i, ((arity, body), &expected)) in branches.into_iter().zip(ctor_arities).enumerate() {
        if arity != expected {
            return Err(ScottError::BranchArity {
                branch: i,
                expected,
                found: arity,
            });
        }
        out = Term::app(out, Term::lams(arity, body));
    }
    Ok(out)
}

type InjectFn = Arc<dyn Fn(&Value) -> Value + Send + Sync>;
type ProjectFn = Arc<dyn Fn(&Value) -> Option<Value> + Send + Sync>;

#[derive(Clone)]
enum Encoder {
    Scott,
    Injected {
        target: SrcType,
        inject: InjectFn,
        project: ProjectFn,
    },
}

/// Datatype declarations plus the encoders of their registered instances.
#[derive(Clone, Default)]
pub struct Registry {
    adts: BTreeMap<String, AdtDef>,
    encoders: BTreeMap<SrcType, Encoder>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("adts", &self.adts.keys().collect::<Vec<_>>())
            .field("instances", &self.encoders.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// A registry with bool, nat, list, option and prod declared and the
    /// two monomorphic ones registered.
    pub fn with_prelude() -> Registry {
        let mut r = Registry::new();
        for d in prelude_adts() {
            r.declare(d).expect("prelude datatypes are well formed");
        }
        r.register(&SrcType::bool()).expect("bool");
        r.register(&SrcType::nat()).expect("nat");
        r
    }

    pub fn declare(&mut self, def: AdtDef) -> Result<(), ScottError> {
        let invalid = |reason: String| ScottError::InvalidDefinition {
            name: def.name.clone(),
            reason,
        };
        if self.adts.contains_key(&def.name) {
            return Err(ScottError::DuplicateAdt(def.name.clone()));
        }
        if def.ctors.is_empty() {
            return Err(invalid("no constructors".into()));
        }
        for (i, c) in def.ctors.iter().enumerate() {
            if def.ctors[..i].iter().any(|d| d.name == c.name) {
                return Err(invalid(format!("constructor `{}` repeated", c.name)));
            }
        }
        let own = def.self_type();
        for c in &def.ctors {
            for f in &c.fields {
                self.check_field(&def, &own, f).map_err(invalid)?;
            }
        }
        self.adts.insert(def.name.clone(), def);
        Ok(())
    }

    fn check_field(&self, def: &AdtDef, own: &SrcType, f: &SrcType) -> Result<(), String> {
        if f == own {
            return Ok(());
        }
        match f {
            SrcType::Param(p) if def.params.contains(p) => Ok(()),
            SrcType::Param(p) => Err(format!("unbound type parameter `{p}`")),
            SrcType::Adt(n, args) => {
                if n == &def.name || args.iter().any(|a| a.mentions_adt(&def.name)) {
                    return Err(format!("`{f}` is not a plain recursive occurrence"));
                }
                let other = self.adts.get(n).ok_or(format!("unknown datatype `{n}`"))?;
                if other.params.len() != args.len() {
                    return Err(format!("`{n}` expects {} type arguments", other.params.len()));
                }
                args.iter().try_for_each(|a| self.check_field(def, own, a))
            }
            SrcType::Arrow(..) => Err("function-typed fields are not encodable".into()),
            SrcType::Sort | SrcType::Forall(..) => Err(format!("`{f}` is not a data type")),
        }
    }

    pub fn adt(&self, name: &str) -> Option<&AdtDef> {
        self.adts.get(name)
    }

    pub fn adts(&self) -> impl Iterator<Item = &AdtDef> {
        self.adts.values()
    }

    pub fn is_registered(&self, inst: &SrcType) -> bool {
        self.encoders.contains_key(inst)
    }

    pub fn instances(&self) -> impl Iterator<Item = &SrcType> {
        self.encoders.keys()
    }

    fn instance<'a>(&'a self, inst: &'a SrcType) -> Result<(&'a AdtDef, &'a [SrcType]), ScottError> {
        let SrcType::Adt(name, args) = inst else {
            return Err(ScottError::NotAnInstance(inst.clone()));
        };
        if !inst.is_concrete() {
            return Err(ScottError::NotAnInstance(inst.clone()));
        }
        let def = self
            .adts
            .get(name)
            .ok_or_else(|| ScottError::UnknownAdt(name.clone()))?;
        if def.params.len() != args.len() {
            return Err(ScottError::NotAnInstance(inst.clone()));
        }
        Ok((def, args))
    }

    /// Registers the Scott encoder of a fully instantiated datatype. Every
    /// non-recursive field instance must already be registered.
    pub fn register(&mut self, inst: &SrcType) -> Result<(), ScottError> {
        if self.encoders.contains_key(inst) {
            return Ok(());
        }
        let (def, args) = self.instance(inst)?;
        for i in 0..def.ctors.len() {
            for f in def.field_types(i, args) {
                if &f != inst && !self.encoders.contains_key(&f) {
                    return Err(ScottError::UnregisteredDependency {
                        inst: inst.clone(),
                        dep: f,
                    });
                }
            }
        }
        self.encoders.insert(inst.clone(), Encoder::Scott);
        Ok(())
    }

    /// Registers `inst` together with every instance its fields need.
    pub fn register_with_deps(&mut self, inst: &SrcType) -> Result<(), ScottError> {
        if self.encoders.contains_key(inst) {
            return Ok(());
        }
        let (def, args) = self.instance(inst)?;
        let deps: Vec<SrcType> = (0..def.ctors.len())
            .flat_map(|i| def.field_types(i, args))
            .filter(|f| f != inst)
            .collect();
        for d in deps {
            self.register_with_deps(&d)?;
        }
        self.register(inst)
    }

    /// Registers `inst` by mapping its values injectively into the already
    /// registered `target`. Injectivity and the inverse are checked on
    /// `samples` generated values; a violation refuses the registration.
    pub fn register_injection(
        &mut self,
        inst: &SrcType,
        target: &SrcType,
        inject: impl Fn(&Value) -> Value + Send + Sync + 'static,
        project: impl Fn(&Value) -> Option<Value> + Send + Sync + 'static,
        samples: &[Value],
    ) -> Result<(), ScottError> {
        self.instance(inst)?;
        if !self.encoders.contains_key(target) {
            return Err(ScottError::NotRegistered(target.clone()));
        }
        let mut seen: BTreeMap<Value, &Value> = BTreeMap::new();
        for v in samples {
            let image = inject(v);
            if let Some(prev) = seen.get(&image) {
                if *prev != v {
                    return Err(ScottError::InjectivityViolation {
                        inst: inst.clone(),
                        a: format!("{prev:?}"),
                        b: format!("{v:?}"),
                    });
                }
            }
            seen.insert(image, v);
        }
        for (image, v) in &seen {
            if project(image).as_ref() != Some(*v) {
                return Err(ScottError::ProjectionMismatch {
                    inst: inst.clone(),
                    value: format!("{v:?}"),
                });
            }
        }
        self.encoders.insert(
            inst.clone(),
            Encoder::Injected {
                target: target.clone(),
                inject: Arc::new(inject),
                project: Arc::new(project),
            },
        );
        Ok(())
    }

    /// Checks that `v` inhabits `inst`.
    pub fn check_value(&self, inst: &SrcType, v: &Value) -> Result<(), ScottError> {
        let (def, args) = self.instance(inst)?;
        let mut stack = vec![v];
        while let Some(v) = stack.pop() {
            let Some(c) = def.ctors.get(v.ctor) else {
                return Err(ScottError::IllFormedValue(inst.clone()));
            };
            if c.fields.len() != v.args.len() {
                return Err(ScottError::IllFormedValue(inst.clone()));
            }
            for (f, a) in def.field_types(v.ctor, args).iter().zip(&v.args) {
                if f == inst {
                    stack.push(a);
                } else {
                    self.check_value(f, a)?;
                }
            }
        }
        Ok(())
    }

    pub fn encode(&self, inst: &SrcType, v: &Value) -> Result<Term, ScottError> {
        match self.encoders.get(inst) {
            None => Err(ScottError::NotRegistered(inst.clone())),
            Some(Encoder::Injected { target, inject, .. }) => self.encode(target, &inject(v)),
            Some(Encoder::Scott) => {
                let (def, args) = self.instance(inst)?;
                let n = def.ctors.len();
                let c = def
                    .ctors
                    .get(v.ctor)
                    .ok_or_else(|| ScottError::IllFormedValue(inst.clone()))?;
                if c.fields.len() != v.args.len() {
                    return Err(ScottError::IllFormedValue(inst.clone()));
                }
                let fields = def.field_types(v.ctor, args);
                let encoded = fields
                    .iter()
                    .zip(&v.args)
                    .map(|(f, a)| self.encode(f, a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Term::lams(n, Term::apps(Term::var(n - 1 - v.ctor), encoded)))
            }
        }
    }

    /// Inverse of [`Registry::encode`]: `Some(v)` iff `t` is exactly the
    /// encoding of `v`.
    pub fn decode(&self, inst: &SrcType, t: &Term) -> Option<Value> {
        match self.encoders.get(inst)? {
            Encoder::Injected {
                target,
                inject,
                project,
            } => {
                let image = self.decode(target, t)?;
                let v = project(&image)?;
                (inject(&v) == image).then_some(v)
            }
            Encoder::Scott => {
                let (def, args) = self.instance(inst).ok()?;
                let n = def.ctors.len();
                let mut body = t;
                for _ in 0..n {
                    let Term::Lam(b) = body else { return None };
                    body = b;
                }
                let mut fields = Vec::new();
                while let Term::App(f, a) = body {
                    fields.push(&**a);
                    body = f;
                }
                fields.reverse();
                let Term::Var(j) = body else { return None };
                let ctor = n.checked_sub(j + 1)?;
                let tys = def.field_types(ctor, args);
                if tys.len() != fields.len() {
                    return None;
                }
                let vals = tys
                    .iter()
                    .zip(fields)
                    .map(|(ty, f)| self.decode(ty, f))
                    .collect::<Option<Vec<_>>>()?;
                Some(Value::new(ctor, vals))
            }
        }
    }

    /// A random value of `inst`. Recursive constructors are chosen with
    /// decreasing probability as `depth` runs out.
    pub fn random_value<R: Rng + ?Sized>(
        &self,
        inst: &SrcType,
        rng: &mut R,
        depth: usize,
    ) -> Result<Value, ScottError> {
        let (def, args) = self.instance(inst)?;
        let recursive = |i: usize| def.ctors[i].fields.iter().any(|f| def.is_recursive_field(f));
        let base: Vec<usize> = (0..def.ctors.len()).filter(|&i| !recursive(i)).collect();
        let ctor = if depth == 0 && !base.is_empty() {
            base[rng.gen_range(0..base.len())]
        } else {
            rng.gen_range(0..def.ctors.len())
        };
        let fields = def.field_types(ctor, args);
        let vals = fields
            .iter()
            .map(|f| self.random_value(f, rng, depth.saturating_sub(1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Value::new(ctor, vals))
    }

    /// Human-readable rendering: numerals, lists and booleans in literal
    /// form, everything else as constructor applications.
    pub fn show(&self, inst: &SrcType, v: &Value) -> String {
        let mut out = String::new();
        self.show_into(inst, v, &mut out);
        out
    }

    fn show_into(&self, inst: &SrcType, v: &Value, out: &mut String) {
        let SrcType::Adt(name, args) = inst else {
            out.push_str(&format!("{v:?}"));
            return;
        };
        match (name.as_str(), args.as_slice()) {
            ("nat", []) => {
                if let Some(n) = v.as_nat() {
                    out.push_str(&n.to_string());
                    return;
                }
            }
            ("bool", []) => {
                if let Some(b) = v.as_bool() {
                    out.push_str(if b { "#t" } else { "#f" });
                    return;
                }
            }
            ("list", [el]) => {
                if let Some(items) = v.as_list() {
                    out.push('[');
                    for (i, x) in items.into_iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        self.show_into(el, x, out);
                    }
                    out.push(']');
                    return;
                }
            }
            _ => {}
        }
        let Some(def) = self.adts.get(name).filter(|d| d.params.len() == args.len()) else {
            out.push_str(&format!("{v:?}"));
            return;
        };
        let Some(c) = def.ctors.get(v.ctor) else {
            out.push_str(&format!("{v:?}"));
            return;
        };
        if v.args.is_empty() {
            out.push_str(&c.name);
            return;
        }
        out.push('(');
        out.push_str(&c.name);
        for (f, a) in def.field_types(v.ctor, args).iter().zip(&v.args) {
            out.push(' ');
            self.show_into(f, a, out);
        }
        out.push(')');
    }
}

/// bool, nat, list, option and prod, in their standard constructor orders.
pub fn prelude_adts() -> Vec<AdtDef> {
    let a = || SrcType::param("A");
    let b = || SrcType::param("B");
    vec![
        AdtDef::new("bool", &[], vec![("true", vec![]), ("false", vec![])]),
        AdtDef::new("nat", &[], vec![("O", vec![]), ("S", vec![SrcType::nat()])]),
        AdtDef::new(
            "list",
            &["A"],
            vec![("nil", vec![]), ("cons", vec![a(), SrcType::list(a())])],
        ),
        AdtDef::new("option", &["A"], vec![("none", vec![]), ("some", vec![a()])]),
        AdtDef::new("prod", &["A", "B"], vec![("pair", vec![a(), b()])]),
    ]
}
