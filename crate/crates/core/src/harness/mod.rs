//! Sampling checks of the correctness and time relations between source
//! functions and extracted terms, and step measurement.
//!
//! A candidate computes its reference at a base type when its term is the
//! encoding of the reference value. At an arrow type it must be a
//! procedure, and applying it to any argument candidate must reach a
//! normal form that computes the applied reference. Arguments of base type
//! come from a [`Sampler`]; functional arguments from its pool of candidates
//! checked beforehand.

pub mod bound;
mod fit;
mod sample;
pub mod sweep;

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::eval::machine_eval;
use crate::extract::ExtractionEnv;
use crate::par::{self, Mode};
use crate::scott::{Registry, ScottError, Value};
use crate::source::{CheckedProgram, Interp, RVal, SourceError};
use crate::term::Term;
use crate::types::SrcType;

pub use bound::{measure, BoundError, BoundSpec};
pub use fit::{fit_affine, fit_upper, AffineFit, FitError, UpperFit};
pub use sample::{Sampler, DEFAULT_SAMPLES};

#[derive(Clone, PartialEq, Eq)]
pub enum TyDesc {
    Base(SrcType),
    Arrow(Box<TyDesc>, Box<TyDesc>),
}

impl TyDesc {
    pub fn arrow(a: TyDesc, b: TyDesc) -> TyDesc {
        TyDesc::Arrow(Box::new(a), Box::new(b))
    }

    /// `None` for types mentioning parameters or sorts.
    pub fn from_src(t: &SrcType) -> Option<TyDesc> {
        match t {
            SrcType::Arrow(a, b) => Some(TyDesc::arrow(TyDesc::from_src(a)?, TyDesc::from_src(b)?)),
            SrcType::Adt(..) if t.is_concrete() => Some(TyDesc::Base(t.clone())),
            _ => None,
        }
    }

    pub fn to_src(&self) -> SrcType {
        match self {
            TyDesc::Base(t) => t.clone(),
            TyDesc::Arrow(a, b) => SrcType::arrow(a.to_src(), b.to_src()),
        }
    }

    /// Argument types and the final base type.
    pub fn uncurry(&self) -> (Vec<&TyDesc>, &SrcType) {
        let mut args = Vec::new();
        let mut t = self;
        loop {
            match t {
                TyDesc::Arrow(a, b) => {
                    args.push(&**a);
                    t = b;
                }
                TyDesc::Base(r) => return (args, r),
            }
        }
    }
}

impl fmt::Display for TyDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_src())
    }
}

impl fmt::Debug for TyDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type BoundFn = dyn Fn(&Reference, &TimeBound) -> (u64, TimeBound) + Send + Sync;

/// Claimed β-step budgets per curried application. At an arrow, given the
/// argument and the argument's own bound, yields the budget of this
/// application and the bound of the partial application.
#[derive(Clone)]
pub enum TimeBound {
    Unit,
    Arrow(Arc<BoundFn>),
}

impl TimeBound {
    pub fn arrow(f: impl Fn(&Reference, &TimeBound) -> (u64, TimeBound) + Send + Sync + 'static) -> TimeBound {
        TimeBound::Arrow(Arc::new(f))
    }

    /// A bound with constant budgets for each application.
    pub fn constants(ns: &[u64]) -> TimeBound {
        match ns.split_first() {
            None => TimeBound::Unit,
            Some((&n, rest)) => {
                let rest = rest.to_vec();
                TimeBound::arrow(move |_, _| (n, TimeBound::constants(&rest)))
            }
        }
    }

    pub fn apply(&self, arg: &Reference, arg_bound: &TimeBound) -> Option<(u64, TimeBound)> {
        match self {
            TimeBound::Unit => None,
            TimeBound::Arrow(f) => Some(f(arg, arg_bound)),
        }
    }
}

impl fmt::Debug for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Unit => write!(f, "Unit"),
            TimeBound::Arrow(_) => write!(f, "Arrow(..)"),
        }
    }
}

type NativeFn = Arc<dyn Fn(&[Value]) -> Value + Send + Sync>;

/// What a candidate is supposed to compute.
#[derive(Clone)]
pub enum Reference {
    Data(Value),
    /// A definition of a checked program, run by the interpreter.
    Def {
        program: Arc<CheckedProgram>,
        name: String,
    },
    Ctor {
        adt: String,
        ctor: usize,
        arity: usize,
    },
    Native {
        name: String,
        arity: usize,
        f: NativeFn,
    },
}

impl Reference {
    pub fn def(program: &Arc<CheckedProgram>, name: &str) -> Reference {
        Reference::Def {
            program: program.clone(),
            name: name.to_string(),
        }
    }

    pub fn native(name: &str, arity: usize, f: impl Fn(&[Value]) -> Value + Send + Sync + 'static) -> Reference {
        Reference::Native {
            name: name.to_string(),
            arity,
            f: Arc::new(f),
        }
    }

    fn program(&self) -> Option<&Arc<CheckedProgram>> {
        match self {
            Reference::Def { program, .. } => Some(program),
            _ => None,
        }
    }

    fn to_rval(&self, it: Option<&Interp<'_>>) -> Result<RVal, String> {
        match self {
            Reference::Data(v) => Ok(RVal::data(v)),
            Reference::Def { name, .. } => it
                .ok_or("definition used without its program")?
                .def_value(name)
                .map_err(|e| e.to_string()),
            Reference::Ctor { ctor, arity, .. } => {
                let ctor = *ctor;
                Ok(RVal::native(*arity, move |a| Value::new(ctor, a.to_vec())))
            }
            Reference::Native { arity, f, .. } => {
                let f = f.clone();
                Ok(RVal::native(*arity, move |a| f(a)))
            }
        }
    }

    /// Applies the reference to `args` and returns the resulting datum.
    pub fn call(&self, args: &[Reference]) -> Result<Value, String> {
        if let (Reference::Native { f, .. }, true) = (self, args.iter().all(|a| matches!(a, Reference::Data(_)))) {
            let vals: Vec<Value> = args
                .iter()
                .map(|a| match a {
                    Reference::Data(v) => v.clone(),
                    _ => unreachable!(),
                })
                .collect();
            return Ok(f(&vals));
        }
        let program = std::iter::once(self).chain(args).find_map(Reference::program);
        let it = program.map(|p| Interp::new(p));
        let mut f = self.to_rval(it.as_ref())?;
        for a in args {
            let a = a.to_rval(it.as_ref())?;
            f = match &it {
                Some(it) => it.apply(f, a).map_err(|e| e.to_string())?,
                None => apply_native(f, a)?,
            };
        }
        f.to_value().ok_or_else(|| "reference did not return data".to_string())
    }
}

fn apply_native(f: RVal, a: RVal) -> Result<RVal, String> {
    match f {
        RVal::Native { arity, f, mut args } => {
            args.push(a);
            if args.len() < arity {
                return Ok(RVal::Native { arity, f, args });
            }
            let vals = args
                .iter()
                .map(RVal::to_value)
                .collect::<Option<Vec<_>>>()
                .ok_or("native function applied to a function")?;
            Ok(RVal::data(&f(&vals)))
        }
        _ => Err("applying a datum".into()),
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Data(v) => write!(f, "{v:?}"),
            Reference::Def { name, .. } | Reference::Native { name, .. } => write!(f, "{name}"),
            Reference::Ctor { adt, ctor, .. } => write!(f, "{adt}#{ctor}"),
        }
    }
}

/// A closed term claimed to compute `reference`, with an optional bound.
#[derive(Clone)]
pub struct Candidate {
    pub reference: Reference,
    pub term: Term,
    pub bound: Option<TimeBound>,
    /// How the candidate is shown in reports; defaults to the reference.
    pub label: Option<String>,
}

impl Candidate {
    pub fn new(reference: Reference, term: Term) -> Candidate {
        Candidate {
            reference,
            term,
            bound: None,
            label: None,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.reference.to_string())
    }

    pub fn data(registry: &Registry, ty: &SrcType, v: &Value) -> Result<Candidate, ScottError> {
        Ok(Candidate {
            reference: Reference::Data(v.clone()),
            term: registry.encode(ty, v)?,
            bound: Some(TimeBound::Unit),
            label: Some(registry.show(ty, v)),
        })
    }

    /// The dictionary entry of `name` at `type_args` against the
    /// interpreted definition, with its monomorphic type.
    pub fn from_env(
        env: &ExtractionEnv,
        program: &Arc<CheckedProgram>,
        name: &str,
        type_args: &[SrcType],
    ) -> Result<(TyDesc, Candidate), SourceError> {
        let def = program
            .def(name)
            .ok_or_else(|| SourceError::Eval(format!("unknown definition `{name}`")))?;
        let mono = crate::source::monomorphize(def, type_args)?;
        let ty =
            TyDesc::from_src(&mono.ty).ok_or_else(|| SourceError::Eval(format!("`{name}` has no concrete type")))?;
        let term = env
            .get(name, type_args)
            .ok_or_else(|| SourceError::Eval(format!("`{name}` is not extracted")))?
            .clone();
        Ok((ty, Candidate::new(Reference::def(program, name), term)))
    }

    pub fn with_bound(mut self, b: TimeBound) -> Candidate {
        self.bound = Some(b);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// Fail dominates inconclusive, which dominates pass.
    pub fn merge(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// One argument tuple: measured steps and claimed bounds per application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub inputs: Vec<String>,
    pub args: Vec<Option<Value>>,
    pub steps: Vec<Option<u64>>,
    pub bounds: Vec<Option<u64>>,
    pub verdict: Verdict,
    pub note: String,
}

impl Row {
    /// Steps of application `i`, when it finished.
    pub fn step(&self, i: usize) -> Option<u64> {
        self.steps.get(i).copied().flatten()
    }

    /// Data arguments; `None` if any argument is a function.
    pub fn data_args(&self) -> Option<Vec<&Value>> {
        self.args.iter().map(Option::as_ref).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepTable {
    pub rows: Vec<Row>,
}

impl StepTable {
    /// Tab-separated: inputs, steps per application, bounds, verdict.
    pub fn to_tsv(&self) -> String {
        let k = self.rows.iter().map(|r| r.inputs.len()).max().unwrap_or(0);
        let mut out = String::new();
        let cols: Vec<String> = (1..=k)
            .map(|i| format!("in{i}"))
            .chain((1..=k).map(|i| format!("steps{i}")))
            .chain((1..=k).map(|i| format!("bound{i}")))
            .chain(["verdict".to_string()])
            .collect();
        out.push_str(&cols.join("\t"));
        out.push('\n');
        let opt = |x: Option<u64>| x.map_or("-".to_string(), |n| n.to_string());
        for r in &self.rows {
            let mut fields: Vec<String> = Vec::new();
            for i in 0..k {
                fields.push(r.inputs.get(i).cloned().unwrap_or_default());
            }
            for i in 0..k {
                fields.push(opt(r.steps.get(i).copied().flatten()));
            }
            for i in 0..k {
                fields.push(opt(r.bounds.get(i).copied().flatten()));
            }
            fields.push(r.verdict.to_string());
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        out
    }

    /// `(feature, steps of application i)` for every finished data row.
    pub fn points(&self, i: usize, feature: impl Fn(&[&Value]) -> f64) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| Some((feature(&r.data_args()?), r.step(i)? as f64)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub table: StepTable,
    /// The first failing row, spelled out.
    pub counterexample: Option<String>,
}

impl CheckReport {
    fn from_rows(name: &str, seed: u64, rows: Vec<Row>) -> CheckReport {
        let verdict = rows.iter().fold(Verdict::Pass, |v, r| v.merge(r.verdict));
        let counterexample = rows
            .iter()
            .find(|r| r.verdict == Verdict::Fail)
            .map(|r| format!("inputs [{}]: {}", r.inputs.join(", "), r.note));
        CheckReport {
            name: name.to_string(),
            seed,
            verdict,
            table: StepTable { rows },
            counterexample,
        }
    }

    pub fn samples(&self) -> usize {
        self.table.rows.len()
    }

    pub fn failures(&self) -> usize {
        self.table.rows.iter().filter(|r| r.verdict == Verdict::Fail).count()
    }

    /// The summary line plus the counterexample, if any.
    pub fn summary(&self) -> String {
        let mut s = self.to_string();
        if let Some(c) = &self.counterexample {
            let _ = write!(s, "\n  counterexample {c}");
        }
        s
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} samples={} failures={}",
            self.name,
            self.verdict,
            self.samples(),
            self.failures()
        )
    }
}

/// Runs checks with one registry, β-step budget and execution mode.
#[derive(Clone, Debug)]
pub struct Harness {
    pub registry: Registry,
    pub budget: u64,
    pub mode: Mode,
    /// Require measured steps to equal the bound rather than stay below.
    pub exact_time: bool,
}

enum Timing {
    Off,
    On,
}

impl Harness {
    pub fn new(registry: &Registry, budget: u64) -> Harness {
        Harness {
            registry: registry.clone(),
            budget,
            mode: Mode::best(),
            exact_time: false,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Harness {
        self.mode = mode;
        self
    }

    fn register(&mut self, ty: &TyDesc) -> Result<(), ScottError> {
        match ty {
            TyDesc::Base(t) => self.registry.register_with_deps(t),
            TyDesc::Arrow(a, b) => {
                self.register(a)?;
                self.register(b)
            }
        }
    }

    /// The correctness relation, on sampled arguments.
    pub fn check_computes(&self, name: &str, ty: &TyDesc, cand: &Candidate, sampler: &Sampler) -> CheckReport {
        self.check(name, ty, cand, sampler, Timing::Off)
    }

    /// The time relation: as [`Harness::check_computes`], and every
    /// application stays within the candidate's bound.
    pub fn check_computes_time(&self, name: &str, ty: &TyDesc, cand: &Candidate, sampler: &Sampler) -> CheckReport {
        self.check(name, ty, cand, sampler, Timing::On)
    }

    fn check(&self, name: &str, ty: &TyDesc, cand: &Candidate, sampler: &Sampler, timing: Timing) -> CheckReport {
        let mut h = self.clone();
        if let Err(e) = h.register(ty) {
            return CheckReport::from_rows(name, sampler.seed, vec![broken_row(e.to_string())]);
        }
        let (args, _) = ty.uncurry();
        if args.is_empty() {
            let row = h.base_row(ty, cand);
            return CheckReport::from_rows(name, sampler.seed, vec![row]);
        }
        if !cand.term.is_proc() {
            return CheckReport::from_rows(name, sampler.seed, vec![broken_row("term is not a procedure".into())]);
        }
        if matches!(timing, Timing::On) && cand.bound.is_none() {
            return CheckReport::from_rows(name, sampler.seed, vec![broken_row("no time bound given".into())]);
        }
        let tuples = match sampler.tuples(&h.registry, ty) {
            Ok(t) => t,
            Err(e) => return CheckReport::from_rows(name, sampler.seed, vec![broken_row(e)]),
        };
        let timed = matches!(timing, Timing::On);
        let rows = par::map(h.mode, tuples, |tuple| h.run_tuple(ty, cand, &tuple, timed));
        CheckReport::from_rows(name, sampler.seed, rows)
    }

    fn base_row(&self, ty: &TyDesc, cand: &Candidate) -> Row {
        let TyDesc::Base(t) = ty else { unreachable!("base type") };
        let mut row = empty_row(&[]);
        let want = cand
            .reference
            .call(&[])
            .and_then(|v| self.registry.encode(t, &v).map_err(|e| e.to_string()));
        match want {
            Ok(w) if w == cand.term => {}
            Ok(_) => fail(&mut row, "term is not the encoding of the reference".into()),
            Err(e) => fail(&mut row, e),
        }
        row
    }

    fn run_tuple(&self, ty: &TyDesc, cand: &Candidate, tuple: &[Candidate], timed: bool) -> Row {
        let (_, result) = ty.uncurry();
        let mut row = empty_row(tuple);
        let mut t = cand.term.clone();
        let mut bound = cand.bound.clone().unwrap_or(TimeBound::Unit);
        for (i, a) in tuple.iter().enumerate() {
            let out = match machine_eval(&Term::app(t, a.term.clone()), self.budget) {
                Ok(o) => o,
                Err(e) => {
                    fail(&mut row, e.to_string());
                    return row;
                }
            };
            if timed {
                let arg_bound = a.bound.clone().unwrap_or(TimeBound::Unit);
                match bound.apply(&a.reference, &arg_bound) {
                    Some((n, next)) => {
                        row.bounds[i] = Some(n);
                        bound = next;
                    }
                    None => {
                        fail(&mut row, format!("bound has no budget for application {}", i + 1));
                        return row;
                    }
                }
            }
            let Some(v) = out.normal_form else {
                row.verdict = Verdict::Inconclusive;
                row.note = format!("budget of {} steps exhausted at application {}", self.budget, i + 1);
                return row;
            };
            row.steps[i] = Some(out.steps);
            if let Some(n) = row.bounds[i] {
                let ok = if self.exact_time {
                    out.steps == n
                } else {
                    out.steps <= n
                };
                if !ok {
                    let rel = if self.exact_time { "=" } else { "<=" };
                    fail(
                        &mut row,
                        format!("application {} took {} steps, bound {rel} {n}", i + 1, out.steps),
                    );
                }
            }
            if i + 1 < tuple.len() && !v.is_lam() {
                fail(&mut row, format!("application {} did not return a procedure", i + 1));
                return row;
            }
            t = v;
        }
        let refs: Vec<Reference> = tuple.iter().map(|a| a.reference.clone()).collect();
        match cand.reference.call(&refs) {
            Err(e) => {
                row.verdict = row.verdict.merge(Verdict::Inconclusive);
                row.note = format!("reference failed: {e}");
            }
            Ok(want) => match self.registry.encode(result, &want) {
                Ok(w) if w == t => {}
                Ok(_) => {
                    let got = self
                        .registry
                        .decode(result, &t)
                        .map_or_else(|| format!("non-encoding {t}"), |v| self.registry.show(result, &v));
                    fail(
                        &mut row,
                        format!("expected {}, got {got}", self.registry.show(result, &want)),
                    );
                }
                Err(e) => fail(&mut row, format!("reference returned ill-formed data: {e}")),
            },
        }
        row
    }

    /// Exact β-steps per curried application of `cand` to each tuple. No
    /// verdicts beyond budget exhaustion.
    pub fn measure_steps(&self, cand: &Candidate, tuples: Vec<Vec<Candidate>>) -> StepTable {
        let rows = par::map(self.mode, tuples, |tuple| {
            let mut row = empty_row(&tuple);
            let mut t = cand.term.clone();
            for (i, a) in tuple.iter().enumerate() {
                match machine_eval(&Term::app(t.clone(), a.term.clone()), self.budget) {
                    Ok(out) => match out.normal_form {
                        Some(v) => {
                            row.steps[i] = Some(out.steps);
                            t = v;
                        }
                        None => {
                            row.verdict = Verdict::Inconclusive;
                            row.note = "budget exhausted".into();
                            break;
                        }
                    },
                    Err(e) => {
                        fail(&mut row, e.to_string());
                        break;
                    }
                }
            }
            row
        });
        StepTable { rows }
    }

    /// Data-argument tuples as candidates, registering their types.
    pub fn data_tuples(&mut self, types: &[SrcType], tuples: &[Vec<Value>]) -> Result<Vec<Vec<Candidate>>, ScottError> {
        for t in types {
            self.registry.register_with_deps(t)?;
        }
        tuples
            .iter()
            .map(|vs| {
                types
                    .iter()
                    .zip(vs)
                    .map(|(t, v)| Candidate::data(&self.registry, t, v))
                    .collect()
            })
            .collect()
    }

    /// Pointwise agreement of two references on sampled arguments.
    pub fn check_extensional(
        &self,
        name: &str,
        a: &Reference,
        b: &Reference,
        ty: &TyDesc,
        sampler: &Sampler,
    ) -> CheckReport {
        let mut h = self.clone();
        if let Err(e) = h.register(ty) {
            return CheckReport::from_rows(name, sampler.seed, vec![broken_row(e.to_string())]);
        }
        let (_, result) = ty.uncurry();
        let tuples = match sampler.tuples(&h.registry, ty) {
            Ok(t) => t,
            Err(e) => return CheckReport::from_rows(name, sampler.seed, vec![broken_row(e)]),
        };
        let rows = par::map(h.mode, tuples, |tuple| {
            let mut row = empty_row(&tuple);
            let refs: Vec<Reference> = tuple.iter().map(|c| c.reference.clone()).collect();
            match (a.call(&refs), b.call(&refs)) {
                (Ok(x), Ok(y)) if x == y => {}
                (Ok(x), Ok(y)) => fail(
                    &mut row,
                    format!("{} vs {}", h.registry.show(result, &x), h.registry.show(result, &y)),
                ),
                (Err(e), _) | (_, Err(e)) => {
                    row.verdict = Verdict::Inconclusive;
                    row.note = e;
                }
            }
            row
        });
        CheckReport::from_rows(name, sampler.seed, rows)
    }
}

fn empty_row(tuple: &[Candidate]) -> Row {
    Row {
        inputs: tuple.iter().map(Candidate::label).collect(),
        args: tuple
            .iter()
            .map(|a| match &a.reference {
                Reference::Data(v) => Some(v.clone()),
                _ => None,
            })
            .collect(),
        steps: vec![None; tuple.len()],
        bounds: vec![None; tuple.len()],
        verdict: Verdict::Pass,
        note: String::new(),
    }
}

fn broken_row(note: String) -> Row {
    Row {
        inputs: Vec::new(),
        args: Vec::new(),
        steps: Vec::new(),
        bounds: Vec::new(),
        verdict: Verdict::Fail,
        note,
    }
}

fn fail(row: &mut Row, note: String) {
    if row.verdict != Verdict::Fail {
        row.note = note;
    }
    row.verdict = Verdict::Fail;
}

#[cfg(test)]
mod tests;
