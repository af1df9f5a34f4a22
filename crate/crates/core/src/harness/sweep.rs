//! Soundness sweep over the bundled definitions, and source-level mutants
//! that must be caught by it.

use std::sync::Arc;

use super::{Candidate, CheckReport, Harness, Reference, Sampler, TyDesc};
use crate::extract::{extract_program, ExtractError, ExtractionEnv};
use crate::par::Mode;
use crate::reductions::h10::{enumerate_polys, Poly};
use crate::scott::Value;
use crate::source::CheckedProgram;
use crate::stdlib;
use crate::term::Term;
use crate::types::SrcType;

/// β-step budget per application in the sweep.
pub const SWEEP_BUDGET: u64 = 20_000_000;

/// Functional arguments offered to higher-order definitions.
const POOL: &[&str] = &["nat.S", "pred", "double", "is_zero", "even", "add"];

fn nats(range: std::ops::RangeInclusive<u64>) -> Vec<Value> {
    range.map(Value::nat).collect()
}

/// Every list over `0..=3` of length at most 3.
fn small_lists() -> Vec<Value> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..3 {
        layer = layer
            .iter()
            .flat_map(|l: &Vec<u64>| (0..=3).map(move |x| [l.as_slice(), &[x]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out.iter().map(|l| Value::nat_list(l)).collect()
}

/// Domains for arguments whose cost grows too fast for the default
/// `0..=24` plus large draws.
fn restrict(name: &str, s: Sampler) -> Sampler {
    match name {
        "mul" => s.with_position(0, nats(0..=30)).with_position(1, nats(0..=30)),
        "eva" => s.with_position(0, nats(0..=8)),
        // nested products of large naturals make unary results huge
        "eval" => s
            .with_position(0, enumerate_polys(4).iter().map(Poly::to_value).collect())
            .with_position(1, small_lists()),
        "L_poly" | "h10_enum" => s.with_position(0, nats(0..=4)),
        "L_list_nat" => s.with_position(0, nats(0..=5)),
        // unpair k has level at most 4
        "h10_instance" => s.with_position(0, nats(0..=14)),
        _ => s,
    }
}

/// Every bundled instance plus the pool, extracted once.
pub struct Sweep {
    pub program: Arc<CheckedProgram>,
    pub env: ExtractionEnv,
    pool: Vec<(TyDesc, Candidate)>,
}

impl Sweep {
    pub fn new(program: Arc<CheckedProgram>) -> Result<Sweep, ExtractError> {
        let mut env = ExtractionEnv::new(&program);
        let requests: Vec<(String, Vec<SrcType>)> = stdlib::instances()
            .into_iter()
            .map(|(n, t)| (n.to_string(), t))
            .chain(POOL.iter().map(|n| (n.to_string(), vec![])))
            .collect();
        extract_program(&mut env, &program, &requests)?;
        let mut pool = Vec::new();
        for name in POOL {
            let cand = if let Some((adt, ctor)) = name.split_once('.') {
                let def = env.registry.adt(adt).expect("prelude type");
                let i = def.ctor_index(ctor).expect("prelude constructor");
                let arity = def.arities()[i];
                let reference = Reference::Ctor {
                    adt: adt.to_string(),
                    ctor: i,
                    arity,
                };
                let ty = SrcType::arrows(def.field_types(i, &[]), def.self_type());
                (
                    TyDesc::from_src(&ty).expect("concrete"),
                    Candidate::new(reference, env.get(name, &[]).expect("extracted").clone()),
                )
            } else {
                Candidate::from_env(&env, &program, name, &[]).expect("pool definition")
            };
            pool.push(cand);
        }
        Ok(Sweep { program, env, pool })
    }

    /// The sampler used for `name`: restricted domains and the pool.
    pub fn sampler(&self, name: &str, seed: u64, samples: usize) -> Sampler {
        let s = self.pool.iter().fold(Sampler::new(seed, samples), |s, (ty, c)| {
            s.with_pool(ty.clone(), c.clone())
        });
        restrict(name, s)
    }

    pub fn harness(&self, mode: Mode) -> Harness {
        Harness::new(&self.env.registry, SWEEP_BUDGET).with_mode(mode)
    }

    /// `check_computes` of one instance against its own definition.
    pub fn check(&self, name: &str, type_args: &[SrcType], seed: u64, samples: usize, mode: Mode) -> CheckReport {
        let (ty, cand) = Candidate::from_env(&self.env, &self.program, name, type_args).expect("instance is extracted");
        self.check_candidate(name, type_args, &ty, &cand, seed, samples, mode)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_candidate(
        &self,
        name: &str,
        type_args: &[SrcType],
        ty: &TyDesc,
        cand: &Candidate,
        seed: u64,
        samples: usize,
        mode: Mode,
    ) -> CheckReport {
        let label = crate::extract::Key::new(name, type_args).to_string();
        self.harness(mode)
            .check_computes(&label, ty, cand, &self.sampler(name, seed, samples))
    }

    /// Every bundled instance, in [`stdlib::instances`] order.
    pub fn run(&self, seed: u64, samples: usize, mode: Mode) -> Vec<CheckReport> {
        stdlib::instances()
            .iter()
            .map(|(n, t)| self.check(n, t, seed, samples, mode))
            .collect()
    }

    /// Extracts `m` and checks it against the unmutated definition.
    pub fn check_mutant(&self, m: &Mutant, seed: u64, samples: usize, mode: Mode) -> Result<MutantOutcome, String> {
        let src = m.apply(&stdlib_source())?;
        let mutated = stdlib::load(&[&src]).map_err(|e| e.to_string())?;
        let mut env = ExtractionEnv::new(&mutated);
        extract_program(&mut env, &mutated, &[(m.def.to_string(), vec![])]).map_err(|e| e.to_string())?;
        let term = env.get(m.def, &[]).expect("just extracted").clone();
        let original = self
            .env
            .get(m.def, &[])
            .ok_or("mutated definition is not in the sweep")?;
        let diff = var_diff(original, &term);
        let (ty, mut cand) = Candidate::from_env(&self.env, &self.program, m.def, &[]).map_err(|e| e.to_string())?;
        cand.term = term;
        let report = self.check_candidate(m.def, &[], &ty, &cand, seed, samples, mode);
        Ok(MutantOutcome { diff, report })
    }
}

/// The bundled `base`, `term` and `h10` sources as one text.
pub fn stdlib_source() -> String {
    [stdlib::BASE, stdlib::TERM, stdlib::H10].join("\n")
}

/// A one-token edit inside one definition's source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mutant {
    pub def: &'static str,
    pub from: &'static str,
    pub to: &'static str,
}

pub struct MutantOutcome {
    /// Differing variable nodes, `None` if the terms differ in shape.
    pub diff: Option<usize>,
    pub report: CheckReport,
}

impl Mutant {
    /// `src` with `from` replaced by `to` inside `(def <def> ...)`; `from`
    /// must occur there exactly once.
    pub fn apply(&self, src: &str) -> Result<String, String> {
        let (start, end) = def_span(src, self.def).ok_or_else(|| format!("no definition `{}`", self.def))?;
        let body = &src[start..end];
        match body.matches(self.from).count() {
            1 => Ok(format!(
                "{}{}{}",
                &src[..start],
                body.replacen(self.from, self.to, 1),
                &src[end..]
            )),
            n => Err(format!("`{}` occurs {n} times in `{}`", self.from, self.def)),
        }
    }
}

fn def_span(src: &str, name: &str) -> Option<(usize, usize)> {
    let head = format!("(def {name}");
    let start = src
        .match_indices(&head)
        .map(|(i, _)| i)
        .find(|&i| src[i + head.len()..].starts_with(|c: char| c.is_whitespace()))?;
    let mut depth = 0usize;
    for (off, c) in src[start..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((start, start + off + 1));
                }
            }
            _ => {}
        }
    }
    None
}

/// Number of variable nodes at which two same-shaped terms differ.
pub fn var_diff(a: &Term, b: &Term) -> Option<usize> {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => Some(usize::from(x != y)),
        (Term::App(s, t), Term::App(u, v)) => Some(var_diff(s, u)? + var_diff(t, v)?),
        (Term::Lam(s), Term::Lam(u)) => var_diff(s, u),
        _ => None,
    }
}

/// Edits that change exactly one variable of the extracted term.
pub const CURATED_MUTANTS: &[Mutant] = &[
    Mutant {
        def: "negb",
        from: "(if b #f #t)",
        to: "(if b #t #t)",
    },
    Mutant {
        def: "andb",
        from: "(if a b #f)",
        to: "(if a b #t)",
    },
    Mutant {
        def: "orb",
        from: "(if x #t y)",
        to: "(if x #f y)",
    },
    Mutant {
        def: "add",
        from: "((O y)",
        to: "((O x)",
    },
    Mutant {
        def: "mul",
        from: "(add y (mul p y))",
        to: "(add p (mul p y))",
    },
    Mutant {
        def: "eqb",
        from: "((O #t) ((S _) #f))",
        to: "((O #f) ((S _) #f))",
    },
    Mutant {
        def: "leb",
        from: "((O #t)",
        to: "((O #f)",
    },
    Mutant {
        def: "pred",
        from: "((S p) p)",
        to: "((S p) n)",
    },
    Mutant {
        def: "even",
        from: "((O #t)",
        to: "((O #f)",
    },
    Mutant {
        def: "cantor_next",
        from: "c (S b)",
        to: "c (S c)",
    },
    Mutant {
        def: "eval",
        from: "(add (eval a s) (eval b s))",
        to: "(add (eval a s) (eval a s))",
    },
    Mutant {
        def: "poly_eqb",
        from: "((poly_cst m) (eqb n m))",
        to: "((poly_cst m) (eqb n n))",
    },
    Mutant {
        def: "subst",
        from: "(term.app (subst a k u) (subst b k u))",
        to: "(term.app (subst a k u) (subst a k u))",
    },
    Mutant {
        def: "L_nat",
        from: "(list nat m)",
        to: "(list nat n)",
    },
    Mutant {
        def: "h10_test",
        from: "(eqb (eval p s) (eval q s))",
        to: "(eqb (eval p s) (eval p s))",
    },
];
