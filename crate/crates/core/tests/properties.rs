//! Randomized invariants across the pipeline. Terms and values are drawn
//! from the crate's own uniform generators, seeded by proptest.

use std::sync::{Arc, OnceLock};

use lextract_core::combinators::{mu, rho};
use lextract_core::eval::{eval_cbv, machine_eval};
use lextract_core::extract::{extract_program, ExtractionEnv};
use lextract_core::gen::{random_closed, random_proc, random_under, TermCounts};
use lextract_core::harness::sweep::Sweep;
use lextract_core::harness::{Candidate, Harness, Sampler, TimeBound, Verdict};
use lextract_core::par::{with_stack, Mode};
use lextract_core::reductions::h10::{self, index};
use lextract_core::scott::{Registry, Value};
use lextract_core::source::{interp, monomorphize, typecheck, CheckedProgram, Def, Interp, RVal};
use lextract_core::stdlib;
use lextract_core::term::{enumerate_reductions, eva, Term};
use lextract_core::types::SrcType;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn closed(seed: u64, max: usize) -> Term {
    random_closed(&mut TermCounts::new(), &mut ChaCha8Rng::seed_from_u64(seed), max)
}

/// Substitution as the four defining equations.
fn subst_ref(s: &Term, k: usize, u: &Term) -> Term {
    match s {
        Term::Var(n) if *n == k => u.clone(),
        Term::Var(n) => Term::Var(*n),
        Term::App(a, b) => Term::app(subst_ref(a, k, u), subst_ref(b, k, u)),
        Term::Lam(b) => Term::lam(subst_ref(b, k + 1, u)),
    }
}

fn sweep() -> &'static Sweep {
    static S: OnceLock<Sweep> = OnceLock::new();
    S.get_or_init(|| Sweep::new(Arc::new(stdlib::program().clone())).expect("bundled library extracts"))
}

fn registry() -> &'static Registry {
    static R: OnceLock<Registry> = OnceLock::new();
    R.get_or_init(|| {
        let mut r = stdlib::program().registry.clone();
        for t in data_types() {
            r.register_with_deps(&t).expect("registers");
        }
        r
    })
}

fn data_types() -> Vec<SrcType> {
    let nat = SrcType::nat;
    vec![
        SrcType::bool(),
        nat(),
        SrcType::option(nat()),
        SrcType::list(nat()),
        SrcType::prod(nat(), SrcType::list(SrcType::bool())),
        h10::poly_type(),
        lextract_core::reductions::universal::term_type(),
    ]
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn subst_satisfies_its_equations(seed: u64, k in 0usize..4) {
        let mut counts = TermCounts::new();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let s = random_under(&mut counts, &mut r, 14, 5);
        let u = random_under(&mut counts, &mut r, 6, 3);
        prop_assert_eq!(s.subst(k, &u), subst_ref(&s, k, &u));
    }

    #[test]
    fn nothing_reduces_under_a_binder(seed: u64) {
        let body = closed(seed, 14);
        prop_assert!(Term::lam(body.clone()).step_succs().is_empty());
        // an application of two abstractions has exactly the β-step
        let p = Term::lam(body);
        prop_assert_eq!(Term::app(p.clone(), p).step_succs().len(), 1);
    }

    #[test]
    fn reductions_are_uniformly_confluent(seed: u64) {
        let s = closed(seed, 12);
        let found = enumerate_reductions(&s, 30);
        prop_assert!(found.len() <= 1, "{} has {:?}", s, found);
        let cbv = eval_cbv(&s, 30);
        if let [(v, k)] = found.as_slice() {
            prop_assert_eq!(cbv.value(), Some(v));
            prop_assert_eq!(cbv.steps, *k as u64);
        } else {
            prop_assert!(cbv.is_exhausted());
        }
    }

    #[test]
    fn machine_agrees_with_substitution(seed: u64) {
        let s = closed(seed, 16);
        let (a, b) = with_stack(|| (eval_cbv(&s, 2_000), machine_eval(&s, 2_000).expect("closed")));
        prop_assert_eq!(a.value(), b.value());
        prop_assert_eq!(a.steps, b.steps);
        prop_assert_eq!(a.is_exhausted(), b.is_exhausted());
        if let Some(v) = a.value() {
            prop_assert!(v.is_proc());
        }
    }

    #[test]
    fn eva_is_sound_and_monotone(seed: u64, n in 0usize..12) {
        let s = closed(seed, 12);
        if let Some(t) = eva(n, &s) {
            prop_assert!(t.is_proc());
            let cbv = eval_cbv(&s, 100_000);
            prop_assert_eq!(cbv.value(), Some(&t));
            prop_assert_eq!(eva(n + 1, &s), Some(t));
        }
    }

    #[test]
    fn rho_unfolds_in_two_steps(a: u64, b: u64) {
        let (u, v) = (closed(a, 10), closed(b, 10));
        let u = if u.is_proc() { u } else { Term::lam(u) };
        let v = if v.is_proc() { v } else { Term::lam(v) };
        let ru = rho(&u).expect("closed procedure");
        let one = Term::app(ru.clone(), v.clone()).step_succs();
        prop_assert_eq!(one.len(), 1);
        let two = one[0].step_succs();
        prop_assert_eq!(two, vec![Term::apps(u, [ru, v])]);
    }

    #[test]
    fn encodings_round_trip(seed: u64, which in 0usize..7) {
        let reg = registry();
        let ty = &data_types()[which];
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let v = reg.random_value(ty, &mut r, 5).expect("samples");
        let w = reg.random_value(ty, &mut r, 5).expect("samples");
        let (e, f) = (reg.encode(ty, &v).expect("encodes"), reg.encode(ty, &w).expect("encodes"));
        prop_assert!(e.is_proc());
        prop_assert_eq!(reg.decode(ty, &e), Some(v.clone()));
        prop_assert_eq!(v == w, e == f);
    }
}

proptest! {
    #![proptest_config(config(50))]

    #[test]
    fn mu_finds_the_least_witness(k in 0u64..=20, leb: bool) {
        let env = &sweep().env;
        let nat = SrcType::nat();
        let kk = env.registry.encode(&nat, &Value::nat(k)).expect("nat");
        // λn. eqb k n, or λn. leb k n
        let test = env.get(if leb { "leb" } else { "eqb" }, &[]).expect("extracted").clone();
        let p = Term::lam(Term::apps(test, [kk, Term::var(0)]));
        let m = mu(&p).expect("closed procedure");
        let (found, steps) = with_stack(|| {
            let o = machine_eval(&m, 10_000_000).expect("closed");
            (o.value().and_then(|t| env.registry.decode(&nat, t)), o.steps)
        });
        prop_assert_eq!(found, Some(Value::nat(k)));
        // a larger budget cannot change the witness
        let again = with_stack(|| machine_eval(&m, 2 * steps + 1).expect("closed"));
        prop_assert_eq!(again.value().and_then(|t| env.registry.decode(&nat, t)), Some(Value::nat(k)));
        prop_assert_eq!(again.steps, steps);
    }

    #[test]
    fn monomorphization_commutes_with_interpretation(seed: u64) {
        let p = stdlib::program();
        let nat = SrcType::nat();
        let mut prog = p.program.clone();
        for name in ["map", "filter", "append"] {
            let targs = if name == "map" { vec![nat.clone(), nat.clone()] } else { vec![nat.clone()] };
            let mono = monomorphize(p.def(name).expect("bundled"), &targs).expect("monomorphizes");
            prog.defs.push(Def { name: format!("{name}_mono"), ..mono });
        }
        let p2: CheckedProgram = typecheck(&prog).expect("checks");
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let ty = SrcType::list(SrcType::nat());
        let reg = registry();
        let (l, m) = (reg.random_value(&ty, &mut r, 6).unwrap(), reg.random_value(&ty, &mut r, 6).unwrap());
        let a = interp(&p2, "append", &[l.clone(), m.clone()]).expect("total");
        prop_assert_eq!(&interp(&p2, "append_mono", &[l.clone(), m.clone()]).expect("total"), &a);
        // the interpreter is deterministic
        prop_assert_eq!(&interp(&p2, "append", &[l.clone(), m]).expect("total"), &a);
        let it = Interp::new(&p2);
        for (name, f) in [("map", "double"), ("filter", "even")] {
            let call = |def: &str| {
                it.call(def, vec![it.def_value(f).unwrap(), RVal::data(&l)])
                    .ok()
                    .and_then(|v| v.to_value())
            };
            let poly = call(name);
            prop_assert!(poly.is_some());
            prop_assert_eq!(call(&format!("{name}_mono")), poly);
        }
    }

    #[test]
    fn verdicts_do_not_depend_on_larger_budgets(seed: u64, which in 0usize..6) {
        let names = ["add", "eqb", "leb", "even", "cantor_next", "poly_eqb"];
        let s = sweep();
        let name = names[which];
        let (ty, cand) = Candidate::from_env(&s.env, &s.program, name, &[]).expect("extracted");
        let sampler = s.sampler(name, seed, 20);
        let h = Harness::new(&s.env.registry, 200_000).with_mode(Mode::Sequential);
        let a = h.check_computes(name, &ty, &cand, &sampler);
        if a.verdict == Verdict::Pass {
            let h2 = Harness::new(&s.env.registry, 400_000).with_mode(Mode::Sequential);
            let b = h2.check_computes(name, &ty, &cand, &sampler);
            prop_assert_eq!(b.verdict, Verdict::Pass);
            prop_assert_eq!(a.table.to_tsv(), b.table.to_tsv());
        }
    }

    #[test]
    fn time_checks_refine_correctness(seed: u64, c1 in 0u64..6, c2 in 0u64..400) {
        let s = sweep();
        let (ty, cand) = Candidate::from_env(&s.env, &s.program, "eqb", &[]).expect("extracted");
        let sampler = Sampler::new(seed, 30);
        let h = Harness::new(&s.env.registry, 100_000).with_mode(Mode::Sequential);
        let timed = h.check_computes_time("eqb", &ty, &cand.clone().with_bound(TimeBound::constants(&[c1, c2])), &sampler);
        if timed.verdict == Verdict::Pass {
            prop_assert_eq!(h.check_computes("eqb", &ty, &cand, &sampler).verdict, Verdict::Pass);
        }
    }

    #[test]
    fn cantor_pairing_is_a_bijection(k in 0u64..1_000_000) {
        let (a, b) = h10::unpair(k);
        prop_assert_eq!(h10::pair(a, b), k);
    }

    #[test]
    fn level_indices_round_trip(n in 3u64..7, seed: u64) {
        let len = index::triples_len(n).expect("fits");
        let i = (seed as u128) % len;
        let t = index::triple_at(n, i).expect("in range");
        let j = index::triple_index(n, &t).expect("indexed");
        prop_assert_eq!(index::triple_at(n, j), Some(t));
    }
}

#[test]
fn extraction_is_closed_and_deterministic() {
    let p = stdlib::program();
    let requests: Vec<(String, Vec<SrcType>)> = stdlib::instances()
        .into_iter()
        .map(|(n, t)| (n.to_string(), t))
        .collect();
    let mut a = ExtractionEnv::new(p);
    let mut b = ExtractionEnv::new(p);
    extract_program(&mut a, p, &requests).unwrap();
    extract_program(&mut b, p, &requests).unwrap();
    let ea: Vec<_> = a.entries().collect();
    let eb: Vec<_> = b.entries().collect();
    assert_eq!(ea, eb);
    for (k, t) in ea {
        assert!(t.is_closed(), "{k}");
        if p.def(&k.name).is_some() {
            assert!(t.is_proc(), "{k} is not a procedure");
        }
    }
}

#[test]
fn random_procedures_are_procedures() {
    let mut c = TermCounts::new();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    assert!((0..100).all(|_| random_proc(&mut c, &mut r, 9).is_proc()));
}
