use std::sync::Arc;

use super::*;
use crate::extract::extract_program;
use crate::stdlib;

fn setup(requests: &[(&str, Vec<SrcType>)]) -> (Arc<CheckedProgram>, ExtractionEnv) {
    let p = Arc::new(stdlib::program().clone());
    let mut env = ExtractionEnv::new(&p);
    let reqs: Vec<(String, Vec<SrcType>)> = requests.iter().map(|(n, a)| (n.to_string(), a.clone())).collect();
    extract_program(&mut env, &p, &reqs).unwrap();
    (p, env)
}

#[test]
fn orb_computes_on_all_inputs() {
    let (p, env) = setup(&[("orb", vec![])]);
    let (ty, cand) = Candidate::from_env(&env, &p, "orb", &[]).unwrap();
    let h = Harness::new(&env.registry, 1_000);
    let r = h.check_computes("orb", &ty, &cand, &Sampler::new(1, DEFAULT_SAMPLES));
    assert_eq!((r.verdict, r.samples(), r.failures()), (Verdict::Pass, 4, 0));
    assert_eq!(r.to_string(), "CHECK orb pass samples=4 failures=0");
}

#[test]
fn orb_meets_its_time_bound_exactly() {
    let (p, env) = setup(&[("orb", vec![])]);
    let (ty, cand) = Candidate::from_env(&env, &p, "orb", &[]).unwrap();
    let mut h = Harness::new(&env.registry, 1_000);
    h.exact_time = true;
    let s = Sampler::new(1, DEFAULT_SAMPLES);
    let r = h.check_computes_time("orb", &ty, &cand.clone().with_bound(TimeBound::constants(&[1, 3])), &s);
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.table.to_tsv());
    let r = h.check_computes_time("orb", &ty, &cand.with_bound(TimeBound::constants(&[0, 3])), &s);
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.counterexample.unwrap().contains("application 1 took 1 steps"));
}

#[test]
fn swapped_branches_are_caught() {
    let (p, env) = setup(&[("orb", vec![])]);
    let (ty, mut cand) = Candidate::from_env(&env, &p, "orb", &[]).unwrap();
    // λλ(1 0 (λλ1)) instead of λλ(1 (λλ1) 0)
    cand.term = crate::syntax::parse_term("\\\\1 0 (\\\\1)").unwrap();
    let h = Harness::new(&env.registry, 1_000);
    let r = h.check_computes("orb", &ty, &cand, &Sampler::new(1, DEFAULT_SAMPLES));
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.failures(), 2);
    assert!(
        r.summary().contains("counterexample inputs [#t, #f]"),
        "{}",
        r.summary()
    );
}

#[test]
fn map_with_extracted_successor() {
    let nat = SrcType::nat;
    let (p, env) = setup(&[("map", vec![nat(), nat()]), ("nat.S", vec![])]);
    let (ty, cand) = Candidate::from_env(&env, &p, "map", &[nat(), nat()]).unwrap();
    let succ = Candidate::new(
        Reference::Ctor {
            adt: "nat".into(),
            ctor: 1,
            arity: 1,
        },
        env.get("nat.S", &[]).unwrap().clone(),
    );
    let fty = TyDesc::from_src(&SrcType::arrow(nat(), nat())).unwrap();
    let s = Sampler::new(3, DEFAULT_SAMPLES)
        .with_pool(fty, succ)
        .with_position(1, vec![Value::nat_list(&[1, 2])]);
    let h = Harness::new(&env.registry, 100_000);
    let r = h.check_computes("map", &ty, &cand, &s);
    assert_eq!(r.verdict, Verdict::Pass, "{}", r.summary());
    let mut h2 = h.clone();
    let tuples = h2
        .data_tuples(&[SrcType::list(nat())], &[vec![Value::nat_list(&[1, 2])]])
        .unwrap();
    let _ = tuples;
}

#[test]
fn tiny_budget_is_inconclusive() {
    let (p, env) = setup(&[("eva", vec![])]);
    let (ty, cand) = Candidate::from_env(&env, &p, "eva", &[]).unwrap();
    let h = Harness::new(&env.registry, 10);
    let r = h.check_computes("eva", &ty, &cand, &Sampler::new(5, 20));
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert_eq!(r.verdict.exit_code(), 2);
}

#[test]
fn base_candidates_compare_encodings() {
    let reg = Registry::with_prelude();
    let ty = TyDesc::Base(SrcType::nat());
    let h = Harness::new(&reg, 10);
    let good = Candidate::data(&reg, &SrcType::nat(), &Value::nat(3)).unwrap();
    let s = Sampler::new(0, 1);
    assert_eq!(h.check_computes("three", &ty, &good, &s).verdict, Verdict::Pass);
    let mut bad = good.clone();
    bad.term = reg.encode(&SrcType::nat(), &Value::nat(2)).unwrap();
    assert_eq!(h.check_computes("three", &ty, &bad, &s).verdict, Verdict::Fail);
}

#[test]
fn steps_are_measured_per_application() {
    let (p, env) = setup(&[("eqb", vec![])]);
    let (_, cand) = Candidate::from_env(&env, &p, "eqb", &[]).unwrap();
    let mut h = Harness::new(&env.registry, 100_000);
    let tuples: Vec<Vec<Value>> = (0..6)
        .flat_map(|x| (0..6).map(move |y| vec![Value::nat(x), Value::nat(y)]))
        .collect();
    let args = h.data_tuples(&[SrcType::nat(), SrcType::nat()], &tuples).unwrap();
    let t = h.measure_steps(&cand, args);
    assert_eq!(t.rows.len(), 36);
    assert!(t.rows.iter().all(|r| r.step(0).is_some() && r.step(1).is_some()));
    let first: Vec<u64> = t.rows.iter().map(|r| r.step(0).unwrap()).collect();
    assert!(first.windows(2).all(|w| w[0] == w[1]));
    assert!(t
        .to_tsv()
        .starts_with("in1\tin2\tsteps1\tsteps2\tbound1\tbound2\tverdict\n"));
}

#[test]
fn extensional_agreement() {
    let nat = SrcType::nat;
    let (p, env) = setup(&[("add", vec![])]);
    let ty = TyDesc::from_src(&SrcType::arrows([nat(), nat()], nat())).unwrap();
    let h = Harness::new(&env.registry, 10);
    let s = Sampler::new(9, 50);
    let add = Reference::def(&p, "add");
    let native = Reference::native("plus", 2, |a| {
        Value::nat(a[0].as_nat().unwrap() + a[1].as_nat().unwrap())
    });
    assert_eq!(
        h.check_extensional("add", &add, &native, &ty, &s).verdict,
        Verdict::Pass
    );
    assert_eq!(h.check_extensional("add", &add, &add, &ty, &s).verdict, Verdict::Pass);
    let sub = Reference::native("sub", 2, |a| {
        Value::nat(a[0].as_nat().unwrap().saturating_sub(a[1].as_nat().unwrap()))
    });
    let swapped = Reference::native("sub_swapped", 2, |a| {
        Value::nat(a[1].as_nat().unwrap().saturating_sub(a[0].as_nat().unwrap()))
    });
    let r = h.check_extensional("sub", &sub, &swapped, &ty, &s);
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.counterexample.is_some());
}

#[test]
fn samplers_are_deterministic() {
    let reg = Registry::with_prelude();
    let ty = TyDesc::from_src(&SrcType::arrows(
        [SrcType::nat(), SrcType::list(SrcType::nat())],
        SrcType::nat(),
    ))
    .unwrap();
    let mut reg2 = reg.clone();
    reg2.register_with_deps(&SrcType::list(SrcType::nat())).unwrap();
    let a: Vec<Vec<String>> = Sampler::new(7, 40)
        .tuples(&reg2, &ty)
        .unwrap()
        .iter()
        .map(|t| t.iter().map(Candidate::label).collect())
        .collect();
    let b: Vec<Vec<String>> = Sampler::new(7, 40)
        .tuples(&reg2, &ty)
        .unwrap()
        .iter()
        .map(|t| t.iter().map(Candidate::label).collect())
        .collect();
    assert_eq!(a, b);
    assert_eq!(a.len(), 40);
}
