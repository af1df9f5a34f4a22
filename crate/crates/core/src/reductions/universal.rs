use crate::eval::{machine_eval, EvalError};
use crate::extract::{extract_program, ExtractionEnv};
use crate::scott::{Registry, Value};
use crate::source::CheckedProgram;
use crate::term::Term;
use crate::types::SrcType;

use super::ReductionError;

pub fn term_type() -> SrcType {
    SrcType::base("term")
}

/// L terms as values of the `term` datatype (`var`, `app`, `lam`).
pub fn term_value(t: &Term) -> Value {
    match t {
        Term::Var(n) => Value::new(0, vec![Value::nat(*n as u64)]),
        Term::App(s, u) => Value::new(1, vec![term_value(s), term_value(u)]),
        Term::Lam(s) => Value::new(2, vec![term_value(s)]),
    }
}

pub fn value_term(v: &Value) -> Option<Term> {
    Some(match (v.ctor, v.args.as_slice()) {
        (0, [n]) => Term::var(n.as_nat()? as usize),
        (1, [s, u]) => Term::app(value_term(s)?, value_term(u)?),
        (2, [s]) => Term::lam(value_term(s)?),
        _ => return None,
    })
}

/// `U`: the extracted step-indexed interpreter, after everything it uses.
pub fn build_universal(env: &mut ExtractionEnv, program: &CheckedProgram) -> Result<Term, ReductionError> {
    extract_program(env, program, &[("eva".into(), vec![])])?;
    Ok(env.get("eva", &[]).expect("just extracted").clone())
}

/// Runs `U (enc n) (enc s)`; `None` when the budget runs out, otherwise
/// the decoded `option term`.
pub fn run_universal(
    registry: &Registry,
    u: &Term,
    n: u64,
    s: &Term,
    budget: u64,
) -> Result<(Option<Option<Term>>, u64), EvalError> {
    let args = [
        registry
            .encode(&SrcType::nat(), &Value::nat(n))
            .expect("nat is registered"),
        registry
            .encode(&term_type(), &term_value(s))
            .expect("term is registered"),
    ];
    let out = machine_eval(&Term::apps(u.clone(), args), budget)?;
    let decoded = out.value().map(|nf| {
        let v = registry
            .decode(&SrcType::option(term_type()), nf)
            .expect("U returns an option term");
        v.as_option()
            .expect("option value")
            .map(|t| value_term(t).expect("term value"))
    });
    Ok((decoded, out.steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::with_stack;
    use crate::syntax::parse_term;
    use crate::term::eva;

    fn universal() -> (ExtractionEnv, Term) {
        let p = crate::stdlib::program();
        let mut env = ExtractionEnv::new(p);
        let u = build_universal(&mut env, p).unwrap();
        (env, u)
    }

    #[test]
    fn universal_term_is_a_procedure() {
        let (env, u) = universal();
        assert!(u.is_proc());
        assert!(env.get("subst", &[]).is_some());
        assert!(env.get("term.lam", &[]).is_some());
    }

    #[test]
    fn universal_term_runs_identity_application() {
        let (env, u) = universal();
        let id = parse_term("\\0").unwrap();
        let cases = [("(\\0)(\\0)", 2), ("5", 0), ("\\0", 0)];
        with_stack(|| {
            for (src, n) in cases {
                let s = parse_term(src).unwrap();
                let (got, _) = run_universal(&env.registry, &u, n, &s, 10_000_000).unwrap();
                assert_eq!(got, Some(eva(n as usize, &s)), "{src}");
            }
        });
        assert_eq!(eva(2, &parse_term("(\\0)(\\0)").unwrap()), Some(id));
    }

    #[test]
    fn term_values_round_trip() {
        let t = parse_term("\\(\\1 0) 3").unwrap();
        assert_eq!(value_term(&term_value(&t)), Some(t));
    }
}
