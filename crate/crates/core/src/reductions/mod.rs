//! Case studies: a universal term, Hilbert's tenth problem and Turing
//! machine halting, each reduced to halting of L terms.

pub mod h10;
pub mod tm;
pub mod universal;

use thiserror::Error;

use crate::combinators::{mu, CombinatorError};
use crate::extract::ExtractError;
use crate::scott::{gen_constructor, Value};
use crate::source::SourceError;
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Combinator(#[from] CombinatorError),
    #[error("{0}")]
    Format(String),
}

pub(crate) fn enc_false() -> Term {
    Term::lams(2, Term::var(0))
}

pub(crate) fn enc_true() -> Term {
    Term::lams(2, Term::var(1))
}

/// The many-one reduction from an enumerable predicate to halting.
///
/// `enumerator` computes `nat → option X`, `decide` computes
/// `X × X → bool`, and `x` is the encoding of the instance. The result is
/// `μ (λn. enumerator n false (λy. decide (x, y)))`, which has a normal
/// form exactly when some `n` enumerates `x`; that normal form is the
/// encoding of the least such `n`.
pub fn reduction_of_enumerable(enumerator: &Term, decide: &Term, x: &Term) -> Result<Term, ReductionError> {
    for t in [enumerator, decide, x] {
        if !t.is_closed() {
            return Err(CombinatorError::OpenArgument.into());
        }
    }
    let pair = gen_constructor(2, 1, 0).expect("pair is constructor 0 of 1");
    // under λn λy: y = 0
    let found = Term::lam(Term::app(decide.clone(), Term::apps(pair, [x.clone(), Term::var(0)])));
    let test = Term::lam(Term::apps(
        Term::app(enumerator.clone(), Term::var(0)),
        [enc_false(), found],
    ));
    Ok(mu(&test)?)
}

/// Reads the witness of a μ-search back.
pub fn decode_witness(t: &Term) -> Option<u64> {
    crate::scott::Registry::with_prelude()
        .decode(&crate::types::SrcType::nat(), t)
        .and_then(|v: Value| v.as_nat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::machine_eval;
    use crate::scott::Registry;
    use crate::types::SrcType;

    #[test]
    fn enumerable_reduction_finds_least_index() {
        // enumerates some(n mod 3) as a bool-free toy: X = nat, decide = eqb
        let p = crate::stdlib::program();
        let mut env = crate::extract::ExtractionEnv::new(p);
        crate::extract::extract_program(&mut env, p, &[("eqb".into(), vec![]), ("nat.S".into(), vec![])]).unwrap();
        let eqb = env.get("eqb", &[]).unwrap().clone();
        // decide (a, b) = eqb a b
        let decide = Term::lam(Term::app(Term::var(0), eqb));
        // enumerator n = some n
        let some = gen_constructor(1, 2, 1).unwrap();
        let enumerator = Term::lam(Term::app(some, Term::var(0)));
        let reg = Registry::with_prelude();
        let x = reg.encode(&SrcType::nat(), &Value::nat(4)).unwrap();
        let s = reduction_of_enumerable(&enumerator, &decide, &x).unwrap();
        let out = crate::par::with_stack(|| machine_eval(&s, 1_000_000).unwrap());
        assert_eq!(out.value().and_then(decode_witness), Some(4));
    }
}
