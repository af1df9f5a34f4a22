//! The call-by-value fixpoint `ρ` and the unbounded search `μ`.

use thiserror::Error;

use crate::scott::gen_constructor;
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatorError {
    #[error("combinator argument must be closed")]
    OpenArgument,
    #[error("combinator argument must be a procedure")]
    NotAProcedure,
}

/// `ρ u = λx. u (r r) x` with `r = λa. λx. u (a a) x`.
///
/// For procedures `u`, `v`: `(ρ u) v ≻ u (r r) v ≻ u (ρ u) v`.
pub fn rho(u: &Term) -> Result<Term, CombinatorError> {
    if !u.is_closed() {
        return Err(CombinatorError::OpenArgument);
    }
    Ok(rho_open(u))
}

/// [`rho`] for a `u` with free variables: they are shifted past the binders
/// `ρ` introduces, so the result may sit in the same context as `u`.
pub(crate) fn rho_open(u: &Term) -> Term {
    let x = || Term::var(0);
    // r sits under ρ's binder; u sits under r's two binders in addition
    let r = Term::lams(
        2,
        Term::apps(u.shift(3, 0), [Term::app(Term::var(1), Term::var(1)), x()]),
    );
    Term::lam(Term::apps(u.shift(1, 0), [Term::app(r.clone(), r), x()]))
}

/// `μ p`: evaluates to the encoding of the least `k` with `p (enc k)`
/// reducing to `enc true`, and diverges when there is none.
///
/// The loop is `ρ (λself. λn. p n (λ_. n) (λ_. self (S n)) I) (enc 0)`;
/// both branches are thunked so that only the selected one runs.
pub fn mu(p: &Term) -> Result<Term, CombinatorError> {
    if !p.is_closed() {
        return Err(CombinatorError::OpenArgument);
    }
    if !p.is_lam() {
        return Err(CombinatorError::NotAProcedure);
    }
    let succ = gen_constructor(1, 2, 1).expect("S is constructor 1 of 2");
    let zero = gen_constructor(0, 2, 0).expect("O is constructor 0 of 2");
    // under λself λn: self = 1, n = 0; one more inside each thunk
    let found = Term::lam(Term::var(1));
    let next = Term::lam(Term::app(Term::var(2), Term::app(succ, Term::var(1))));
    let body = Term::apps(
        Term::app(p.clone(), Term::var(0)),
        [found, next, Term::lam(Term::var(0))],
    );
    Ok(Term::app(rho_open(&Term::lams(2, body)), zero))
}
