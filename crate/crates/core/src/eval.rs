//! Step-counting evaluators.
//!
//! [`eval_cbv`] is the reference: it contracts redexes by substitution in
//! left-to-right call-by-value order. [`machine_eval`] is a closure machine
//! for closed terms that performs the same beta steps without building
//! intermediate terms; administrative transitions are not counted.

use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{subst_arc, Term};

/// Result of a budgeted evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOutcome {
    /// The normal form, or `None` when the budget ran out first.
    pub normal_form: Option<Term>,
    /// Beta steps performed.
    pub steps: u64,
}

impl EvalOutcome {
    pub fn is_exhausted(&self) -> bool {
        self.normal_form.is_none()
    }

    pub fn value(&self) -> Option<&Term> {
        self.normal_form.as_ref()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("machine evaluation requires a closed term")]
    OpenTerm,
}

enum Frame {
    Arg(Arc<Term>),
    Fun(Arc<Term>),
}

/// Reduces `s` left to right until it is normal or `budget` beta steps
/// have been spent.
///
/// Works on open terms too: a stuck application is left in place and its
/// argument is still reduced.
pub fn eval_cbv(s: &Term, budget: u64) -> EvalOutcome {
    let mut focus = Arc::new(s.clone());
    let mut stack: Vec<Frame> = Vec::new();
    let mut steps = 0u64;
    let mut returning = false;
    loop {
        if !returning {
            if let Term::App(f, a) = &*focus {
                stack.push(Frame::Arg(a.clone()));
                focus = f.clone();
            } else {
                returning = true;
            }
            continue;
        }
        match stack.pop() {
            None => {
                return EvalOutcome {
                    normal_form: Some(Arc::unwrap_or_clone(focus)),
                    steps,
                }
            }
            Some(Frame::Arg(a)) => {
                stack.push(Frame::Fun(focus));
                focus = a;
                returning = false;
            }
            Some(Frame::Fun(f)) => match (&*f, &*focus) {
                (Term::Lam(body), Term::Lam(_)) => {
                    if steps == budget {
                        return EvalOutcome {
                            normal_form: None,
                            steps,
                        };
                    }
                    steps += 1;
                    focus = subst_arc(body, 0, &focus);
                    returning = false;
                }
                _ => focus = Arc::new(Term::App(f, focus)),
            },
        }
    }
}

type Env<'a> = Option<Rc<EnvNode<'a>>>;

struct EnvNode<'a> {
    val: Rc<Closure<'a>>,
    next: Env<'a>,
}

/// An abstraction body paired with the values of its free variables.
struct Closure<'a> {
    body: &'a Term,
    env: Env<'a>,
}

// Values built by long computations (unary numerals, long lists) are deep
// chains of closures; drop them iteratively.
impl Drop for Closure<'_> {
    fn drop(&mut self) {
        let Some(env) = self.env.take() else { return };
        let mut nodes = vec![env];
        while let Some(node) = nodes.pop() {
            if let Ok(EnvNode { val, next }) = Rc::try_unwrap(node) {
                if let Some(n) = next {
                    nodes.push(n);
                }
                if let Ok(mut clo) = Rc::try_unwrap(val) {
                    if let Some(e) = clo.env.take() {
                        nodes.push(e);
                    }
                }
            }
        }
    }
}

fn lookup<'a>(env: &Env<'a>, mut n: usize) -> Rc<Closure<'a>> {
    let mut cur = env.as_ref();
    while let Some(node) = cur {
        if n == 0 {
            return node.val.clone();
        }
        n -= 1;
        cur = node.next.as_ref();
    }
    unreachable!("closed term has no unbound variable")
}

enum MFrame<'a> {
    Arg(&'a Term, Env<'a>),
    Fun(Rc<Closure<'a>>),
}

/// Closure-machine evaluation of a closed term. Agrees with [`eval_cbv`] on
/// normal form and step count.
pub fn machine_eval(s: &Term, budget: u64) -> Result<EvalOutcome, EvalError> {
    if !s.is_closed() {
        return Err(EvalError::OpenTerm);
    }
    let mut stack: Vec<MFrame> = Vec::new();
    let mut steps = 0u64;
    let mut term: &Term = s;
    let mut env: Env = None;
    loop {
        // descend to the head of the application spine
        let val = loop {
            match term {
                Term::App(f, a) => {
                    stack.push(MFrame::Arg(a, env.clone()));
                    term = f;
                }
                Term::Lam(body) => break Rc::new(Closure { body, env: env.take() }),
                Term::Var(n) => break lookup(&env, *n),
            }
        };
        // return the value through the continuation
        match stack.pop() {
            None => {
                return Ok(EvalOutcome {
                    normal_form: Some(readback(&val, &mut HashMap::new())),
                    steps,
                })
            }
            Some(MFrame::Arg(a, e)) => {
                stack.push(MFrame::Fun(val));
                term = a;
                env = e;
            }
            Some(MFrame::Fun(f)) => {
                if steps == budget {
                    return Ok(EvalOutcome {
                        normal_form: None,
                        steps,
                    });
                }
                steps += 1;
                term = f.body;
                env = Some(Rc::new(EnvNode {
                    val,
                    next: f.env.clone(),
                }));
            }
        }
    }
}

fn readback(c: &Rc<Closure>, memo: &mut HashMap<*const (), Arc<Term>>) -> Term {
    Term::Lam(readback_body(c, memo))
}

fn readback_body(c: &Rc<Closure>, memo: &mut HashMap<*const (), Arc<Term>>) -> Arc<Term> {
    let key = Rc::as_ptr(c) as *const ();
    if let Some(t) = memo.get(&key) {
        return t.clone();
    }
    let t = Arc::new(rb(c.body, 1, &c.env, memo));
    memo.insert(key, t.clone());
    t
}

fn rb(t: &Term, depth: usize, env: &Env, memo: &mut HashMap<*const (), Arc<Term>>) -> Term {
    match t {
        Term::Var(n) if *n < depth => Term::Var(*n),
        Term::Var(n) => {
            let c = lookup(env, n - depth);
            Term::Lam(readback_body(&c, memo))
        }
        Term::App(f, a) => Term::App(Arc::new(rb(f, depth, env, memo)), Arc::new(rb(a, depth, env, memo))),
        Term::Lam(b) => Term::Lam(Arc::new(rb(b, depth + 1, env, memo))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn identity_application() {
        let out = eval_cbv(&t("(\\0)(\\0)"), 10);
        assert_eq!(out.normal_form, Some(t("\\0")));
        assert_eq!(out.steps, 1);
        assert_eq!(machine_eval(&t("(\\0)(\\0)"), 10).unwrap(), out);
    }

    #[test]
    fn omega_exhausts() {
        let omega = t("(\\0 0)(\\0 0)");
        let out = eval_cbv(&omega, 100);
        assert!(out.is_exhausted());
        assert_eq!(out.steps, 100);
        assert_eq!(machine_eval(&omega, 100).unwrap(), out);
    }

    #[test]
    fn exact_budget_suffices() {
        let s = t("(\\0)((\\0)(\\0))");
        assert_eq!(eval_cbv(&s, 2).steps, 2);
        assert!(!eval_cbv(&s, 2).is_exhausted());
        assert!(eval_cbv(&s, 1).is_exhausted());
        assert!(machine_eval(&s, 1).unwrap().is_exhausted());
    }

    #[test]
    fn machine_rejects_open_terms() {
        assert_eq!(machine_eval(&t("0"), 5), Err(EvalError::OpenTerm));
    }

    #[test]
    fn open_terms_reduce_around_stuck_heads() {
        let out = eval_cbv(&t("0 ((\\0)(\\0))"), 5);
        assert_eq!(out.normal_form, Some(t("0 (\\0)")));
        assert_eq!(out.steps, 1);
    }

    #[test]
    fn machine_readback_substitutes_environment() {
        // (\x. \y. x) (\0)  ->  \y. (\0)
        let s = t("(\\\\1)(\\0)");
        let out = machine_eval(&s, 10).unwrap();
        assert_eq!(out.normal_form, Some(t("\\\\0")));
        assert_eq!(out, eval_cbv(&s, 10));
    }
}
