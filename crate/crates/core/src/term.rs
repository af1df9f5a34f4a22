//! Terms of the weak call-by-value lambda calculus L, with de Bruijn indices.
//!
//! Substitution is the plain capturing one: it neither shifts the substituted
//! term nor decrements indices above the substituted one. Reduction only ever
//! happens on closed terms, where this is exactly right.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App(Arc<Term>, Arc<Term>),
    Lam(Arc<Term>),
}

impl Term {
    pub fn var(n: usize) -> Term {
        Term::Var(n)
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn lam(body: Term) -> Term {
        Term::Lam(Arc::new(body))
    }

    /// Left-nested application `head a1 a2 ... an`.
    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// `n` binders around `body`.
    pub fn lams(n: usize, body: Term) -> Term {
        (0..n).fold(body, |b, _| Term::lam(b))
    }

    pub fn is_lam(&self) -> bool {
        matches!(self, Term::Lam(_))
    }

    /// Size with variables weighted by their index: `var n` counts `1 + n`.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(n) => 1 + n,
            Term::App(s, t) => 1 + s.size() + t.size(),
            Term::Lam(s) => 1 + s.size(),
        }
    }

    /// Number of syntax nodes.
    pub fn node_count(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(s, t) => 1 + s.node_count() + t.node_count(),
            Term::Lam(s) => 1 + s.node_count(),
        }
    }

    /// True iff every free variable index is below `k`.
    pub fn bound_by(&self, k: usize) -> bool {
        match self {
            Term::Var(n) => *n < k,
            Term::App(s, t) => s.bound_by(k) && t.bound_by(k),
            Term::Lam(s) => s.bound_by(k + 1),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.bound_by(0)
    }

    /// Procedures are closed abstractions.
    pub fn is_proc(&self) -> bool {
        self.is_lam() && self.is_closed()
    }

    /// `self[k := u]`.
    pub fn subst(&self, k: usize, u: &Term) -> Term {
        let u = Arc::new(u.clone());
        match self {
            Term::Var(n) if *n == k => (*u).clone(),
            Term::Var(_) => self.clone(),
            Term::App(s, t) => Term::App(subst_arc(s, k, &u), subst_arc(t, k, &u)),
            Term::Lam(s) => Term::Lam(subst_arc(s, k + 1, &u)),
        }
    }

    /// Adds `by` to every variable index at or above `cutoff`.
    pub fn shift(&self, by: usize, cutoff: usize) -> Term {
        match self {
            Term::Var(n) if *n >= cutoff => Term::Var(n + by),
            Term::Var(_) => self.clone(),
            Term::App(s, t) => Term::app(s.shift(by, cutoff), t.shift(by, cutoff)),
            Term::Lam(s) => Term::lam(s.shift(by, cutoff + 1)),
        }
    }

    /// All one-step reducts: beta when both sides of an application are
    /// abstractions, plus congruence on either side. Nothing under binders.
    pub fn step_succs(&self) -> Vec<Term> {
        let Term::App(s, t) = self else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if let (Term::Lam(body), Term::Lam(_)) = (&**s, &**t) {
            out.push((*subst_arc(body, 0, t)).clone());
        }
        for s2 in s.step_succs() {
            out.push(Term::App(Arc::new(s2), t.clone()));
        }
        for t2 in t.step_succs() {
            out.push(Term::App(s.clone(), Arc::new(t2)));
        }
        out
    }

    pub fn is_normal(&self) -> bool {
        match self {
            Term::Var(_) | Term::Lam(_) => true,
            Term::App(s, t) => !(s.is_lam() && t.is_lam()) && s.is_normal() && t.is_normal(),
        }
    }
}

/// Substitution on shared terms; subtrees without an occurrence of `k` are
/// returned as the same allocation.
pub(crate) fn subst_arc(t: &Arc<Term>, k: usize, u: &Arc<Term>) -> Arc<Term> {
    match &**t {
        Term::Var(n) if *n == k => u.clone(),
        Term::Var(_) => t.clone(),
        Term::App(s1, s2) => {
            let a = subst_arc(s1, k, u);
            let b = subst_arc(s2, k, u);
            if Arc::ptr_eq(&a, s1) && Arc::ptr_eq(&b, s2) {
                t.clone()
            } else {
                Arc::new(Term::App(a, b))
            }
        }
        Term::Lam(b) => {
            let b2 = subst_arc(b, k + 1, u);
            if Arc::ptr_eq(&b2, b) {
                t.clone()
            } else {
                Arc::new(Term::Lam(b2))
            }
        }
    }
}

/// Every normal form reachable within `depth` steps, with the path length.
///
/// Explores all reduction paths breadth-first, deduplicating terms per level.
pub fn enumerate_reductions(s: &Term, depth: usize) -> Vec<(Term, usize)> {
    enumerate_reductions_capped(s, depth, usize::MAX).unwrap_or_default()
}

/// As [`enumerate_reductions`], giving up (`None`) once a level holds more
/// than `max_frontier` distinct terms.
pub fn enumerate_reductions_capped(s: &Term, depth: usize, max_frontier: usize) -> Option<Vec<(Term, usize)>> {
    let mut found: Vec<(Term, usize)> = Vec::new();
    let mut frontier: HashSet<Term> = HashSet::from([s.clone()]);
    for level in 0..=depth {
        let mut next = HashSet::new();
        for t in &frontier {
            let succs = t.step_succs();
            if succs.is_empty() {
                if !found.iter().any(|(u, l)| u == t && *l == level) {
                    found.push((t.clone(), level));
                }
            } else if level < depth {
                next.extend(succs);
            }
        }
        if next.is_empty() {
            break;
        }
        if next.len() > max_frontier {
            return None;
        }
        frontier = next;
    }
    Some(found)
}

/// Step-indexed interpreter: the index bounds recursion depth, not steps.
pub fn eva(n: usize, u: &Term) -> Option<Term> {
    match u {
        Term::Var(_) => None,
        Term::Lam(_) => Some(u.clone()),
        Term::App(s, t) => {
            let m = n.checked_sub(1)?;
            match (eva(m, s), eva(m, t)) {
                (Some(Term::Lam(body)), Some(arg)) => eva(m, &body.subst(0, &arg)),
                _ => None,
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self, crate::syntax::Style::Ascii))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self, crate::syntax::Style::DeBruijn))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize) -> Term {
        Term::var(n)
    }
    fn l(b: Term) -> Term {
        Term::lam(b)
    }
    fn a(f: Term, x: Term) -> Term {
        Term::app(f, x)
    }
    fn id() -> Term {
        l(v(0))
    }
    fn omega() -> Term {
        a(l(a(v(0), v(0))), l(a(v(0), v(0))))
    }

    #[test]
    fn substitution_equations() {
        assert_eq!(v(0).subst(0, &id()), id());
        assert_eq!(v(1).subst(0, &id()), v(1));
        assert_eq!(l(v(1)).subst(0, &id()), l(l(v(0))));
        assert_eq!(
            a(v(0), v(2)).subst(0, &id()),
            a(id(), v(2)),
            "application recurses on both sides"
        );
    }

    #[test]
    fn substitution_does_not_decrement() {
        assert_eq!(l(v(3)).subst(0, &id()), l(v(3)));
    }

    #[test]
    fn closedness() {
        assert!(id().is_closed());
        assert!(!v(3).is_closed());
        assert!(v(2).bound_by(3));
        assert!(!v(3).bound_by(3));
        assert!(l(l(v(1))).is_closed());
    }

    #[test]
    fn procedures() {
        assert!(id().is_proc());
        assert!(!a(id(), id()).is_proc());
        assert!(!l(v(1)).is_proc());
    }

    #[test]
    fn successors() {
        assert_eq!(a(id(), id()).step_succs(), vec![id()]);
        assert!(l(a(id(), id())).step_succs().is_empty());
        let t = a(a(id(), id()), a(id(), id()));
        assert_eq!(t.step_succs(), vec![a(id(), a(id(), id())), a(a(id(), id()), id())]);
        // stuck application of a variable still reduces its argument
        assert_eq!(a(v(0), a(id(), id())).step_succs(), vec![a(v(0), id())]);
    }

    #[test]
    fn size_counts_var_index() {
        assert_eq!(v(0).size(), 1);
        assert_eq!(v(3).size(), 4);
        assert_eq!(l(l(v(1))).size(), 4);
        assert_eq!(l(l(v(1))).node_count(), 3);
    }

    #[test]
    fn reductions_enumeration() {
        assert_eq!(enumerate_reductions(&a(id(), id()), 5), vec![(id(), 1)]);
        assert!(enumerate_reductions(&omega(), 5).is_empty());
        let t = a(a(id(), id()), a(id(), id()));
        assert_eq!(enumerate_reductions(&t, 10), vec![(id(), 3)]);
    }

    #[test]
    fn eva_cases() {
        assert_eq!(eva(0, &id()), Some(id()));
        assert_eq!(eva(0, &a(id(), id())), None);
        assert_eq!(eva(1, &a(id(), id())), Some(id()));
        assert_eq!(eva(2, &a(id(), id())), Some(id()));
        assert_eq!(eva(3, &v(5)), None);
        assert_eq!(eva(50, &omega()), None);
    }

    #[test]
    fn shift_respects_cutoff() {
        assert_eq!(l(a(v(0), v(1))).shift(2, 0), l(a(v(0), v(3))));
    }
}
