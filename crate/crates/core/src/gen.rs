//! Counting, ranking and uniform sampling of terms by size (`var n` counts
//! `1 + n`) and bound on free variables.

use std::collections::HashMap;

use rand::Rng;

use crate::term::Term;

/// Memoized counts of terms of exact size `s` whose free variables are
/// all below `k`. Counts saturate at `u128::MAX`.
#[derive(Default)]
pub struct TermCounts {
    memo: HashMap<(usize, usize), u128>,
}

impl TermCounts {
    pub fn new() -> TermCounts {
        TermCounts::default()
    }

    pub fn count(&mut self, s: usize, k: usize) -> u128 {
        if s == 0 {
            return 0;
        }
        if let Some(&c) = self.memo.get(&(s, k)) {
            return c;
        }
        let var = u128::from(s - 1 < k);
        let lam = self.count(s - 1, k + 1);
        let mut app: u128 = 0;
        for i in 1..s.saturating_sub(1) {
            let a = self.count(i, k);
            if a == 0 {
                continue;
            }
            app = app.saturating_add(a.saturating_mul(self.count(s - 1 - i, k)));
        }
        let c = var.saturating_add(lam).saturating_add(app);
        self.memo.insert((s, k), c);
        c
    }

    /// The `i`-th term of size `s` under `k` binders: the variable first,
    /// then abstractions, then applications by left size.
    pub fn nth(&mut self, s: usize, k: usize, mut i: u128) -> Option<Term> {
        if i >= self.count(s, k) {
            return None;
        }
        if s - 1 < k {
            if i == 0 {
                return Some(Term::var(s - 1));
            }
            i -= 1;
        }
        let lam = self.count(s - 1, k + 1);
        if i < lam {
            return Some(Term::lam(self.nth(s - 1, k + 1, i)?));
        }
        i -= lam;
        for l in 1..s - 1 {
            let (a, b) = (self.count(l, k), self.count(s - 1 - l, k));
            let here = a.saturating_mul(b);
            if i < here {
                return Some(Term::app(self.nth(l, k, i / b)?, self.nth(s - 1 - l, k, i % b)?));
            }
            i -= here;
        }
        None
    }

    /// Every term of size `s` under `k` binders, in rank order.
    pub fn all(&mut self, s: usize, k: usize) -> Vec<Term> {
        let n = self.count(s, k);
        (0..n).filter_map(|i| self.nth(s, k, i)).collect()
    }

    /// A uniformly drawn term of size `s`, if there is one.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R, s: usize, k: usize) -> Option<Term> {
        let n = self.count(s, k);
        if n == 0 {
            return None;
        }
        self.nth(s, k, rng.gen_range(0..n))
    }
}

/// All closed terms of size at most `max`, smallest first.
pub fn closed_terms_up_to(max: usize) -> Vec<Term> {
    let mut c = TermCounts::new();
    (1..=max).flat_map(|s| c.all(s, 0)).collect()
}

/// A closed term: size uniform over the inhabited sizes in `1..=max`, then
/// uniform among terms of that size.
pub fn random_closed<R: Rng + ?Sized>(counts: &mut TermCounts, rng: &mut R, max: usize) -> Term {
    random_under(counts, rng, max, 0)
}

/// As [`random_closed`], for terms whose free variables are below `k`.
pub fn random_under<R: Rng + ?Sized>(counts: &mut TermCounts, rng: &mut R, max: usize, k: usize) -> Term {
    let sizes: Vec<usize> = (1..=max).filter(|&s| counts.count(s, k) > 0).collect();
    assert!(!sizes.is_empty(), "no term of size <= {max} under {k} binders");
    let s = sizes[rng.gen_range(0..sizes.len())];
    counts.sample(rng, s, k).expect("inhabited size")
}

/// A closed abstraction of size at most `max` (at least 2).
pub fn random_proc<R: Rng + ?Sized>(counts: &mut TermCounts, rng: &mut R, max: usize) -> Term {
    Term::lam(random_under(counts, rng, max.max(2) - 1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn brute(s: usize, k: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if s == 0 {
            return out;
        }
        if s - 1 < k {
            out.push(Term::var(s - 1));
        }
        out.extend(brute(s - 1, k + 1).into_iter().map(Term::lam));
        for l in 1..s.saturating_sub(1) {
            for a in brute(l, k) {
                for b in brute(s - 1 - l, k) {
                    out.push(Term::app(a.clone(), b));
                }
            }
        }
        out
    }

    #[test]
    fn ranking_matches_brute_force() {
        let mut c = TermCounts::new();
        for s in 1..=9 {
            for k in 0..3 {
                let all = c.all(s, k);
                assert_eq!(all, brute(s, k), "size {s} under {k}");
                assert!(all.iter().all(|t| t.size() == s && t.bound_by(k)));
                assert_eq!(all.iter().collect::<HashSet<_>>().len(), all.len());
            }
        }
    }

    #[test]
    fn small_closed_terms() {
        // λ0, λλ0, λλ1, λλλ0, λ(0 0)
        let ts = closed_terms_up_to(4);
        assert_eq!(ts.len(), 5);
        assert!(ts.iter().all(Term::is_closed));
    }

    #[test]
    fn samples_are_closed_and_small() {
        let mut c = TermCounts::new();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let t = random_closed(&mut c, &mut rng, 12);
            assert!(t.is_closed() && t.size() <= 12);
            let p = random_proc(&mut c, &mut rng, 12);
            assert!(p.is_proc() && p.size() <= 12);
        }
    }
}
