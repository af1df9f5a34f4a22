//! Diophantine equations: native mirrors of the enumerators in the bundled
//! program, random access into levels too large to build, and the
//! reduction to halting.

use std::fmt;

use crate::extract::{extract_program, ExtractionEnv};
use crate::scott::Value;
use crate::source::sexp::{read_all, Sexp};
use crate::source::CheckedProgram;
use crate::term::Term;
use crate::types::SrcType;

use super::{reduction_of_enumerable, ReductionError};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Poly {
    Cst(u64),
    Var(u64),
    Add(Box<Poly>, Box<Poly>),
    Mul(Box<Poly>, Box<Poly>),
}

// `add` and `mul` build syntax; they are not arithmetic
#[allow(clippy::should_implement_trait)]
impl Poly {
    pub fn add(a: Poly, b: Poly) -> Poly {
        Poly::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Poly, b: Poly) -> Poly {
        Poly::Mul(Box::new(a), Box::new(b))
    }

    pub fn size(&self) -> usize {
        match self {
            Poly::Cst(_) | Poly::Var(_) => 1,
            Poly::Add(a, b) | Poly::Mul(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Poly::Cst(n) => Value::new(0, vec![Value::nat(*n)]),
            Poly::Var(n) => Value::new(1, vec![Value::nat(*n)]),
            Poly::Add(a, b) => Value::new(2, vec![a.to_value(), b.to_value()]),
            Poly::Mul(a, b) => Value::new(3, vec![a.to_value(), b.to_value()]),
        }
    }

    pub fn from_value(v: &Value) -> Option<Poly> {
        Some(match (v.ctor, v.args.as_slice()) {
            (0, [n]) => Poly::Cst(n.as_nat()?),
            (1, [n]) => Poly::Var(n.as_nat()?),
            (2, [a, b]) => Poly::add(Poly::from_value(a)?, Poly::from_value(b)?),
            (3, [a, b]) => Poly::mul(Poly::from_value(a)?, Poly::from_value(b)?),
            _ => return None,
        })
    }

    /// Smallest `n` with `self` in `enumerate_polys(n)`.
    pub fn level(&self) -> usize {
        match self {
            Poly::Cst(c) | Poly::Var(c) => *c as usize + 2,
            Poly::Add(a, b) | Poly::Mul(a, b) => a.level().max(b.level()) + 1,
        }
    }

    fn from_sexp(s: &Sexp) -> Result<Poly, String> {
        let bad = || format!("{}: expected (c N), (v N), (+ P P) or (* P P)", s.pos());
        let items = s.list().ok_or_else(bad)?;
        let num = |x: &Sexp| x.atom().and_then(|a| a.parse::<u64>().ok()).ok_or_else(bad);
        match (s.head(), items) {
            (Some("c"), [_, n]) => Ok(Poly::Cst(num(n)?)),
            (Some("v"), [_, n]) => Ok(Poly::Var(num(n)?)),
            (Some("+"), [_, a, b]) => Ok(Poly::add(Poly::from_sexp(a)?, Poly::from_sexp(b)?)),
            (Some("*"), [_, a, b]) => Ok(Poly::mul(Poly::from_sexp(a)?, Poly::from_sexp(b)?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Poly::Cst(n) => write!(f, "(c {n})"),
            Poly::Var(n) => write!(f, "(v {n})"),
            Poly::Add(a, b) => write!(f, "(+ {a} {b})"),
            Poly::Mul(a, b) => write!(f, "(* {a} {b})"),
        }
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct H10Instance {
    pub lhs: Poly,
    pub rhs: Poly,
}

impl H10Instance {
    pub fn new(lhs: Poly, rhs: Poly) -> H10Instance {
        H10Instance { lhs, rhs }
    }

    /// Parses `(h10 POLY POLY)`.
    pub fn parse(text: &str) -> Result<H10Instance, ReductionError> {
        let forms = read_all(text).map_err(|e| ReductionError::Format(format!("{}: {}", e.pos, e.message)))?;
        let [form] = forms.as_slice() else {
            return Err(ReductionError::Format("expected one (h10 POLY POLY) form".into()));
        };
        match (form.head(), form.list()) {
            (Some("h10"), Some([_, a, b])) => Ok(H10Instance::new(
                Poly::from_sexp(a).map_err(ReductionError::Format)?,
                Poly::from_sexp(b).map_err(ReductionError::Format)?,
            )),
            _ => Err(ReductionError::Format(format!(
                "{}: expected (h10 POLY POLY)",
                form.pos()
            ))),
        }
    }

    pub fn to_value(&self) -> Value {
        Value::pair(self.lhs.to_value(), self.rhs.to_value())
    }

    pub fn holds_at(&self, s: &[u64]) -> bool {
        h10_eval(&self.lhs, s) == h10_eval(&self.rhs, s)
    }
}

impl fmt::Display for H10Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(h10 {} {})", self.lhs, self.rhs)
    }
}

pub fn poly_type() -> SrcType {
    SrcType::base("poly")
}

pub fn instance_type() -> SrcType {
    SrcType::prod(poly_type(), poly_type())
}

/// Unassigned variables read as 0.
pub fn h10_eval(p: &Poly, s: &[u64]) -> u64 {
    match p {
        Poly::Cst(n) => *n,
        Poly::Var(n) => s.get(*n as usize).copied().unwrap_or(0),
        Poly::Add(a, b) => h10_eval(a, s) + h10_eval(b, s),
        Poly::Mul(a, b) => h10_eval(a, s) * h10_eval(b, s),
    }
}

pub fn l_nat(n: u64) -> Vec<u64> {
    (0..n).collect()
}

fn product<A: Clone, B: Clone>(xs: &[A], ys: &[B]) -> Vec<(A, B)> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// The cumulative polynomial enumerator; each level extends the previous.
pub fn enumerate_polys(n: u64) -> Vec<Poly> {
    let mut ps = Vec::new();
    for m in 0..n {
        let pp = product(&ps, &ps);
        let mut next = ps.clone();
        next.extend(l_nat(m).into_iter().map(Poly::Cst));
        next.extend(l_nat(m).into_iter().map(Poly::Var));
        next.extend(pp.iter().cloned().map(|(a, b)| Poly::add(a, b)));
        next.extend(pp.into_iter().map(|(a, b)| Poly::mul(a, b)));
        ps = next;
    }
    ps
}

pub fn l_list_nat(n: u64) -> Vec<Vec<u64>> {
    let mut ls = vec![Vec::new()];
    for m in 0..n {
        let mut next = ls.clone();
        for (h, t) in product(&l_nat(m), &ls) {
            let mut l = vec![h];
            l.extend(t);
            next.push(l);
        }
        ls = next;
    }
    ls
}

pub type Triple = (Poly, Poly, Vec<u64>);

/// Level `n` of the list enumerator of solved equations.
pub fn h10_enumerator(n: u64) -> Vec<Triple> {
    let mut out = Vec::new();
    for m in 0..n {
        let ps = enumerate_polys(m);
        let ls = l_list_nat(m);
        for p in &ps {
            for q in &ps {
                for s in &ls {
                    if h10_eval(p, s) == h10_eval(q, s) {
                        out.push((p.clone(), q.clone(), s.clone()));
                    }
                }
            }
        }
    }
    out
}

/// Inverse of the diagonal pairing `(a, b) ↦ (a+b)(a+b+1)/2 + b`.
pub fn unpair(k: u64) -> (u64, u64) {
    let mut d = ((((8 * k as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    while d * (d + 1) / 2 > k {
        d -= 1;
    }
    let b = k - d * (d + 1) / 2;
    (d - b, b)
}

pub fn pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

/// The option enumerator: instance at position `i` of level `n` where
/// `(n, i) = unpair(k)`.
pub fn h10_instance(k: u64) -> Option<H10Instance> {
    let (n, i) = unpair(k);
    h10_enumerator(n)
        .into_iter()
        .nth(i as usize)
        .map(|(p, q, _)| H10Instance::new(p, q))
}

/// Lengths and random access for levels too large to build.
pub mod index {
    use super::Poly;

    pub fn polys_len(n: u64) -> Option<u128> {
        let mut len: u128 = 0;
        for m in 0..n as u128 {
            let sq = len.checked_mul(len)?;
            len = len.checked_add(2 * m)?.checked_add(sq.checked_mul(2)?)?;
        }
        Some(len)
    }

    pub fn poly_at(n: u64, i: u128) -> Option<Poly> {
        if n == 0 {
            return None;
        }
        let m = n - 1;
        let prev = polys_len(m)?;
        if i < prev {
            return poly_at(m, i);
        }
        let mut j = i - prev;
        if j < m as u128 {
            return Some(Poly::Cst(j as u64));
        }
        j -= m as u128;
        if j < m as u128 {
            return Some(Poly::Var(j as u64));
        }
        j -= m as u128;
        let sq = prev * prev;
        let (mul, j) = if j < sq { (false, j) } else { (true, j - sq) };
        if j >= sq {
            return None;
        }
        let a = poly_at(m, j / prev)?;
        let b = poly_at(m, j % prev)?;
        Some(if mul { Poly::mul(a, b) } else { Poly::add(a, b) })
    }

    /// First position of `p` in level `n`.
    pub fn poly_index(n: u64, p: &Poly) -> Option<u128> {
        if n == 0 || p.level() as u64 > n {
            return None;
        }
        let m = n - 1;
        if let Some(i) = poly_index(m, p) {
            return Some(i);
        }
        let prev = polys_len(m)?;
        let base = prev + 2 * m as u128;
        match p {
            Poly::Cst(c) => Some(prev + *c as u128),
            Poly::Var(v) => Some(prev + m as u128 + *v as u128),
            Poly::Add(a, b) => Some(base + poly_index(m, a)? * prev + poly_index(m, b)?),
            Poly::Mul(a, b) => Some(base + prev * prev + poly_index(m, a)? * prev + poly_index(m, b)?),
        }
    }

    pub fn lists_len(n: u64) -> Option<u128> {
        let mut len: u128 = 1;
        for m in 0..n as u128 {
            len = len.checked_add(m.checked_mul(len)?)?;
        }
        Some(len)
    }

    pub fn list_at(n: u64, i: u128) -> Option<Vec<u64>> {
        if n == 0 {
            return (i == 0).then(Vec::new);
        }
        let m = n - 1;
        let prev = lists_len(m)?;
        if i < prev {
            return list_at(m, i);
        }
        let j = i - prev;
        let h = j / prev;
        if h >= m as u128 {
            return None;
        }
        let mut l = vec![h as u64];
        l.extend(list_at(m, j % prev)?);
        Some(l)
    }

    pub fn list_index(n: u64, l: &[u64]) -> Option<u128> {
        if n == 0 {
            return l.is_empty().then_some(0);
        }
        let m = n - 1;
        if let Some(i) = list_index(m, l) {
            return Some(i);
        }
        let (h, t) = l.split_first()?;
        if *h >= m {
            return None;
        }
        let prev = lists_len(m)?;
        Some(prev + *h as u128 * prev + list_index(m, t)?)
    }

    /// Length of the unfiltered triple product added at level `n`.
    pub fn triples_len(n: u64) -> Option<u128> {
        let m = n.checked_sub(1)?;
        let p = polys_len(m)?;
        p.checked_mul(p)?.checked_mul(lists_len(m)?)
    }

    pub fn triple_at(n: u64, i: u128) -> Option<super::Triple> {
        let m = n.checked_sub(1)?;
        let p = polys_len(m)?;
        let l = lists_len(m)?;
        let pq = i / l;
        Some((poly_at(m, pq / p)?, poly_at(m, pq % p)?, list_at(m, i % l)?))
    }

    pub fn triple_index(n: u64, t: &super::Triple) -> Option<u128> {
        let m = n.checked_sub(1)?;
        let p = polys_len(m)?;
        let l = lists_len(m)?;
        let (a, b, s) = t;
        Some((poly_index(m, a)? * p + poly_index(m, b)?) * l + list_index(m, s)?)
    }
}

/// Extracts what the reduction needs from the bundled program.
pub fn prepare(env: &mut ExtractionEnv, program: &CheckedProgram) -> Result<(), ReductionError> {
    extract_program(
        env,
        program,
        &[("h10_instance".into(), vec![]), ("instance_eqb".into(), vec![])],
    )?;
    Ok(())
}

/// The term that halts iff `inst` is solvable; see
/// [`reduction_of_enumerable`].
pub fn h10_reduction(
    env: &mut ExtractionEnv,
    program: &CheckedProgram,
    inst: &H10Instance,
) -> Result<Term, ReductionError> {
    prepare(env, program)?;
    let x = env
        .registry
        .encode(&instance_type(), &inst.to_value())
        .map_err(crate::extract::ExtractError::from)?;
    reduction_of_enumerable(
        env.get("h10_instance", &[]).expect("prepared"),
        env.get("instance_eqb", &[]).expect("prepared"),
        &x,
    )
}

#[cfg(test)]
mod tests {
    use super::index::*;
    use super::*;
    use crate::eval::machine_eval;
    use crate::par::with_stack;
    use crate::source::interp;

    #[test]
    fn eval_equations() {
        assert_eq!(h10_eval(&Poly::Var(0), &[]), 0);
        let p = Poly::add(Poly::Cst(2), Poly::mul(Poly::Cst(3), Poly::Var(0)));
        assert_eq!(h10_eval(&p, &[4]), 14);
        assert_eq!(h10_eval(&Poly::Cst(7), &[1, 2, 3]), 7);
    }

    #[test]
    fn levels_are_cumulative() {
        assert!(enumerate_polys(0).is_empty());
        for n in 0..4 {
            let a = enumerate_polys(n);
            let b = enumerate_polys(n + 1);
            assert_eq!(&b[..a.len()], &a[..]);
            let a = l_list_nat(n);
            assert_eq!(&l_list_nat(n + 1)[..a.len()], &a[..]);
        }
        assert!(h10_enumerator(0).is_empty());
    }

    #[test]
    fn random_access_matches_built_levels() {
        for n in 0..5 {
            let ps = enumerate_polys(n);
            assert_eq!(polys_len(n), Some(ps.len() as u128));
            for (i, p) in ps.iter().enumerate() {
                assert_eq!(poly_at(n, i as u128).as_ref(), Some(p));
                let first = ps.iter().position(|q| q == p).unwrap();
                assert_eq!(poly_index(n, p), Some(first as u128));
            }
            let ls = l_list_nat(n);
            assert_eq!(lists_len(n), Some(ls.len() as u128));
            for (i, l) in ls.iter().enumerate() {
                assert_eq!(list_at(n, i as u128).as_ref(), Some(l));
                let first = ls.iter().position(|q| q == l).unwrap();
                assert_eq!(list_index(n, l), Some(first as u128));
            }
        }
    }

    #[test]
    fn level_is_first_appearance() {
        for p in enumerate_polys(4) {
            assert!(enumerate_polys(p.level() as u64).contains(&p));
            assert!(!enumerate_polys(p.level() as u64 - 1).contains(&p));
        }
    }

    #[test]
    fn pairing_round_trips() {
        for k in 0..500 {
            let (a, b) = unpair(k);
            assert_eq!(pair(a, b), k);
        }
        assert_eq!(unpair(6), (3, 0));
    }

    #[test]
    fn native_enumerators_mirror_the_source() {
        let p = crate::stdlib::program();
        for n in 0..4 {
            let v = interp(p, "L_poly", &[Value::nat(n)]).unwrap();
            let want = Value::list(enumerate_polys(n).iter().map(Poly::to_value));
            assert_eq!(v, want);
            let v = interp(p, "L_list_nat", &[Value::nat(n)]).unwrap();
            assert_eq!(v, Value::list(l_list_nat(n).iter().map(|l| Value::nat_list(l))));
        }
        for k in 0..12 {
            let v = interp(p, "h10_instance", &[Value::nat(k)]).unwrap();
            assert_eq!(v, Value::option(h10_instance(k).map(|i| i.to_value())), "k={k}");
        }
    }

    #[test]
    fn parses_instances() {
        let i = H10Instance::parse("(h10 (v 0) (+ (c 1) (* (v 1) (c 2))))").unwrap();
        assert_eq!(i.to_string(), "(h10 (v 0) (+ (c 1) (* (v 1) (c 2))))");
        assert!(H10Instance::parse("(h10 (v 0))").is_err());
        assert!(H10Instance::parse("(h10 (q 0) (c 1))").is_err());
    }

    #[test]
    fn trivial_instance_halts_at_first_witness() {
        let p = crate::stdlib::program();
        let mut env = ExtractionEnv::new(p);
        let inst = H10Instance::new(Poly::Cst(0), Poly::Cst(0));
        let s = h10_reduction(&mut env, p, &inst).unwrap();
        let want = (0..).find(|&k| h10_instance(k).as_ref() == Some(&inst)).unwrap();
        let out = with_stack(|| machine_eval(&s, 50_000_000).unwrap());
        assert_eq!(out.value().and_then(super::super::decode_witness), Some(want));
    }
}
