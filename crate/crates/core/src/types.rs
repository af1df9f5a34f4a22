//! Source-level types, shared by the encoder registry, the source language
//! and the checking harness.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SrcType {
    /// An algebraic datatype applied to its type arguments.
    Adt(String, Vec<SrcType>),
    Param(String),
    Arrow(Box<SrcType>, Box<SrcType>),
    /// The type of types. Only ever appears to be rejected.
    Sort,
    /// A nested quantifier. Only ever appears to be rejected.
    Forall(Vec<String>, Box<SrcType>),
}

impl SrcType {
    pub fn adt(name: &str, args: Vec<SrcType>) -> SrcType {
        SrcType::Adt(name.to_string(), args)
    }

    pub fn base(name: &str) -> SrcType {
        SrcType::Adt(name.to_string(), Vec::new())
    }

    pub fn param(name: &str) -> SrcType {
        SrcType::Param(name.to_string())
    }

    pub fn arrow(dom: SrcType, cod: SrcType) -> SrcType {
        SrcType::Arrow(Box::new(dom), Box::new(cod))
    }

    /// `a1 -> ... -> an -> result`
    pub fn arrows(args: impl IntoIterator<Item = SrcType>, result: SrcType) -> SrcType {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter().rev().fold(result, |acc, a| SrcType::arrow(a, acc))
    }

    pub fn nat() -> SrcType {
        SrcType::base("nat")
    }

    pub fn bool() -> SrcType {
        SrcType::base("bool")
    }

    pub fn list(of: SrcType) -> SrcType {
        SrcType::adt("list", vec![of])
    }

    pub fn option(of: SrcType) -> SrcType {
        SrcType::adt("option", vec![of])
    }

    pub fn prod(a: SrcType, b: SrcType) -> SrcType {
        SrcType::adt("prod", vec![a, b])
    }

    /// No parameters, sorts or quantifiers anywhere.
    pub fn is_concrete(&self) -> bool {
        match self {
            SrcType::Adt(_, args) => args.iter().all(SrcType::is_concrete),
            SrcType::Arrow(a, b) => a.is_concrete() && b.is_concrete(),
            SrcType::Param(_) | SrcType::Sort | SrcType::Forall(..) => false,
        }
    }

    /// Splits `a1 -> ... -> an -> r` into its argument types and `r`.
    pub fn uncurry(&self) -> (Vec<&SrcType>, &SrcType) {
        let mut args = Vec::new();
        let mut t = self;
        while let SrcType::Arrow(a, b) = t {
            args.push(&**a);
            t = b;
        }
        (args, t)
    }

    pub fn substitute(&self, map: &BTreeMap<String, SrcType>) -> SrcType {
        match self {
            SrcType::Param(p) => map.get(p).cloned().unwrap_or_else(|| self.clone()),
            SrcType::Adt(n, args) => SrcType::Adt(n.clone(), args.iter().map(|a| a.substitute(map)).collect()),
            SrcType::Arrow(a, b) => SrcType::arrow(a.substitute(map), b.substitute(map)),
            SrcType::Sort => SrcType::Sort,
            SrcType::Forall(ps, body) => {
                let mut inner = map.clone();
                for p in ps {
                    inner.remove(p);
                }
                SrcType::Forall(ps.clone(), Box::new(body.substitute(&inner)))
            }
        }
    }

    pub fn mentions_adt(&self, name: &str) -> bool {
        match self {
            SrcType::Adt(n, args) => n == name || args.iter().any(|a| a.mentions_adt(name)),
            SrcType::Arrow(a, b) => a.mentions_adt(name) || b.mentions_adt(name),
            SrcType::Forall(_, b) => b.mentions_adt(name),
            SrcType::Param(_) | SrcType::Sort => false,
        }
    }
}

/// Binds `params` to `args` positionally.
pub fn param_map(params: &[String], args: &[SrcType]) -> BTreeMap<String, SrcType> {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

impl fmt::Display for SrcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SrcType::Adt(n, args) if args.is_empty() => write!(f, "{n}"),
            SrcType::Adt(n, args) => {
                write!(f, "({n}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            SrcType::Param(p) => write!(f, "{p}"),
            SrcType::Arrow(..) => {
                let (args, res) = self.uncurry();
                write!(f, "(->")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " {res})")
            }
            SrcType::Sort => write!(f, "Type"),
            SrcType::Forall(ps, b) => write!(f, "(forall ({}) {b})", ps.join(" ")),
        }
    }
}

impl fmt::Debug for SrcType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_sexp() {
        let t = SrcType::arrows(
            [
                SrcType::arrow(SrcType::param("A"), SrcType::param("B")),
                SrcType::list(SrcType::param("A")),
            ],
            SrcType::list(SrcType::param("B")),
        );
        assert_eq!(t.to_string(), "(-> (-> A B) (list A) (list B))");
    }

    #[test]
    fn substitution_instantiates_params() {
        let t = SrcType::list(SrcType::param("A"));
        let m = param_map(&["A".into()], &[SrcType::nat()]);
        assert_eq!(t.substitute(&m), SrcType::list(SrcType::nat()));
        assert!(t.substitute(&m).is_concrete());
        assert!(!t.is_concrete());
    }
}
