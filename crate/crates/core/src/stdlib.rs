//! The bundled source programs.
//!
//! Files build on each other in the order `base`, `term`, `h10`; `tm`
//! needs `base` plus a machine table (see [`crate::reductions::tm`]).

use std::sync::OnceLock;

use crate::source::{parse_program, typecheck, CheckedProgram, SourceError};
use crate::types::SrcType;

pub const BASE: &str = include_str!("../fixtures/base.lx");
pub const TERM: &str = include_str!("../fixtures/term.lx");
pub const H10: &str = include_str!("../fixtures/h10.lx");
pub const TM_TYPES: &str = include_str!("../fixtures/tm_types.lx");
pub const TM: &str = include_str!("../fixtures/tm.lx");

/// Parses and checks the concatenation of `parts`.
pub fn load(parts: &[&str]) -> Result<CheckedProgram, SourceError> {
    typecheck(&parse_program(&parts.join("\n"))?)
}

/// `base`, `term` and `h10` together.
pub fn program() -> &'static CheckedProgram {
    static P: OnceLock<CheckedProgram> = OnceLock::new();
    P.get_or_init(|| load(&[BASE, TERM, H10]).expect("bundled fixtures check"))
}

/// Every first-order or higher-order definition of [`program`] with the
/// instance it is exercised at.
pub fn instances() -> Vec<(&'static str, Vec<SrcType>)> {
    let nat = SrcType::nat;
    let poly = || SrcType::base("poly");
    vec![
        ("negb", vec![]),
        ("andb", vec![]),
        ("orb", vec![]),
        ("add", vec![]),
        ("mul", vec![]),
        ("eqb", vec![]),
        ("leb", vec![]),
        ("pred", vec![]),
        ("double", vec![]),
        ("is_zero", vec![]),
        ("even", vec![]),
        ("append", vec![nat()]),
        ("map", vec![nat(), nat()]),
        ("filter", vec![nat()]),
        ("fold_right", vec![nat(), nat()]),
        ("nth", vec![nat()]),
        ("nth_error", vec![nat()]),
        ("list_prod", vec![nat(), nat()]),
        ("cantor_next", vec![]),
        ("unpair", vec![]),
        ("subst", vec![]),
        ("eva", vec![]),
        ("eval", vec![]),
        ("poly_eqb", vec![]),
        ("L_nat", vec![]),
        ("poly_add'", vec![]),
        ("poly_mul'", vec![]),
        ("L_poly", vec![]),
        ("cons'", vec![]),
        ("L_list_nat", vec![]),
        ("h10_test", vec![]),
        ("h10_enum", vec![]),
        ("h10_instance", vec![]),
        ("instance_eqb", vec![]),
    ]
    .into_iter()
    .chain(std::iter::once(("list_prod", vec![poly(), poly()])))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scott::Value;
    use crate::source::interp;

    #[test]
    fn bundled_programs_check() {
        let p = program();
        assert!(p.def("eva").is_some());
        assert!(p.def("h10_instance").is_some());
    }

    #[test]
    fn arithmetic_agrees_with_native() {
        let p = program();
        for x in 0..5 {
            for y in 0..5 {
                let a = [Value::nat(x), Value::nat(y)];
                assert_eq!(interp(p, "add", &a).unwrap(), Value::nat(x + y));
                assert_eq!(interp(p, "mul", &a).unwrap(), Value::nat(x * y));
                assert_eq!(interp(p, "leb", &a).unwrap(), Value::bool(x <= y));
            }
        }
    }

    #[test]
    fn unpair_walks_diagonals() {
        let p = program();
        let got: Vec<Value> = (0..6).map(|k| interp(p, "unpair", &[Value::nat(k)]).unwrap()).collect();
        let want: Vec<Value> = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
            .iter()
            .map(|&(a, b)| Value::pair(Value::nat(a), Value::nat(b)))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn list_prod_is_row_major() {
        let p = program();
        let out = interp(p, "list_prod", &[Value::nat_list(&[1, 2]), Value::nat_list(&[3])]).unwrap();
        let pair = |a, b| Value::pair(Value::nat(a), Value::nat(b));
        assert_eq!(out, Value::list([pair(1, 3), pair(2, 3)]));
    }
}
