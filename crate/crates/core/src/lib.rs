//! Weak call-by-value lambda calculus, extraction of a small functional
//! language into it, and step-exact checking of the extracted terms.

pub mod combinators;
pub mod eval;
pub mod extract;
pub mod gen;
pub mod harness;
pub mod par;
pub mod reductions;
pub mod scott;
pub mod source;
pub mod stdlib;
pub mod syntax;
pub mod term;
pub mod types;

pub use eval::{eval_cbv, machine_eval, EvalOutcome};
pub use scott::{AdtDef, Registry, Value};
pub use syntax::{parse_term, print_term, Style};
pub use term::Term;
pub use types::SrcType;
