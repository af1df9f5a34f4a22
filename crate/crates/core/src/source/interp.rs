//! Reference semantics: call-by-value big-step evaluation of checked
//! programs. Types are erased, so every instance of a polymorphic definition
//! runs the same code.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use super::{CheckedProgram, SourceError, SrcExpr};
use crate::scott::Value;

/// Applications allowed per [`Interp`] before evaluation is declared stuck.
/// Checked programs terminate; hitting this signals a broken invariant.
pub const DEFAULT_FUEL: u64 = 2_000_000_000;

type NativeFn = Arc<dyn Fn(&[Value]) -> Value + Send + Sync>;

#[derive(Clone)]
pub enum RVal {
    Con(usize, Rc<[RVal]>),
    Closure {
        body: Arc<SrcExpr>,
        env: Env,
    },
    /// A `fix` whose body has not been entered yet.
    Rec {
        body: Arc<SrcExpr>,
        env: Env,
    },
    CtorFn {
        ctor: usize,
        arity: usize,
        args: Vec<RVal>,
    },
    Native {
        arity: usize,
        f: NativeFn,
        args: Vec<RVal>,
    },
}

#[derive(Clone, Default)]
pub struct Env(Option<Rc<EnvNode>>);

struct EnvNode {
    val: RVal,
    next: Env,
}

impl Env {
    fn push(&self, val: RVal) -> Env {
        Env(Some(Rc::new(EnvNode {
            val,
            next: self.clone(),
        })))
    }

    fn get(&self, mut i: usize) -> Option<&RVal> {
        let mut cur = self.0.as_ref();
        while let Some(node) = cur {
            if i == 0 {
                return Some(&node.val);
            }
            i -= 1;
            cur = node.next.0.as_ref();
        }
        None
    }
}

impl RVal {
    pub fn data(v: &Value) -> RVal {
        RVal::Con(v.ctor, v.args.iter().map(RVal::data).collect())
    }

    /// A first-order Rust function of `arity` data arguments.
    pub fn native(arity: usize, f: impl Fn(&[Value]) -> Value + Send + Sync + 'static) -> RVal {
        RVal::Native {
            arity,
            f: Arc::new(f),
            args: Vec::new(),
        }
    }

    pub fn to_value(&self) -> Option<Value> {
        match self {
            RVal::Con(c, args) => Some(Value::new(*c, args.iter().map(RVal::to_value).collect::<Option<_>>()?)),
            _ => None,
        }
    }
}

pub struct Interp<'p> {
    program: &'p CheckedProgram,
    globals: RefCell<HashMap<String, RVal>>,
    fuel: Cell<u64>,
}

fn stuck(message: impl Into<String>) -> SourceError {
    SourceError::Eval(message.into())
}

impl<'p> Interp<'p> {
    pub fn new(program: &'p CheckedProgram) -> Interp<'p> {
        Interp::with_fuel(program, DEFAULT_FUEL)
    }

    pub fn with_fuel(program: &'p CheckedProgram, fuel: u64) -> Interp<'p> {
        Interp {
            program,
            globals: RefCell::new(HashMap::new()),
            fuel: Cell::new(fuel),
        }
    }

    pub fn def_value(&self, name: &str) -> Result<RVal, SourceError> {
        if let Some(v) = self.globals.borrow().get(name) {
            return Ok(v.clone());
        }
        let def = self
            .program
            .def(name)
            .ok_or_else(|| stuck(format!("unknown definition `{name}`")))?;
        let v = self.eval(&def.body, &Env::default())?;
        self.globals.borrow_mut().insert(name.to_string(), v.clone());
        Ok(v)
    }

    /// Constructor `ctor` of `adt` as a curried function value.
    pub fn ctor_value(&self, adt: &str, ctor: usize) -> Result<RVal, SourceError> {
        let def = self
            .program
            .registry
            .adt(adt)
            .ok_or_else(|| stuck(format!("unknown datatype `{adt}`")))?;
        let arity = def
            .ctors
            .get(ctor)
            .ok_or_else(|| stuck(format!("`{adt}` has no constructor {ctor}")))?
            .fields
            .len();
        Ok(if arity == 0 {
            RVal::Con(ctor, Rc::from(Vec::new()))
        } else {
            RVal::CtorFn {
                ctor,
                arity,
                args: Vec::new(),
            }
        })
    }

    pub fn call(&self, name: &str, args: Vec<RVal>) -> Result<RVal, SourceError> {
        let f = self.def_value(name)?;
        args.into_iter().try_fold(f, |f, a| self.apply(f, a))
    }

    pub fn apply(&self, f: RVal, a: RVal) -> Result<RVal, SourceError> {
        let left = self.fuel.get();
        if left == 0 {
            return Err(stuck("evaluation budget exhausted"));
        }
        self.fuel.set(left - 1);
        match f {
            RVal::Closure { body, env } => self.eval(&body, &env.push(a)),
            RVal::Rec { ref body, ref env } => {
                let unrolled = self.eval(body, &env.push(f.clone()))?;
                self.apply(unrolled, a)
            }
            RVal::CtorFn { ctor, arity, mut args } => {
                args.push(a);
                Ok(if args.len() == arity {
                    RVal::Con(ctor, Rc::from(args))
                } else {
                    RVal::CtorFn { ctor, arity, args }
                })
            }
            RVal::Native { arity, f, mut args } => {
                args.push(a);
                if args.len() < arity {
                    return Ok(RVal::Native { arity, f, args });
                }
                let vals = args
                    .iter()
                    .map(RVal::to_value)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| stuck("native function applied to a non-data value"))?;
                Ok(RVal::data(&f(&vals)))
            }
            RVal::Con(..) => Err(stuck("applying a data value")),
        }
    }

    fn eval(&self, e: &SrcExpr, env: &Env) -> Result<RVal, SourceError> {
        match e {
            SrcExpr::Var(i) => env
                .get(*i)
                .cloned()
                .ok_or_else(|| stuck(format!("unbound variable {i}"))),
            SrcExpr::Lam { body, .. } => Ok(RVal::Closure {
                body: body.clone(),
                env: env.clone(),
            }),
            SrcExpr::App(f, a) => {
                let fv = self.eval(f, env)?;
                let av = self.eval(a, env)?;
                self.apply(fv, av)
            }
            SrcExpr::Ctor { adt, ctor, .. } => self.ctor_value(adt, *ctor),
            SrcExpr::Match {
                scrutinee, branches, ..
            } => {
                let RVal::Con(c, fields) = self.eval(scrutinee, env)? else {
                    return Err(stuck("matching on a non-data value"));
                };
                let b = branches.get(c).ok_or_else(|| stuck("constructor index out of range"))?;
                let env = fields.iter().fold(env.clone(), |env, f| env.push(f.clone()));
                self.eval(&b.body, &env)
            }
            SrcExpr::Fix { body, .. } => Ok(RVal::Rec {
                body: body.clone(),
                env: env.clone(),
            }),
            SrcExpr::Const { name, .. } => self.def_value(name),
            SrcExpr::Lit { value, .. } => Ok(RVal::data(value)),
        }
    }
}

/// Applies definition `name` to data arguments, on a thread with a large
/// stack.
pub fn interp(program: &CheckedProgram, name: &str, args: &[Value]) -> Result<Value, SourceError> {
    crate::par::with_stack(|| {
        let it = Interp::new(program);
        let out = it.call(name, args.iter().map(RVal::data).collect())?;
        out.to_value()
            .ok_or_else(|| stuck(format!("`{name}` did not return data")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{monomorphize, parse_program, typecheck};
    use crate::types::SrcType;

    const SRC: &str = "
      (def orb (-> bool bool bool)
        (lam (x bool) (y bool) (if x #t y)))
      (def succ (-> nat nat) (lam (n nat) (S n)))
      (def eqb (-> nat nat bool)
        (fix eqb 0 (-> nat nat bool)
          (lam (x nat) (y nat)
            (match x nat
              ((O (match y nat ((O #t) ((S _) #f))))
               ((S x1) (match y nat ((O #f) ((S y1) (eqb x1 y1))))))))))
      (def map (A B) (-> (-> A B) (list A) (list B))
        (lam (f (-> A B))
          (fix go 0 (-> (list A) (list B))
            (lam (l (list A))
              (match l list
                ((nil (ctor list.nil (B)))
                 ((cons h t) (ctor list.cons (B) (f h) (go t)))))))))";

    fn program() -> CheckedProgram {
        typecheck(&parse_program(SRC).unwrap()).unwrap()
    }

    #[test]
    fn orb_truth_table() {
        let p = program();
        for (x, y) in [(true, true), (true, false), (false, true), (false, false)] {
            let out = interp(&p, "orb", &[Value::bool(x), Value::bool(y)]).unwrap();
            assert_eq!(out, Value::bool(x || y));
        }
    }

    #[test]
    fn eqb_decides_equality() {
        let p = program();
        for x in 0..6 {
            for y in 0..6 {
                let out = interp(&p, "eqb", &[Value::nat(x), Value::nat(y)]).unwrap();
                assert_eq!(out, Value::bool(x == y));
            }
        }
    }

    #[test]
    fn map_with_named_function() {
        let p = program();
        let it = Interp::new(&p);
        let out = it
            .call(
                "map",
                vec![it.def_value("succ").unwrap(), RVal::data(&Value::nat_list(&[0, 1]))],
            )
            .unwrap();
        assert_eq!(out.to_value(), Some(Value::nat_list(&[1, 2])));
    }

    #[test]
    fn native_arguments_are_called() {
        let p = program();
        let it = Interp::new(&p);
        let double = RVal::native(1, |a| Value::nat(2 * a[0].as_nat().unwrap()));
        let out = it
            .call("map", vec![double, RVal::data(&Value::nat_list(&[1, 3]))])
            .unwrap();
        assert_eq!(out.to_value(), Some(Value::nat_list(&[2, 6])));
    }

    #[test]
    fn monomorphic_instance_agrees() {
        let p = program();
        let mono = monomorphize(p.def("map").unwrap(), &[SrcType::nat(), SrcType::nat()]).unwrap();
        let mut prog = p.program.clone();
        prog.defs.push(crate::source::Def {
            name: "map_nat".into(),
            ..mono
        });
        let p2 = typecheck(&prog).unwrap();
        let it = Interp::new(&p2);
        let l = RVal::data(&Value::nat_list(&[4, 0]));
        let a = it.call("map", vec![it.def_value("succ").unwrap(), l.clone()]).unwrap();
        let b = it.call("map_nat", vec![it.def_value("succ").unwrap(), l]).unwrap();
        assert_eq!(a.to_value(), b.to_value());
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let p = program();
        let it = Interp::with_fuel(&p, 3);
        let e = it
            .call("eqb", vec![RVal::data(&Value::nat(5)), RVal::data(&Value::nat(5))])
            .err()
            .unwrap();
        assert!(matches!(e, SourceError::Eval(_)));
    }
}
