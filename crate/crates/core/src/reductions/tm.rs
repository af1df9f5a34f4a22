//! Turing machines as value tables, run natively and through the extracted
//! `tm_loop` of a program generated per machine.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::combinators::mu;
use crate::extract::{extract_program, ExtractionEnv};
use crate::scott::Value;
use crate::source::sexp::{read_all, Sexp};
use crate::source::CheckedProgram;
use crate::stdlib;
use crate::term::Term;
use crate::types::SrcType;

use super::{enc_false, enc_true, ReductionError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    Left,
    Right,
    Stay,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub write: Option<u64>,
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub state: u64,
    pub read: Vec<u64>,
    pub next: u64,
    pub actions: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TMachine {
    pub states: u64,
    pub tapes: usize,
    pub start: u64,
    pub halting: Vec<u64>,
    pub rules: Vec<Rule>,
}

/// Left and right hold the cells nearest the head first; cells beyond them
/// are blank (0).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tape {
    pub left: Vec<u64>,
    pub head: u64,
    pub right: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TMConfig {
    pub state: u64,
    pub tapes: Vec<Tape>,
}

fn format_err(pos: impl std::fmt::Display, message: &str) -> ReductionError {
    ReductionError::Format(format!("{pos}: {message}"))
}

fn nat(s: &Sexp) -> Result<u64, ReductionError> {
    s.atom()
        .and_then(|a| a.parse().ok())
        .ok_or_else(|| format_err(s.pos(), "expected a natural number"))
}

impl Tape {
    pub fn new(cells: &[u64]) -> Tape {
        match cells.split_first() {
            None => Tape::default(),
            Some((h, r)) => Tape {
                left: Vec::new(),
                head: *h,
                right: r.to_vec(),
            },
        }
    }

    fn act(&mut self, a: &Action) {
        if let Some(w) = a.write {
            self.head = w;
        }
        match a.mv {
            Move::Left => {
                let h = self.left.first().copied().unwrap_or(0);
                if !self.left.is_empty() {
                    self.left.remove(0);
                }
                self.right.insert(0, std::mem::replace(&mut self.head, h));
            }
            Move::Right => {
                let h = self.right.first().copied().unwrap_or(0);
                if !self.right.is_empty() {
                    self.right.remove(0);
                }
                self.left.insert(0, std::mem::replace(&mut self.head, h));
            }
            Move::Stay => {}
        }
    }

    pub fn to_value(&self) -> Value {
        Value::new(
            0,
            vec![
                Value::nat_list(&self.left),
                Value::nat(self.head),
                Value::nat_list(&self.right),
            ],
        )
    }

    pub fn from_value(v: &Value) -> Option<Tape> {
        let nats = |v: &Value| v.as_list()?.into_iter().map(Value::as_nat).collect::<Option<Vec<_>>>();
        match v.args.as_slice() {
            [l, h, r] => Some(Tape {
                left: nats(l)?,
                head: h.as_nat()?,
                right: nats(r)?,
            }),
            _ => None,
        }
    }
}

impl TMConfig {
    pub fn to_value(&self) -> Value {
        Value::new(
            0,
            vec![
                Value::nat(self.state),
                Value::list(self.tapes.iter().map(Tape::to_value)),
            ],
        )
    }

    pub fn from_value(v: &Value) -> Option<TMConfig> {
        match v.args.as_slice() {
            [q, ts] => Some(TMConfig {
                state: q.as_nat()?,
                tapes: ts.as_list()?.into_iter().map(Tape::from_value).collect::<Option<_>>()?,
            }),
            _ => None,
        }
    }
}

pub fn config_type() -> SrcType {
    SrcType::base("mconf")
}

impl TMachine {
    /// Parses `(tm (states N) (tapes N) (start Q) (halt Q*) RULE*)` with
    /// `RULE ::= (rule Q (SYM*) Q ((WRITE MOVE)*))`, `WRITE` a symbol or
    /// `_`, and `MOVE` one of `L`, `R`, `N`.
    pub fn parse(text: &str) -> Result<TMachine, ReductionError> {
        let forms = read_all(text).map_err(|e| format_err(e.pos, &e.message))?;
        let [form] = forms.as_slice() else {
            return Err(ReductionError::Format("expected one (tm ...) form".into()));
        };
        let items = match (form.head(), form.list()) {
            (Some("tm"), Some(items)) => &items[1..],
            _ => return Err(format_err(form.pos(), "expected (tm ...)")),
        };
        let mut m = TMachine {
            states: 0,
            tapes: 1,
            start: 0,
            halting: Vec::new(),
            rules: Vec::new(),
        };
        for it in items {
            let xs = it.list().unwrap_or_default();
            match (it.head(), xs) {
                (Some("states"), [_, n]) => m.states = nat(n)?,
                (Some("tapes"), [_, n]) => m.tapes = nat(n)? as usize,
                (Some("start"), [_, n]) => m.start = nat(n)?,
                (Some("halt"), [_, qs @ ..]) => m.halting = qs.iter().map(nat).collect::<Result<_, _>>()?,
                (Some("rule"), [_, q, read, q1, acts]) => {
                    let read = read
                        .list()
                        .ok_or_else(|| format_err(read.pos(), "expected (SYM*)"))?
                        .iter()
                        .map(nat)
                        .collect::<Result<_, _>>()?;
                    let actions = acts
                        .list()
                        .ok_or_else(|| format_err(acts.pos(), "expected ((WRITE MOVE)*)"))?
                        .iter()
                        .map(|a| match a.list() {
                            Some([w, mv]) => Ok(Action {
                                write: if w.atom() == Some("_") { None } else { Some(nat(w)?) },
                                mv: match mv.atom() {
                                    Some("L") => Move::Left,
                                    Some("R") => Move::Right,
                                    Some("N") => Move::Stay,
                                    _ => return Err(format_err(mv.pos(), "move must be L, R or N")),
                                },
                            }),
                            _ => Err(format_err(a.pos(), "expected (WRITE MOVE)")),
                        })
                        .collect::<Result<_, _>>()?;
                    m.rules.push(Rule {
                        state: nat(q)?,
                        read,
                        next: nat(q1)?,
                        actions,
                    });
                }
                _ => return Err(format_err(it.pos(), "unknown or malformed machine clause")),
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        let in_range = |q: u64| q < self.states;
        if !in_range(self.start) || !self.halting.iter().all(|&q| in_range(q)) {
            return Err(ReductionError::Format("state out of range".into()));
        }
        let mut keys = BTreeSet::new();
        for r in &self.rules {
            if !in_range(r.state) || !in_range(r.next) {
                return Err(ReductionError::Format(format!(
                    "rule for state {} out of range",
                    r.state
                )));
            }
            if r.read.len() != self.tapes || r.actions.len() != self.tapes {
                return Err(ReductionError::Format(format!(
                    "rule for state {} must read and act on {} tapes",
                    r.state, self.tapes
                )));
            }
            if !keys.insert((r.state, r.read.clone())) {
                return Err(ReductionError::Format(format!(
                    "duplicate rule for state {} reading {:?}",
                    r.state, r.read
                )));
            }
        }
        Ok(())
    }

    pub fn initial(&self, tapes: &[Vec<u64>]) -> TMConfig {
        let mut ts: Vec<Tape> = tapes.iter().map(|c| Tape::new(c)).collect();
        ts.resize(self.tapes, Tape::default());
        TMConfig {
            state: self.start,
            tapes: ts,
        }
    }

    pub fn is_halting(&self, q: u64) -> bool {
        self.halting.contains(&q)
    }

    /// One transition; a configuration without a matching row stays put.
    pub fn step(&self, c: &TMConfig) -> TMConfig {
        let read: Vec<u64> = c.tapes.iter().map(|t| t.head).collect();
        let Some(r) = self.rules.iter().find(|r| r.state == c.state && r.read == read) else {
            return c.clone();
        };
        let mut tapes = c.tapes.clone();
        for (t, a) in tapes.iter_mut().zip(&r.actions) {
            t.act(a);
        }
        TMConfig { state: r.next, tapes }
    }

    /// The halted configuration if the machine halts within `k` steps.
    pub fn run(&self, c: &TMConfig, k: u64) -> Option<TMConfig> {
        let mut c = c.clone();
        for _ in 0..k {
            if self.is_halting(c.state) {
                return Some(c);
            }
            c = self.step(&c);
        }
        self.is_halting(c.state).then_some(c)
    }

    /// Definitions of `tm_table` and `tm_halting` for this machine.
    pub fn table_source(&self) -> String {
        let mut s = String::from("(def tm_table (list rule)\n  (list rule");
        for r in &self.rules {
            let read: Vec<String> = r.read.iter().map(u64::to_string).collect();
            let _ = write!(
                s,
                "\n    (rl {} (list nat {}) {} (list action",
                r.state,
                read.join(" "),
                r.next
            );
            for a in &r.actions {
                let w = match a.write {
                    None => "(ctor option.none (nat))".to_string(),
                    Some(x) => format!("(ctor option.some (nat) {x})"),
                };
                let mv = match a.mv {
                    Move::Left => "left",
                    Move::Right => "right",
                    Move::Stay => "stay",
                };
                let _ = write!(s, " (act {w} {mv})");
            }
            s.push_str("))");
        }
        s.push_str("))\n");
        let hs: Vec<String> = self.halting.iter().map(u64::to_string).collect();
        let _ = writeln!(s, "(def tm_halting (list nat) (list nat {}))", hs.join(" "));
        s
    }

    /// The bundled base and machine files around this machine's table.
    pub fn program(&self) -> Result<CheckedProgram, ReductionError> {
        Ok(stdlib::load(&[
            stdlib::BASE,
            stdlib::TM_TYPES,
            &self.table_source(),
            stdlib::TM,
        ])?)
    }
}

/// Extracts `tm_loop` for the machine `program` was built for.
pub fn extract_loop(env: &mut ExtractionEnv, program: &CheckedProgram) -> Result<Term, ReductionError> {
    extract_program(env, program, &[("tm_loop".into(), vec![])])?;
    Ok(env.get("tm_loop", &[]).expect("just extracted").clone())
}

/// `μ (λk. tm_loop c₀ k false (λ_. true))`: halts iff the machine halts
/// from `tapes`, with the least sufficient step count as normal form.
pub fn tm_halting_reduction(
    env: &mut ExtractionEnv,
    program: &CheckedProgram,
    machine: &TMachine,
    tapes: &[Vec<u64>],
) -> Result<Term, ReductionError> {
    let tm_loop = extract_loop(env, program)?;
    let c0 = env
        .registry
        .encode(&config_type(), &machine.initial(tapes).to_value())
        .map_err(crate::extract::ExtractError::from)?;
    // under λk: k = 0
    let test = Term::lam(Term::apps(
        Term::apps(tm_loop, [c0, Term::var(0)]),
        [enc_false(), Term::lam(enc_true())],
    ));
    Ok(mu(&test)?)
}

/// Writes a 1 and halts.
pub const HALTING_FIXTURE: &str = "\
(tm (states 2) (tapes 1) (start 0) (halt 1)
  (rule 0 (0) 1 ((1 R)))
  (rule 0 (1) 1 ((1 R))))";

/// Alternates two states forever, marking the tape as it walks right.
pub const WALKER_FIXTURE: &str = "\
(tm (states 3) (tapes 1) (start 0) (halt)
  (rule 0 (0) 1 ((1 R)))
  (rule 0 (1) 1 ((0 R)))
  (rule 1 (0) 0 ((_ R)))
  (rule 1 (1) 2 ((_ L)))
  (rule 2 (0) 2 ((_ N))))";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::machine_eval;
    use crate::par::with_stack;
    use crate::source::Interp;
    use crate::source::RVal;

    #[test]
    fn halting_fixture_runs_natively() {
        let m = TMachine::parse(HALTING_FIXTURE).unwrap();
        let c = m.initial(&[vec![]]);
        assert_eq!(m.run(&c, 0), None);
        let h = m.run(&c, 2).unwrap();
        assert_eq!(h.state, 1);
        assert_eq!(h.tapes[0].left, vec![1]);
        assert_eq!(m.run(&c, 1), m.run(&c, 2));
    }

    #[test]
    fn rejects_nondeterministic_tables() {
        let e =
            TMachine::parse("(tm (states 1) (tapes 1) (start 0) (halt) (rule 0 (0) 0 ((_ N))) (rule 0 (0) 0 ((1 N))))");
        assert!(e.is_err());
        assert!(TMachine::parse("(tm (states 1) (start 3))").is_err());
    }

    #[test]
    fn source_loop_matches_native() {
        let m = TMachine::parse(WALKER_FIXTURE).unwrap();
        let p = m.program().unwrap();
        let c = m.initial(&[vec![0, 1, 1]]);
        with_stack(|| {
            let it = Interp::new(&p);
            for k in [0, 1, 5, 9] {
                let native = m.run(&c, k).map(|c| c.to_value());
                let out = it
                    .call("tm_loop", vec![RVal::data(&c.to_value()), RVal::data(&Value::nat(k))])
                    .unwrap();
                assert_eq!(out.to_value(), Some(Value::option(native)));
                let stepped = it.call("tm_step", vec![RVal::data(&c.to_value())]).unwrap();
                assert_eq!(stepped.to_value(), Some(m.step(&c).to_value()));
            }
        });
    }

    #[test]
    fn halting_reduction_finds_step_count() {
        let m = TMachine::parse(HALTING_FIXTURE).unwrap();
        let p = m.program().unwrap();
        let mut env = ExtractionEnv::new(&p);
        let s = tm_halting_reduction(&mut env, &p, &m, &[vec![]]).unwrap();
        let out = with_stack(|| machine_eval(&s, 1_000_000).unwrap());
        assert_eq!(out.value().and_then(super::super::decode_witness), Some(1));
    }
}
