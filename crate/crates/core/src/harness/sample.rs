use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Candidate, TyDesc};
use crate::scott::{Registry, Value};
use crate::types::SrcType;

pub const DEFAULT_SAMPLES: usize = 200;

const NAT_SMALL: u64 = 24;
const NAT_LARGE: std::ops::RangeInclusive<u64> = 25..=200;
const MAX_LIST: usize = 12;
const DOMAIN: usize = 28;

/// Argument tuples for a check. Booleans are exhaustive; naturals are
/// `0..=24` plus three draws from `25..=200`; lists have up to 12 sampled
/// elements; other data is drawn at random. When the product of the
/// argument domains has at most `samples` elements it is used whole,
/// otherwise `samples` distinct tuples are drawn from it.
#[derive(Clone)]
pub struct Sampler {
    pub seed: u64,
    pub samples: usize,
    positions: BTreeMap<usize, Vec<Value>>,
    types: Vec<(SrcType, Vec<Value>)>,
    pool: Vec<(TyDesc, Candidate)>,
}

impl Sampler {
    pub fn new(seed: u64, samples: usize) -> Sampler {
        Sampler {
            seed,
            samples,
            positions: BTreeMap::new(),
            types: Vec::new(),
            pool: Vec::new(),
        }
    }

    /// Fixes the domain of argument `pos` (0-based).
    pub fn with_position(mut self, pos: usize, values: Vec<Value>) -> Sampler {
        self.positions.insert(pos, values);
        self
    }

    /// Fixes the domain of every base argument of type `ty`.
    pub fn with_type(mut self, ty: SrcType, values: Vec<Value>) -> Sampler {
        self.types.push((ty, values));
        self
    }

    /// Offers `cand` for functional arguments of type `ty`.
    pub fn with_pool(mut self, ty: TyDesc, cand: Candidate) -> Sampler {
        self.pool.push((ty, cand));
        self
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// The values argument `pos` of type `ty` ranges over.
    pub fn domain(&self, registry: &Registry, pos: usize, ty: &SrcType) -> Result<Vec<Value>, String> {
        if let Some(vs) = self.positions.get(&pos) {
            return Ok(vs.clone());
        }
        let mut rng = self.rng(pos as u64 + 1);
        self.default_domain(registry, ty, &mut rng)
    }

    fn default_domain(&self, registry: &Registry, ty: &SrcType, rng: &mut ChaCha8Rng) -> Result<Vec<Value>, String> {
        if let Some((_, vs)) = self.types.iter().find(|(t, _)| t == ty) {
            return Ok(vs.clone());
        }
        let SrcType::Adt(name, args) = ty else {
            return Err(format!("cannot sample {ty}"));
        };
        Ok(match (name.as_str(), args.as_slice()) {
            ("bool", []) => vec![Value::bool(true), Value::bool(false)],
            ("nat", []) => (0..=NAT_SMALL)
                .map(Value::nat)
                .chain((0..3).map(|_| Value::nat(rng.gen_range(NAT_LARGE))))
                .collect(),
            ("list", [el]) => {
                let elems = self.default_domain(registry, el, rng)?;
                let mut out = Vec::new();
                for i in 0..DOMAIN {
                    let len = if i <= MAX_LIST { i } else { rng.gen_range(0..=MAX_LIST) };
                    out.push(Value::list(
                        (0..len).map(|_| elems[rng.gen_range(0..elems.len())].clone()),
                    ));
                }
                out
            }
            _ => {
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                for _ in 0..DOMAIN * 4 {
                    let v = registry.random_value(ty, rng, 4).map_err(|e| e.to_string())?;
                    if seen.insert(v.clone()) {
                        out.push(v);
                    }
                    if out.len() == DOMAIN {
                        break;
                    }
                }
                out
            }
        })
    }

    /// Candidates for each argument of `ty`, in input order.
    pub fn tuples(&self, registry: &Registry, ty: &TyDesc) -> Result<Vec<Vec<Candidate>>, String> {
        let (args, _) = ty.uncurry();
        let mut domains: Vec<Vec<Candidate>> = Vec::new();
        for (pos, a) in args.iter().enumerate() {
            domains.push(match a {
                TyDesc::Base(t) => self
                    .domain(registry, pos, t)?
                    .iter()
                    .map(|v| Candidate::data(registry, t, v).map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?,
                f => {
                    let c: Vec<Candidate> = self
                        .pool
                        .iter()
                        .filter(|(t, _)| t == *f)
                        .map(|(_, c)| c.clone())
                        .collect();
                    if c.is_empty() {
                        return Err(format!("no candidate of type {f} in the pool"));
                    }
                    c
                }
            });
            if domains.last().is_some_and(Vec::is_empty) {
                return Err(format!("argument {} has an empty domain", pos + 1));
            }
        }
        let total = domains.iter().try_fold(1usize, |acc, d| acc.checked_mul(d.len()));
        let pick = |idx: &[usize]| -> Vec<Candidate> { idx.iter().zip(&domains).map(|(&i, d)| d[i].clone()).collect() };
        match total {
            Some(n) if n <= self.samples => Ok((0..n)
                .map(|mut k| {
                    let mut idx = vec![0; domains.len()];
                    for (slot, d) in idx.iter_mut().zip(&domains).rev() {
                        *slot = k % d.len();
                        k /= d.len();
                    }
                    pick(&idx)
                })
                .collect()),
            _ => {
                let mut rng = self.rng(0);
                let mut seen = BTreeSet::new();
                let mut out = Vec::new();
                let mut tries = 0;
                while out.len() < self.samples && tries < self.samples * 20 {
                    tries += 1;
                    let idx: Vec<usize> = domains.iter().map(|d| rng.gen_range(0..d.len())).collect();
                    if seen.insert(idx.clone()) {
                        out.push(pick(&idx));
                    }
                }
                Ok(out)
            }
        }
    }
}
