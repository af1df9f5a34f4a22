//! Sequential against data-parallel checking: the soundness sweep of a few
//! bundled definitions, and confluence checks over random closed terms.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lextract_core::gen::{random_closed, TermCounts};
use lextract_core::harness::sweep::Sweep;
use lextract_core::par::{self, Mode};
use lextract_core::stdlib;
use lextract_core::term::enumerate_reductions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn sweep(c: &mut Criterion) {
    let sweep = Sweep::new(Arc::new(stdlib::program().clone())).expect("bundled library extracts");
    let mut g = c.benchmark_group("check_computes");
    g.sample_size(10);
    for def in ["mul", "eqb", "subst"] {
        for (label, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(label, def), &mode, |b, &mode| {
                b.iter(|| sweep.check(def, &[], 7, 200, mode))
            });
        }
    }
    g.finish();
}

fn confluence(c: &mut Criterion) {
    let mut counts = TermCounts::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let terms: Vec<_> = (0..1_000).map(|_| random_closed(&mut counts, &mut rng, 12)).collect();
    let mut g = c.benchmark_group("enumerate_reductions");
    g.sample_size(10);
    for (label, mode) in MODES {
        g.bench_function(label, |b| {
            b.iter(|| par::map(mode, terms.clone(), |s| enumerate_reductions(&s, 30).len()))
        });
    }
    g.finish();
}

criterion_group!(benches, sweep, confluence);
criterion_main!(benches);
