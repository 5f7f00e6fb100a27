//! Sequential against rayon-parallel execution of the four data-parallel
//! workloads: exhaustive search, shift verification, index-map
//! construction and identity trials.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gcp_core::construct::{construct_pair_with, expansion_identity_mismatch, random_draw};
use gcp_core::par;
use gcp_core::search::{exhaustive_gcp_search, SearchSpec};
use gcp_core::seeds::builtin_seeds;
use gcp_core::{ExpansionParams, Parallelism};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("parallel", Parallelism::Auto),
];

fn len18() -> gcp_core::SeedPair {
    builtin_seeds()
        .iter()
        .find(|r| r.name == "len18")
        .unwrap()
        .seed
        .clone()
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    for (m, q) in [(8, 4), (16, 2)] {
        let spec = SearchSpec::new(m, q);
        for (name, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(name, format!("{m},{q}")), &spec, |b, s| {
                b.iter(|| exhaustive_gcp_search(s, mode).unwrap())
            });
        }
    }
    g.finish();
}

fn verify(c: &mut Criterion) {
    // Length 18·2^6 = 1152, q = 8.
    let params = ExpansionParams::defaults(6, 2).unwrap();
    let pair = construct_pair_with(&len18(), &params, Parallelism::Sequential).unwrap();
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| pair.verify(mode)));
    }
    g.finish();
}

fn construct(c: &mut Criterion) {
    let params = ExpansionParams::defaults(12, 3).unwrap();
    let seed = len18();
    let mut g = c.benchmark_group("construct");
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| construct_pair_with(&seed, &params, mode).unwrap())
        });
    }
    g.finish();
}

fn identity_trials(c: &mut Criterion) {
    let mut g = c.benchmark_group("identity_trials");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                par::map_range(200, mode, |i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    rng.set_stream(i as u64);
                    let d = random_draw(&mut rng, 2..=8, 1..=3, 1..=4).unwrap();
                    let pair =
                        construct_pair_with(&d.seed, &d.params, Parallelism::Sequential).unwrap();
                    expansion_identity_mismatch(&d.seed, &d.params, &pair, Parallelism::Sequential)
                        .unwrap()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, search, verify, construct, identity_trials);
criterion_main!(benches);
