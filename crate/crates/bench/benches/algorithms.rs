//! Cost of runtime contracts: each algorithm with contracts off vs. asserted.

use std::collections::BTreeMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::seq::SliceRandom;
use rand::Rng;

use certalgo::graphs::{find_euler_circuit, topsort};
use certalgo::harness::gen;
use certalgo::matching::stable_matching;
use certalgo::{BstSet, ContractContext, ContractMode, DiGraph, Key, MaxHeap, OpenHashSet, PrefTable, UGraph};

const MODES: [ContractMode; 2] = [ContractMode::Off, ContractMode::Assert];

fn keys(n: usize) -> Vec<Key> {
    let mut rng = gen::rng(1);
    (0..n).map(|_| rng.gen_range(-1000..1000)).collect()
}

fn hash(x: &Key) -> u64 {
    let mut h = DefaultHasher::new();
    x.hash(&mut h);
    h.finish()
}

/// Complete preference lists, shuffled, on both sides.
fn prefs(n: u64) -> (PrefTable, PrefTable) {
    let mut rng = gen::rng(2);
    let mut side = || {
        let rows: BTreeMap<u64, Vec<u64>> = (1..=n)
            .map(|a| {
                let mut l: Vec<u64> = (1..=n).collect();
                l.shuffle(&mut rng);
                (a, l)
            })
            .collect();
        PrefTable::new(rows).unwrap()
    };
    (side(), side())
}

/// `side x side` torus: connected, every degree 4.
fn torus(side: u64) -> UGraph {
    let id = |r: u64, c: u64| (r % side) * side + (c % side) + 1;
    let edges =
        (0..side).flat_map(|r| (0..side).flat_map(move |c| [(id(r, c), id(r, c + 1)), (id(r, c), id(r + 1, c))]));
    UGraph::from_edges([], edges).unwrap()
}

fn sequences(c: &mut Criterion) {
    let input = keys(200);
    let mut group = c.benchmark_group("insertion_sort/200");
    for mode in MODES {
        group.bench_function(mode.to_string(), |b| {
            b.iter_batched(
                || input.clone(),
                |mut a| certalgo::search_sort::insertion_sort(&mut ContractContext::new(mode), &mut a).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn containers(c: &mut Criterion) {
    let input = keys(256);
    let mut group = c.benchmark_group("containers/256");
    for mode in MODES {
        group.bench_function(format!("heap/{mode}"), |b| {
            b.iter(|| {
                let mut ctx = ContractContext::new(mode);
                let mut h = MaxHeap::new();
                for &x in &input {
                    h.insert(&mut ctx, x).unwrap();
                }
                while !h.is_empty() {
                    h.delete_max(&mut ctx).unwrap();
                }
            })
        });
        group.bench_function(format!("hash_set/{mode}"), |b| {
            b.iter(|| {
                let mut ctx = ContractContext::new(mode);
                let mut s = OpenHashSet::new(hash);
                for x in &input {
                    if !s.contains(&mut ctx, x).unwrap() {
                        s.insert(&mut ctx, *x).unwrap();
                    }
                }
            })
        });
        group.bench_function(format!("tree_set/{mode}"), |b| {
            b.iter(|| {
                let mut ctx = ContractContext::new(mode);
                let mut t = BstSet::new();
                for &x in &input {
                    t.insert(&mut ctx, x).unwrap();
                }
                for &x in &input {
                    t.delete(&mut ctx, x).unwrap();
                }
            })
        });
    }
    group.finish();
}

fn graphs(c: &mut Criterion) {
    let (men, women) = prefs(40);
    let dag: DiGraph = gen::layered_dag(&mut gen::rng(3), 120);
    let grid = torus(8);
    let mut group = c.benchmark_group("graphs");
    for mode in MODES {
        group.bench_function(format!("stable_matching/40/{mode}"), |b| {
            b.iter(|| stable_matching(&mut ContractContext::new(mode), &men, &women).unwrap())
        });
        group.bench_function(format!("topsort/{}/{mode}", dag.vertices().len()), |b| {
            b.iter(|| topsort(&mut ContractContext::new(mode), &dag).unwrap())
        });
        group.bench_function(format!("euler/torus8/{mode}"), |b| {
            b.iter(|| find_euler_circuit(&mut ContractContext::new(mode), &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sequences, containers, graphs);
criterion_main!(benches);
