use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use percolab_core::blob::{blobs, grow_tree};
use percolab_core::cluster::{label_clusters, largest_cluster_in_box, long_arm_size};
use percolab_core::estimators::build_pi_table;
use percolab_core::lower::gluing_check;
use percolab_core::union_find::DisjointSets;
use percolab_core::verify::blob_instances;
use percolab_core::{Carrier, Config, LatticeSpec, Region, Site};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_config");
    for lattice in [LatticeSpec::triangular(), LatticeSpec::z2_bond()] {
        for n in [32i64, 128] {
            let carrier = Carrier::box_closure(lattice, n).unwrap();
            g.throughput(Throughput::Elements(carrier.num_elements() as u64));
            let mut seed = 0u64;
            g.bench_with_input(BenchmarkId::new(lattice.name(), n), &carrier, |b, carrier| {
                b.iter(|| {
                    seed += 1;
                    black_box(Config::sample(carrier.clone(), 0.5, seed).unwrap())
                })
            });
        }
    }
    g.finish();
}

fn labelling(c: &mut Criterion) {
    let mut g = c.benchmark_group("cluster");
    for n in [32i64, 128] {
        let carrier = Carrier::box_closure(LatticeSpec::triangular(), n).unwrap();
        let cfg = Config::sample(carrier, 0.5, 7).unwrap();
        let region = Region::Box { center: Site::origin(2), radius: n };
        g.throughput(Throughput::Elements(region.len() as u64));
        g.bench_with_input(BenchmarkId::new("label_clusters", n), &cfg, |b, cfg| {
            b.iter(|| black_box(label_clusters(cfg, &region).unwrap().largest()))
        });
        g.bench_with_input(BenchmarkId::new("largest_cluster_in_box", n), &cfg, |b, cfg| {
            b.iter(|| black_box(largest_cluster_in_box(cfg, n).unwrap()))
        });
    }
    let carrier = Carrier::box_closure(LatticeSpec::triangular(), 64).unwrap();
    let cfg = Config::sample(carrier, 0.5, 9).unwrap();
    g.bench_function("long_arm_size/32", |b| b.iter(|| black_box(long_arm_size(&cfg, 32).unwrap())));
    g.finish();
}

fn union_find(c: &mut Criterion) {
    let n = 1 << 16;
    let mut g = c.benchmark_group("disjoint_sets");
    g.throughput(Throughput::Elements(n as u64));
    g.bench_function("chain_unions_then_finds", |b| {
        b.iter(|| {
            let mut ds = DisjointSets::new(n);
            for i in 1..n as u32 {
                ds.union(i - 1, i);
            }
            let mut acc = 0u64;
            for i in 0..n as u32 {
                acc += ds.find(i) as u64;
            }
            black_box(acc)
        })
    });
    g.finish();
}

fn arm_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("pi_table");
    g.sample_size(10);
    let pairs = [(1, 8), (1, 16), (1, 32), (2, 32)];
    g.throughput(Throughput::Elements(200));
    g.bench_function("triangular_4_pairs_200_samples", |b| {
        b.iter(|| black_box(build_pi_table(LatticeSpec::triangular(), 0.5, &pairs, 200, 3).unwrap()))
    });
    g.finish();
}

fn blob_tree(c: &mut Criterion) {
    let inst = blob_instances(1, 200, 100);
    let mut g = c.benchmark_group("blob_tree");
    g.throughput(Throughput::Elements(inst.len() as u64));
    g.bench_function("grow_tree_and_blobs_200_sets", |b| {
        b.iter(|| {
            for pts in &inst {
                black_box(blobs(&grow_tree(pts).unwrap(), 100).unwrap());
            }
        })
    });
    g.finish();
}

fn gluing(c: &mut Criterion) {
    let (n, u) = (32i64, 2i64);
    let carrier = Carrier::box_closure(LatticeSpec::triangular(), percolab_core::lower::dn_carrier_radius(n, u)).unwrap();
    let mut seed = 0u64;
    c.bench_function("gluing_check/n32_u2", |b| {
        b.iter(|| {
            seed += 1;
            let cfg = Config::sample(carrier.clone(), 0.5, seed).unwrap();
            black_box(gluing_check(&cfg, n, u).unwrap())
        })
    });
}

criterion_group!(benches, sampling, labelling, union_find, arm_table, blob_tree, gluing);
criterion_main!(benches);
