use criterion::{criterion_group, criterion_main, Criterion};

use subshift::{
    compile_qipair_sft, decide_domino, emptiness_certificate, estimate_ends, Group, GroupSpec,
};
use subshift_bench::{all_pairs, alternating, free2, golden_mean, z2};

fn ends(c: &mut Criterion) {
    let f2 = free2();
    c.bench_function("ends/free2_r10", |b| {
        b.iter(|| estimate_ends(&f2, 2, 10).unwrap())
    });
}

fn domino(c: &mut Criterion) {
    let z = Group::integers();
    let gm = golden_mean(&z);
    c.bench_function("domino/z_golden_mean", |b| {
        b.iter(|| decide_domino(&gm, 100_000))
    });
    let alt = alternating(&z2());
    c.bench_function("domino/z2_alternating", |b| {
        b.iter(|| decide_domino(&alt, 100_000))
    });
    let empty = all_pairs(&free2());
    c.bench_function("domino/free2_all_pairs", |b| {
        b.iter(|| emptiness_certificate(&empty, 2, 100_000).unwrap())
    });
}

fn qipair(c: &mut Criterion) {
    let z = Group::integers();
    let c4 = Group::new(GroupSpec::finite_cyclic(4)).unwrap();
    let ps = compile_qipair_sft(&z, &c4, 1).unwrap();
    let mut g = c.benchmark_group("qipair");
    g.sample_size(10);
    g.bench_function("z_to_z4_certificate", |b| {
        b.iter(|| emptiness_certificate(&ps, 13, 2_000_000).unwrap())
    });
    g.finish();
}

criterion_group!(benches, ends, domino, qipair);
criterion_main!(benches);
