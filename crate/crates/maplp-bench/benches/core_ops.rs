use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use maplp_core::hypersites::{Hypersite, HypersiteSet};
use maplp_core::oracle::{enumerate_modes, generate_instance, Family, DEFAULT_ENUMERATION_CAP};
use maplp_core::orthomarginal::{project, DenseFunction};
use maplp_core::relaxation::{build_pseudo_delta_emin, build_pseudo_emin};
use maplp_core::scalar::{Rat, Scalar};

fn bench_projection(c: &mut Criterion) {
    let n = 10;
    let values: Vec<Rat> = (0..1 << n).map(|i| Rat::from_int((i % 17) as i64 - 8)).collect();
    let f = DenseFunction::new(n, 2, values).unwrap();
    let scopes = HypersiteSet::from_members(
        (1..n).map(|i| Hypersite::new(vec![i, i + 1]).unwrap()).collect(),
    );
    c.bench_function("project_chain10_l2", |b| {
        b.iter(|| project(black_box(&f), black_box(&scopes)).unwrap())
    });
}

fn bench_lp_solves(c: &mut Criterion) {
    let grid = generate_instance(Family::Grid3x3, 7, 0, (0, 9)).merge_to_frontier();
    c.bench_function("pseudo_min_grid3x3_rational", |b| {
        b.iter(|| {
            let (lp, _) = build_pseudo_emin(black_box(&grid)).unwrap();
            lp.solve().unwrap()
        })
    });
    c.bench_function("pseudo_delta_grid3x3_rational", |b| {
        b.iter(|| {
            let (lp, _) = build_pseudo_delta_emin(black_box(&grid)).unwrap();
            lp.solve().unwrap()
        })
    });
}

fn bench_enumeration(c: &mut Criterion) {
    let m = generate_instance(Family::Hypergraph, 5, 2, (0, 9));
    c.bench_function("enumerate_modes_hypergraph", |b| {
        b.iter(|| enumerate_modes(black_box(&m), DEFAULT_ENUMERATION_CAP).unwrap())
    });
}

criterion_group!(benches, bench_projection, bench_lp_solves, bench_enumeration);
criterion_main!(benches);
