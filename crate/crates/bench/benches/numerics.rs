use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mhtlab_bench::{params_with_s, seeds, weak_allee};
use mhtlab_core::{
    basin_map, collapse_threshold, detect_attractor, hopf_locus, integrate, interior_equilibria,
    nondimensionalize, CollapseOptions, DetectBudget, DimensionalParams, GridSpec, HopfOptions,
    IntegrateOptions, ModelVariant,
};

fn equilibria(c: &mut Criterion) {
    let strong = nondimensionalize(&DimensionalParams::default()).unwrap();
    let weak = nondimensionalize(&weak_allee()).unwrap();
    c.bench_function("interior_equilibria/strong", |b| {
        b.iter(|| interior_equilibria(ModelVariant::MhtAllee, black_box(&strong)).unwrap())
    });
    c.bench_function("interior_equilibria/weak", |b| {
        b.iter(|| interior_equilibria(ModelVariant::MhtAllee, black_box(&weak)).unwrap())
    });
    c.bench_function("interior_equilibria/allee_altfood", |b| {
        b.iter(|| interior_equilibria(ModelVariant::MhtAlleeAltFood, black_box(&strong)).unwrap())
    });
}

fn trajectories(c: &mut Criterion) {
    let p = params_with_s(0.5);
    let opts = IntegrateOptions::default();
    c.bench_function("integrate/mht_t200", |b| {
        b.iter(|| integrate(ModelVariant::Mht, &p, black_box(seeds()[0]), 200.0, &opts).unwrap())
    });
    let p = DimensionalParams::default();
    let budget = DetectBudget::default();
    c.bench_function("detect_attractor/allee", |b| {
        b.iter(|| {
            for ic in seeds() {
                black_box(detect_attractor(ModelVariant::MhtAllee, &p, ic, &budget).unwrap());
            }
        })
    });
}

fn loci(c: &mut Criterion) {
    let p = DimensionalParams::default();
    let mut group = c.benchmark_group("loci");
    group.sample_size(10);
    group.bench_function("hopf_locus/mht", |b| {
        b.iter(|| {
            hopf_locus(
                ModelVariant::Mht,
                &p,
                (100.0, 2000.0),
                &HopfOptions::default(),
            )
            .unwrap()
        })
    });
    group.bench_function("collapse_threshold/allee", |b| {
        b.iter(|| {
            collapse_threshold(ModelVariant::MhtAllee, &p, &CollapseOptions::default()).unwrap()
        })
    });
    group.bench_function("basin_map/allee_altfood_16", |b| {
        b.iter(|| {
            basin_map(
                ModelVariant::MhtAlleeAltFood,
                &p,
                &GridSpec::square(16),
                &DetectBudget::default(),
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, equilibria, trajectories, loci);
criterion_main!(benches);
