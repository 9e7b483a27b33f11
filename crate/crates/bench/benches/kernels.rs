use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multisense_bench::recovery_instance;
use multisense_core::{
    aric_exhaustive, gamma_identical, solve_bpdn, BasisKind, DVector, ProfileFamily, ProfileSet,
    SolverConfig, UnitaryBasis, C64,
};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesis");
    for kind in BasisKind::ALL {
        let u = UnitaryBasis::new(kind, 1024).unwrap();
        let x = DVector::from_fn(1024, |i, _| C64::new((i as f64).sin(), 0.0));
        group.bench_with_input(BenchmarkId::from_parameter(kind), &x, |b, x| {
            b.iter(|| u.apply(x).unwrap())
        });
    }
    group.finish();
}

fn constants(c: &mut Criterion) {
    let u = UnitaryBasis::new(BasisKind::Cosine, 256).unwrap();
    u.matrix();
    let p = ProfileSet::family(ProfileFamily::Banded, 16, 256, 0, false).unwrap();
    c.bench_function("gamma_identical/banded-16/n256", |b| {
        b.iter(|| gamma_identical(&p, &u).unwrap())
    });
}

fn aric(c: &mut Criterion) {
    let (a, _) = recovery_instance(24, 12, 1, 3);
    c.bench_function("aric_exhaustive/24x12/s3", |b| {
        b.iter(|| aric_exhaustive(&a, 3).unwrap())
    });
}

fn recovery(c: &mut Criterion) {
    let (a, y) = recovery_instance(128, 64, 8, 5);
    let cfg = SolverConfig::default();
    c.bench_function("solve_bpdn/64x128/s8", |b| {
        b.iter(|| solve_bpdn(&a, &y, &cfg).unwrap())
    });
}

criterion_group!(benches, transforms, constants, aric, recovery);
criterion_main!(benches);
