use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qtbattery::dynamics::{effective_battery_generator, lindblad_rhs, propagate, uniform_grid};
use qtbattery::numerics::hermitian_eigh;
use qtbattery::observables::ergotropy;
use qtbattery::protocol::{charge, ChargePlan, Engine};
use qtbattery::{ComplexMatrix, DensityMatrix, Tolerances, C64};
use qtbattery_bench::{composite_fixture, uniform_setup};

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lindblad_rhs");
    for n in [10, 50] {
        let (gen, rho) = composite_fixture(n);
        let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
        group.bench_with_input(BenchmarkId::new("apply", n), &n, |bench, _| bench.iter(|| gen.apply(black_box(rho.matrix()), &mut out)));
        group.bench_with_input(BenchmarkId::new("apply_hermitian", n), &n, |bench, _| {
            bench.iter(|| gen.apply_hermitian(black_box(rho.matrix()), &mut out))
        });
        group.bench_with_input(BenchmarkId::new("checked", n), &n, |bench, _| bench.iter(|| lindblad_rhs(&gen, black_box(&rho)).unwrap()));
    }
    group.finish();
}

fn eigen(c: &mut Criterion) {
    let d = 51;
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        let x = ((i * 31 + j * 17) % 13) as f64 / 13.0;
        let y = ((i * 7 + j * 3) % 11) as f64 / 11.0;
        C64::new(x + if i == j { i as f64 } else { 0.0 }, y)
    });
    let h = (&m + &m.adjoint()).scale_real(0.5);
    c.bench_function("hermitian_eigh_51", |b| b.iter(|| hermitian_eigh(black_box(&h)).unwrap()));

    let (battery, _) = uniform_setup(50);
    let sq = &h * &h;
    let dense = DensityMatrix::new(sq.scale_real(1.0 / sq.trace().re)).unwrap();
    c.bench_function("ergotropy_dense_51", |b| b.iter(|| ergotropy(black_box(&dense), &battery).unwrap()));
}

fn effective(c: &mut Criterion) {
    let (b, ch) = uniform_setup(50);
    let gen = effective_battery_generator(&b, &ch).unwrap();
    let rho0 = DensityMatrix::pure_level(51, 0).unwrap();
    let grid = uniform_grid(3000.0 / ch.rates().eg, 400).unwrap();
    let mut group = c.benchmark_group("effective_propagation");
    group.sample_size(10);
    group.bench_function("populations_n50", |bench| bench.iter(|| propagate(&gen, &rho0, &grid, Tolerances::default()).unwrap()));
    let plan = ChargePlan { engine: Engine::Effective, t_grid: grid.clone(), quench_times: vec![], tolerances: Tolerances::default() };
    group.bench_function("charge_n50", |bench| bench.iter(|| charge(&b, &ch, &rho0, &plan).unwrap()));
    group.finish();
}

criterion_group!(benches, rhs, eigen, effective);
criterion_main!(benches);
