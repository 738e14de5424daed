use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use indep_core::euclidean::{ip_estimate_torus, TorusGrid};
use indep_core::spherical::{ip_estimate_sphere, SphereRegion};
use indep_core::{Configuration, RandomSource};

const SAMPLES: u64 = 200_000;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn torus(c: &mut Criterion) {
    let src = RandomSource::new(1);
    let f = TorusGrid::random_blobs(2, 1.0, 256, 40, 0.02, 0.06, &src).unwrap();
    let p = Configuration::from_points("pair", vec![vec![0.0, 0.0], vec![0.2, 0.0]]).unwrap();
    let mut group = c.benchmark_group("ip_estimate_torus");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &pool, |b, pool| {
            b.iter(|| pool.install(|| ip_estimate_torus(&f, &p, SAMPLES, &src).unwrap()))
        });
    }
    group.finish();
}

fn sphere(c: &mut Criterion) {
    let src = RandomSource::new(2);
    let region = SphereRegion::cap(2, vec![0.0, 0.0, 1.0], 1.2).unwrap();
    let p = Configuration::from_points("e1e2", vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
    let mut group = c.benchmark_group("ip_estimate_sphere");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &pool, |b, pool| {
            b.iter(|| pool.install(|| ip_estimate_sphere(&region, &p, SAMPLES, &src).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, torus, sphere);
criterion_main!(benches);
