//! Parallel against sequential evaluation of the two heavy kernels.
//!
//! With the default `parallel` feature each kernel runs on the global rayon
//! pool and on a one-thread pool. Build with `--no-default-features` to time
//! the plain sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ac_duality::dynamics::{force_neutral_el, ChargeSource, ChargedParticle, DynConfig, NeutralParticle};
use ac_duality::fields::{ChargeLine, FieldSource, UnitSystem};
use ac_duality::geometry::{circle_path, Vec3};
use ac_duality::phase::{phase_along_path, Coupling, PhaseOptions};

fn line(length: f64) -> ChargeLine {
    ChargeLine::centered(1.0, Vec3::zeros(), Vec3::z(), length, 0.2).unwrap()
}

fn ac_phase(length: f64) -> f64 {
    let path = circle_path(&Vec3::zeros(), 1.0, 64, 1).unwrap();
    let source = FieldSource::FiniteChargeLine(line(length));
    phase_along_path(
        &path,
        &source,
        &UnitSystem::default(),
        &Coupling::Moment(Vec3::z()),
        &PhaseOptions::with_tol(1e-8),
    )
    .unwrap()
    .phase
}

fn line_force(sources: &[ChargeSource]) -> Vec3 {
    let cfg = DynConfig {
        charged: ChargedParticle {
            mass: 1.0,
            position: Vec3::new(-1.0, 0.0, 0.0),
            velocity: Vec3::zeros(),
            charge: 0.0,
        },
        neutral: NeutralParticle {
            mass: 1.0,
            position: Vec3::x(),
            velocity: Vec3::y(),
            moment: Vec3::x(),
        },
        units: UnitSystem::default(),
        eps_singular: 1e-9,
    };
    force_neutral_el(&cfg, sources).unwrap()
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, rayon::ThreadPool)> {
    let auto = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("rayon", auto), ("one-thread", single)]
}

#[cfg(feature = "parallel")]
fn in_mode<T: Send>(pool: &rayon::ThreadPool, f: impl FnOnce() -> T + Send) -> T {
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, ())> {
    vec![("sequential", ())]
}

#[cfg(not(feature = "parallel"))]
fn in_mode<T>(_: &(), f: impl FnOnce() -> T) -> T {
    f()
}

fn bench_phase(c: &mut Criterion) {
    let mut group = c.benchmark_group("ac_phase_finite_line");
    group.sample_size(10);
    for (name, pool) in modes() {
        for length in [100.0, 1000.0] {
            group.bench_with_input(BenchmarkId::new(name, length), &length, |b, &l| {
                b.iter(|| in_mode(&pool, || ac_phase(l)))
            });
        }
    }
    group.finish();
}

fn bench_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("el_force_line");
    for (name, pool) in modes() {
        for length in [1000.0, 10000.0] {
            let sources = ChargeSource::from_charge_line(&line(length));
            group.bench_with_input(BenchmarkId::new(name, length), &sources, |b, s| {
                b.iter(|| in_mode(&pool, || line_force(s)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_phase, bench_force);
criterion_main!(benches);
