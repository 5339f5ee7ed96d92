//! Criterion benchmarks for the main pipeline stages: QMI assembly,
//! balancing, member projection/lifting, and H-infinity evaluation.

use criterion::{criterion_group, criterion_main, Criterion};
use gbt_core::balancing::{balance_from_gramians, build_reduction_setup};
use gbt_core::bounds::hinf_norm;
use gbt_core::data::{build_n, draw_noise, benchmark_input, simulate, NoiseModel};
use gbt_core::linalg::SymMatrix;
use gbt_core::oracle::{builtin_true_system, ordinary_gramians};
use gbt_core::qmi::QmiSet;
use gbt_core::Dims;
use std::hint::black_box;

fn benchmark_data() -> (QmiSet, Dims) {
    let sys = builtin_true_system();
    let l = 200;
    let sigma = 0.01;
    let draw = draw_noise(sys.n(), sys.p(), l, sigma, 1.35, 0).unwrap();
    let u = benchmark_input(l);
    let traj = simulate(&sys, &u, &draw.x0, &draw.w, &draw.z).unwrap();
    let noise = NoiseModel::diagonal(sys.n() + sys.p(), l, 1.35 * sigma * sigma).unwrap();
    let n_set = build_n(&traj, &noise).unwrap();
    (n_set, Dims::new(sys.n(), sys.m(), sys.p()))
}

fn bench_build_n(c: &mut Criterion) {
    let sys = builtin_true_system();
    let l = 200;
    let sigma = 0.01;
    let draw = draw_noise(sys.n(), sys.p(), l, sigma, 1.35, 0).unwrap();
    let u = benchmark_input(l);
    let traj = simulate(&sys, &u, &draw.x0, &draw.w, &draw.z).unwrap();
    let noise = NoiseModel::diagonal(sys.n() + sys.p(), l, 1.35 * sigma * sigma).unwrap();
    c.bench_function("build_n_L200", |b| {
        b.iter(|| build_n(black_box(&traj), black_box(&noise)).unwrap())
    });
}

fn bench_balancing(c: &mut Criterion) {
    let sys = builtin_true_system();
    let gram = ordinary_gramians(&sys).unwrap();
    // Shift slightly so the Gramians are strictly positive definite.
    let bump = |g: &SymMatrix| {
        SymMatrix::symmetrize(
            &(g.as_mat() + 1e-9 * nalgebra::DMatrix::identity(g.dim(), g.dim())),
        )
    };
    let p = bump(&gram.p0);
    let q = bump(&gram.q0);
    c.bench_function("balance_from_gramians_n6", |b| {
        b.iter(|| balance_from_gramians(black_box(&p), black_box(&q)).unwrap())
    });
}

fn bench_project_lift(c: &mut Criterion) {
    let (n_set, dims) = benchmark_data();
    let sys = builtin_true_system();
    let gram = ordinary_gramians(&sys).unwrap();
    let bump = |g: &SymMatrix| {
        SymMatrix::symmetrize(
            &(g.as_mat() + 1e-6 * nalgebra::DMatrix::identity(g.dim(), g.dim())),
        )
    };
    let bal = balance_from_gramians(&bump(&gram.p0), &bump(&gram.q0)).unwrap();
    let setup = build_reduction_setup(&n_set, &bal, 3, &dims).unwrap();
    let z = n_set.center().unwrap();
    let z_hat = setup.proj.w.transpose() * &z * &setup.proj.v;
    c.bench_function("project_and_lift_r3", |b| {
        b.iter(|| {
            let zh = setup.proj.w.transpose() * black_box(&z) * &setup.proj.v;
            black_box(zh);
            n_set
                .lift(&setup.nred, &setup.proj, black_box(&z_hat))
                .unwrap()
        })
    });
}

fn bench_hinf(c: &mut Criterion) {
    let sys = builtin_true_system();
    c.bench_function("hinf_norm_n6_tol1e-6", |b| {
        b.iter(|| hinf_norm(black_box(&sys), 1e-6).unwrap())
    });
}

criterion_group!(
    benches,
    bench_build_n,
    bench_balancing,
    bench_project_lift,
    bench_hinf
);
criterion_main!(benches);
