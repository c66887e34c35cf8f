use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use twophase::femspace::{assemble_divergence, assemble_viscous, FeSystem};
use twophase::scheme::{build_step_system, solve_state, Physics, StepSolver};
use twophase_bench::{ellipse_mesh, ellipse_state};

const PHYSICS: Physics = Physics { nu_minus: 1.0, nu_plus: 1.0 };

fn mesh_generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("mesh");
    for h in [0.1, 0.05] {
        g.bench_with_input(BenchmarkId::new("generate_and_curve", h), &h, |b, &h| b.iter(|| ellipse_mesh(black_box(h), 2)));
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    for h in [0.1, 0.05] {
        let mesh = ellipse_mesh(h, 2);
        let fe = FeSystem::new(&mesh);
        g.bench_with_input(BenchmarkId::new("viscous", h), &h, |b, _| b.iter(|| assemble_viscous(&mesh, &fe, 1.0, 2.0)));
        g.bench_with_input(BenchmarkId::new("divergence", h), &h, |b, _| b.iter(|| assemble_divergence(&mesh, &fe)));
        let state = ellipse_state(h, 2);
        g.bench_with_input(BenchmarkId::new("step_system", h), &h, |b, &h| {
            b.iter(|| build_step_system(&state, &PHYSICS, 0.25 * h * h).expect("assembly"))
        });
    }
    g.finish();
}

fn time_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    g.sample_size(10);
    for h in [0.1, 0.05] {
        let tau = 0.25 * h * h;
        g.bench_with_input(BenchmarkId::new("solve_warm", h), &h, |b, &h| {
            let mut state = ellipse_state(h, 2);
            let mut solver = StepSolver::new();
            solve_state(&mut state, &PHYSICS, tau, &mut solver).expect("first solve");
            b.iter(|| solve_state(&mut state, &PHYSICS, tau, &mut solver).expect("solve"))
        });
    }
    g.finish();
}

criterion_group!(benches, mesh_generation, assembly, time_step);
criterion_main!(benches);
