use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use dispwave2d::evolution::{make_spectral_grid, SpectralProfile};
use dispwave2d::freewave::free_sine_apply;
use dispwave2d::resolvent::invert_ut;
use dispwave2d::{hankel0, HankelBranch};
use dispwave2d_bench::{bump_potential, free_setup, leapfrog};

fn hankel(c: &mut Criterion) {
    let mut g = c.benchmark_group("hankel0");
    for rho in [0.5, 6.0, 15.0, 60.0] {
        g.bench_with_input(BenchmarkId::from_parameter(rho), &rho, |b, &r| {
            b.iter(|| hankel0(HankelBranch::Plus, black_box(r)).unwrap())
        });
    }
    g.finish();
}

fn resolvent(c: &mut Criterion) {
    let mut g = c.benchmark_group("invert_ut");
    for h in [0.2, 0.1] {
        let pot = bump_potential(h);
        g.bench_with_input(BenchmarkId::new("nodes", pot.grid().len()), &pot, |b, p| {
            b.iter(|| invert_ut(black_box(2.0), p).unwrap())
        });
    }
    g.finish();
}

fn free_sine(c: &mut Criterion) {
    let (src, f, obs) = free_setup(0.2);
    c.bench_function("free_sine_apply/t=1", |b| b.iter(|| free_sine_apply(black_box(1.0), &src, &f, &obs).unwrap()));
}

fn synthesis(c: &mut Criterion) {
    let (src, f, obs) = free_setup(0.2);
    let pot = bump_potential(0.2);
    let sg = make_spectral_grid(12.5, 256, 8).unwrap();
    let mut g = c.benchmark_group("spectral_profile");
    g.sample_size(10);
    g.bench_function("build/256", |b| b.iter(|| SpectralProfile::build(&pot, &src, &f, &obs, &sg, false).unwrap()));
    g.finish();
}

fn fdtd_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("leapfrog_step");
    for n in [101, 201] {
        let mut lf = leapfrog(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| lf.advance(None).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, hankel, resolvent, free_sine, synthesis, fdtd_step);
criterion_main!(benches);
