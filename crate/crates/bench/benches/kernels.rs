use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ibstab::harness::{Init, SimConfig, Simulation};
use ibstab::kernel::phi_hat;
use ibstab::spectral::{dft3_with, Fft3};
use ibstab::stability::{c_surface_membrane, c_surface_target, Mode};
use ibstab::{Grid, LagrangianSheet, Stencil, StokesSolver, VectorField};

fn wavy(grid: Grid) -> VectorField {
    VectorField::from_fn(grid, |i, j, k| {
        let s = (i + 2 * j + 3 * k) as f64;
        [s.sin(), (0.5 * s).cos(), (0.3 * s).sin()]
    })
}

fn fluid(c: &mut Criterion) {
    for n in [16, 32] {
        let grid = Grid::new(n, 1.0).unwrap();
        let u = wavy(grid);
        let mut fft = Fft3::new(n).unwrap();
        c.bench_function(&format!("dft3 N={n}"), |b| {
            b.iter(|| dft3_with(&mut fft, black_box(&u)).unwrap())
        });
        let mut solver = StokesSolver::new(grid, 1.0, 0.01).unwrap();
        let mut state = solver.state(u.clone()).unwrap();
        let f = wavy(grid);
        c.bench_function(&format!("stokes step N={n}"), |b| {
            b.iter(|| solver.step(&mut state, Some(black_box(&f)), 1e-3).unwrap())
        });
    }
}

fn coupling(c: &mut Criterion) {
    let sheet = LagrangianSheet::new(32, 2, 1.0, [0.1, 0.2, 0.3]).unwrap();
    let grid = sheet.grid().unwrap();
    let stencil = Stencil::at_targets(&sheet).unwrap();
    let u = wavy(grid);
    let forces = vec![[1.0, -0.5, 0.25]; sheet.len()];
    c.bench_function("spread N=32 P=2", |b| {
        b.iter(|| stencil.spread(black_box(&forces), sheet.hb()).unwrap())
    });
    c.bench_function("interpolate N=32 P=2", |b| {
        b.iter(|| stencil.interpolate(black_box(&u)).unwrap())
    });
    c.bench_function("stencil at positions N=32 P=2", |b| {
        b.iter(|| Stencil::at_positions(grid, black_box(&sheet.x0)))
    });
}

fn stability(c: &mut Criterion) {
    c.bench_function("phi_hat quadrature", |b| {
        b.iter(|| phi_hat(black_box(37.5)))
    });
    c.bench_function("phi_hat asymptotic", |b| {
        b.iter(|| phi_hat(black_box(1234.5)))
    });
    c.bench_function("membrane surface N=32 P=2", |b| {
        b.iter(|| c_surface_membrane(32, 2, Mode::BandLimited, [0.0; 3]).unwrap())
    });
    let mut g = c.benchmark_group("exact");
    g.sample_size(10);
    g.bench_function("target surface N=16 P=2", |b| {
        b.iter(|| c_surface_target(16, 2, [0.3, 0.7, 0.2], Mode::Exact).unwrap())
    });
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let cfg = SimConfig {
        n: 16,
        init: Init::Gaussian {
            amplitude: 1.0,
            seed: 1,
        },
        ..SimConfig::default()
    };
    let mut sim = Simulation::new(&cfg).unwrap();
    c.bench_function("leapfrog step N=16 P=2", |b| {
        b.iter(|| sim.advance().unwrap())
    });
}

criterion_group!(benches, fluid, coupling, stability, simulation);
criterion_main!(benches);
