use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use spectral_frames::filters::level_f;
use spectral_frames::kernel::kernel_on_nodes;
use spectral_frames::lattice::{build_cells, build_lattice};
use spectral_frames::spectral::{analyze, Point};
use spectral_frames::{make_filter_bank, solve_weights};
use spectral_frames_bench::{fine_sphere, parseval_frame, random_fn, sphere};

fn sphere_transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("sphere_transform");
    for l in [16usize, 32, 64] {
        let m = sphere(l);
        let f = random_fn(&m, m.lambda_max(), 1);
        let grid = f.to_grid();
        g.bench_with_input(BenchmarkId::new("synthesize", l), &f, |b, f| b.iter(|| black_box(f.to_grid())));
        g.bench_with_input(BenchmarkId::new("analyze", l), &grid, |b, grid| {
            b.iter(|| black_box(analyze(grid, m.lambda_max()).unwrap()))
        });
    }
    g.finish();
}

fn filters(c: &mut Criterion) {
    let bank = make_filter_bank(8).unwrap();
    let grid: Vec<f64> = (0..10_000).map(|i| i as f64 * 0.0256).collect();
    c.bench_function("filter_bank_partition_sum", |b| {
        b.iter(|| black_box(grid.iter().map(|&l| bank.partition_sum(l)).sum::<f64>()))
    });
}

fn lattice_and_cubature(c: &mut Criterion) {
    let m = fine_sphere(32);
    let mut g = c.benchmark_group("sphere_l32");
    g.sample_size(10);
    g.bench_function("lattice_r0.3", |b| b.iter(|| black_box(build_lattice(&m, 0.3, 1).unwrap())));
    let lat = build_lattice(&m, 0.3, 1).unwrap();
    g.bench_function("cells_r0.3", |b| b.iter(|| black_box(build_cells(&m, &lat))));
    let cells = build_cells(&m, &lat);
    g.bench_function("weights_w8", |b| {
        b.iter(|| black_box(solve_weights(&m, &lat, &cells, 8.0).unwrap()))
    });
    g.finish();
}

fn frames(c: &mut Criterion) {
    let m = fine_sphere(32);
    let frame = parseval_frame(&m, 4, 8.0);
    let f = random_fn(&m, 8.0, 2);
    let coeffs = frame.analysis(&f);
    let mut g = c.benchmark_group("parseval_l32_band8");
    g.bench_function("analysis", |b| b.iter(|| black_box(frame.analysis(&f))));
    g.bench_function("synthesis", |b| b.iter(|| black_box(frame.synthesis(&coeffs))));
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let m = sphere(128);
    let f1 = |l: f64| level_f(1, l);
    let x = Point::Sphere([0.0, 0.0, 1.0]);
    let mut g = c.benchmark_group("kernel_l128");
    g.sample_size(10);
    g.bench_function("on_nodes_t1/32", |b| {
        b.iter(|| black_box(kernel_on_nodes(&m, &f1, 1.0 / 32.0, &x).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, sphere_transforms, filters, lattice_and_cubature, frames, kernels);
criterion_main!(benches);
