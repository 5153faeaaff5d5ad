use criterion::{black_box, criterion_group, criterion_main, Criterion};
use potkit::fields::riesz_measure;
use potkit::green::green_ball;
use potkit::kernels::{k_eval, riesz_kernel};
use potkit::potentials::potential;
use potkit::{GridDomain, KernelConfig, Measure, Point, ScalarField};

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernels");
    for q in [-1.0, 0.0, 1.0] {
        g.bench_function(format!("k_eval q={q}"), |b| {
            b.iter(|| k_eval(black_box(q), black_box(1.7)))
        });
    }
    for d in [2usize, 3] {
        let cfg = KernelConfig::new(d).unwrap();
        let (x, y) = (Point::unit(d, 0), Point::unit(d, 1) * 0.5);
        g.bench_function(format!("riesz_kernel d={d}"), |b| {
            b.iter(|| riesz_kernel(cfg, black_box(&x), black_box(&y)))
        });
    }
    g.finish();
}

fn potentials(c: &mut Criterion) {
    let mu = Measure::dirac(Point::xy(0.1, 0.0))
        .plus(&Measure::sphere_uniform(Point::xy(0.0, 0.0), 0.5, 1.0))
        .plus(&Measure::ball_uniform(Point::xy(-0.2, 0.3), 0.3, 2.0));
    let pt = potential(&mu, KernelConfig::new(2).unwrap()).unwrap();
    let y = Point::xy(0.7, -0.4);
    c.bench_function("potential eval (3 components)", |b| {
        b.iter(|| pt.eval(black_box(&y)))
    });
    let green = green_ball(Point::xy(0.0, 0.0), 1.0, Point::xy(0.2, 0.1)).unwrap();
    c.bench_function("green_ball eval", |b| b.iter(|| green.eval(black_box(&y))));
}

fn riesz(c: &mut Criterion) {
    let v = ScalarField::on_space(2, |x| x.norm_sq() + x[0] * x[1]);
    let grid = GridDomain::centered_box(Point::xy(0.0, 0.0), 1.0, 128).unwrap();
    c.bench_function("riesz_measure 128x128", |b| {
        b.iter(|| riesz_measure(black_box(&v), &grid).unwrap())
    });
}

criterion_group!(benches, kernels, potentials, riesz);
criterion_main!(benches);
