use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qnop::operators::PairTransformer;
use qnop::updates::{bfgs_inverse_update, lbfgs_direction};
use qnop::{CoefficientFamily, OperatorMode, Regularization, SecantPair, UpdateRule};
use qnop_bench::{quadratic_steps, update_fixture};
use std::hint::black_box;

fn dense_updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("update");
    for n in [10, 50] {
        let f = update_fixture(n, 7);
        for (name, rule) in [("bfgs", UpdateRule::bfgs()), ("dfp", UpdateRule::dfp()), ("psb", UpdateRule::psb()), ("bgm", UpdateRule::bgm())] {
            group.bench_with_input(BenchmarkId::new(name, n), &f, |bench, f| {
                bench.iter(|| rule.apply(black_box(&f.b), black_box(&f.pair)).unwrap())
            });
        }
        group.bench_with_input(BenchmarkId::new("bfgs-inverse", n), &f, |bench, f| {
            bench.iter(|| bfgs_inverse_update(black_box(&f.h), black_box(&f.pair)).unwrap())
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection");
    let n = 50;
    let steps = quadratic_steps(n, 8, 3);
    for d in [1, 3, 5] {
        let mode = OperatorMode::NormalEqProjection {
            d,
            regularization: Regularization::Fixed(0.0),
            family: CoefficientFamily::Broyden,
            discard_tol: 1e-8,
        };
        group.bench_with_input(BenchmarkId::new("normal-equations", d), &mode, |bench, mode| {
            bench.iter(|| {
                let mut t = PairTransformer::new(mode);
                for (s, y) in &steps {
                    black_box(t.transform(s, y));
                }
            })
        });
        let gs = OperatorMode::GramSchmidt { d, family: CoefficientFamily::Broyden, classical: false };
        group.bench_with_input(BenchmarkId::new("gram-schmidt", d), &gs, |bench, mode| {
            bench.iter(|| {
                let mut t = PairTransformer::new(mode);
                for (s, y) in &steps {
                    black_box(t.transform(s, y));
                }
            })
        });
    }
    group.finish();
}

fn two_loop(c: &mut Criterion) {
    let n = 50;
    let hist: Vec<SecantPair> = quadratic_steps(n, 10, 5).into_iter().map(|(s, y)| SecantPair::raw(s, y)).collect();
    let g = quadratic_steps(n, 1, 99).remove(0).0;
    c.bench_function("lbfgs-two-loop/10", |bench| bench.iter(|| lbfgs_direction(black_box(&hist), black_box(&g), 1.0)));
}

criterion_group!(benches, dense_updates, projections, two_loop);
criterion_main!(benches);
