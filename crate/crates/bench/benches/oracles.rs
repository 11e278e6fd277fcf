use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tailscore::estimation::m_estimate;
use tailscore::grid::{Axis, Grid};
use tailscore::risk::{es, expectile};
use tailscore::scoring::{expected_score, fz_score_default};
use tailscore::verification::{certify_consistency, quantile_claim, Family};
use tailscore::{DiscreteDistribution, Level};

fn lvl(p: f64) -> Level {
    Level::new(p).unwrap()
}

fn measures(c: &mut Criterion) {
    let f = DiscreteDistribution::from_quantile_fn(10_000, |u| u * u).unwrap();
    c.bench_function("es_10k", |b| b.iter(|| es(black_box(&f), lvl(0.9))));
    c.bench_function("expectile_10k", |b| {
        b.iter(|| expectile(black_box(&f), lvl(0.9)))
    });
    c.bench_function("tail_10k", |b| b.iter(|| black_box(&f).tail(lvl(0.5))));
}

fn scores(c: &mut Criterion) {
    let f = Family::new(1, 1).member(0).unwrap();
    let s = fz_score_default(lvl(0.5));
    c.bench_function("expected_fz", |b| {
        b.iter(|| expected_score(&s, black_box(&[2.0, 3.5]), &f).unwrap())
    });

    let mut g = c.benchmark_group("m_estimate_fz");
    let ys: Vec<f64> = (0..200).map(|i| (i % 17) as f64 * 0.5).collect();
    for step in [0.2, 0.1] {
        let grid = Grid::cube(Axis::new(0.0, 10.0, step).unwrap(), 2).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(step), &grid, |b, grid| {
            b.iter(|| m_estimate(&s, &ys, grid).unwrap())
        });
    }
    g.finish();
}

fn certification(c: &mut Criterion) {
    let p = lvl(0.5);
    let family = Family::new(7, 5).conditioned(p).generate().unwrap();
    let grid = Grid::cube(Axis::new(0.0, 10.0, 0.1).unwrap(), 2).unwrap();
    let s = fz_score_default(p);
    let t = |f: &DiscreteDistribution| {
        let e = es(f, p);
        Ok(vec![quantile_claim(f, p), (e, e)])
    };
    let mut g = c.benchmark_group("certify");
    g.sample_size(10);
    g.bench_function("fz_5_dists", |b| {
        b.iter(|| certify_consistency(&s, &t, &family, &grid).unwrap())
    });
    g.finish();
}

criterion_group!(benches, measures, scores, certification);
criterion_main!(benches);
