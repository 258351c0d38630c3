//! Data-parallel vs sequential throughput on the two hot grid workloads:
//! node-counting series evaluations and linear-gauge sweeps.
//!
//! `par::map` uses rayon under the default `parallel` feature; `par::map_seq`
//! is the sequential reference either way.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rug::{Float, Rational};

use anharm_core::big::bits_for_digits;
use anharm_core::gauge::sweep_linear_gauge;
use anharm_core::model::{parse_polynomial, validate_problem, GaugeFunction, Problem};
use anharm_core::par;
use anharm_core::series::{evaluate_series, InitialData, SeriesEngine};

fn quartic() -> Problem {
    validate_problem(
        parse_polynomial("x^2 + 0.1*x^4").unwrap(),
        Rational::from((1, 2)),
        Rational::from(1),
    )
    .unwrap()
}

fn bench_node_grid(c: &mut Criterion) {
    let digits = 60;
    let prec = bits_for_digits(digits);
    let problem = quartic();
    let gauge = GaugeFunction::linear(Float::with_val(prec, 1.26));
    let engine = SeriesEngine::new(&problem, &gauge, InitialData::even(prec), digits);
    let e = Float::with_val(prec, 1.0652855095437177);
    let (_, k) = engine.coefficients(&e, 320);
    let xs: Vec<Float> = (1..=192)
        .map(|i| Float::with_val(prec, i) * Float::with_val(prec, 6.0 / 192.0))
        .collect();

    let mut group = c.benchmark_group("node_grid_192pt_order320");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || xs.clone(),
            |xs| par::map(xs, |x| evaluate_series(&k, &x).value),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("sequential", |b| {
        b.iter_batched(
            || xs.clone(),
            |xs| par::map_seq(xs, |x| evaluate_series(&k, &x).value),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_gauge_sweep(c: &mut Criterion) {
    let digits = 40;
    let prec = bits_for_digits(digits);
    let problem = quartic();
    let x_max = Float::with_val(prec, 6);
    let e_ref = Float::with_val(prec, 1.0652855095437177f64);
    let a_values: Vec<f64> = (0..12).map(|i| 0.25 * i as f64).collect();

    let mut group = c.benchmark_group("gauge_sweep_12pt_order80");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            sweep_linear_gauge(&problem, &x_max, &a_values, 80, digits, 0, Some(&e_ref)).unwrap()
        })
    });
    // the sweep parallelizes through par::map internally; the sequential
    // reference maps the same single-point solver without rayon
    group.bench_function("sequential", |b| {
        b.iter(|| {
            par::map_seq(a_values.clone(), |a| {
                sweep_linear_gauge(&problem, &x_max, &[a], 80, digits, 0, Some(&e_ref)).unwrap()
            })
        })
    });
    group.finish();
}

criterion_group!(benches, bench_node_grid, bench_gauge_sweep);
criterion_main!(benches);
