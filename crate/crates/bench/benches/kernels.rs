//! Benchmarks of the hot numerical kernels: periodic quadrature over
//! the hidden-variable response, cascade integration, scalar
//! minimization, and the Bell operator norm.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use polarsim_core::bell::{bell_operator_norm, tensor_witness};
use polarsim_core::cascade::{hv_cascade, CascadeSpec, InputConvention};
use polarsim_core::numerics::{integrate_period, minimize_scalar};
use polarsim_core::{Angle, HvResponseParams, ResponseLaw};

fn bench_integrate_period(c: &mut Criterion) {
    let params = HvResponseParams::default();
    let law = ResponseLaw::HvStep(params);
    let alpha = std::f64::consts::FRAC_PI_4;
    c.bench_function("integrate_period/hv_two_integrand", |b| {
        b.iter(|| {
            integrate_period(
                |lam| {
                    law.evaluate(black_box(lam)).unwrap() * law.evaluate(lam - alpha).unwrap()
                },
                1e-10,
            )
            .unwrap()
        })
    });
}

fn bench_hv_cascade(c: &mut Criterion) {
    let law = ResponseLaw::hv_default();
    let axes: Vec<Angle> = [0.0, 30.0, 60.0, 90.0]
        .iter()
        .map(|&d| Angle::from_degrees(d).unwrap())
        .collect();
    let spec = CascadeSpec::new(
        axes,
        vec![law; 4],
        InputConvention::UnpolarizedUniformLambda,
    )
    .unwrap();
    c.bench_function("hv_cascade/4_polarizers", |b| {
        b.iter(|| hv_cascade(black_box(&spec), 1e-9).unwrap())
    });
}

fn bench_minimize_scalar(c: &mut Criterion) {
    c.bench_function("minimize_scalar/shifted_cosine", |b| {
        b.iter(|| {
            minimize_scalar(
                |x| (black_box(x) - 1.234).cos().powi(2),
                0.0,
                std::f64::consts::PI,
                1e-10,
            )
            .unwrap()
        })
    });
}

fn bench_bell_operator_norm(c: &mut Criterion) {
    let w = tensor_witness();
    c.bench_function("bell_operator_norm/dim_4", |b| {
        b.iter(|| bell_operator_norm(black_box(&w[0]), &w[1], &w[2], &w[3]).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_integrate_period,
    bench_hv_cascade,
    bench_minimize_scalar,
    bench_bell_operator_norm
);
criterion_main!(kernels);
