use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use thetaquad::bounds::CertificateKind;
use thetaquad::builtin::Builtin;
use thetaquad::integrate::{composite_integrate_with, reference_integral_fn, PanelNorms};
use thetaquad::kernel::RuleSpec;
use thetaquad::rules::Integrand;
use thetaquad::sweep::{kernel_table, theta_grid, theta_sweep};
use thetaquad::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn oracle(c: &mut Criterion) {
    let f = Builtin::Sine { omega: 40.0 };
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("sin40_0_10", name), |b| {
            b.iter(|| reference_integral_fn(|x| f.value(x), 0.0, 10.0, 1e-13, exec).unwrap())
        });
    }
    g.finish();
}

fn composite(c: &mut Criterion) {
    let f = Builtin::Runge;
    let spec = RuleSpec::new(1.0 / 3.0, 4, -5.0, 5.0).unwrap();
    let mut g = c.benchmark_group("composite");
    g.sample_size(20);
    for panels in [64, 4096] {
        for (name, exec) in MODES {
            g.bench_function(BenchmarkId::new(format!("runge_sharp_even_{panels}"), name), |b| {
                b.iter(|| {
                    composite_integrate_with(
                        &f,
                        &spec,
                        black_box(panels),
                        CertificateKind::SharpEven,
                        &PanelNorms::Known(&f),
                        exec,
                    )
                    .unwrap()
                })
            });
        }
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let f = Builtin::Runge;
    let thetas = theta_grid(0.0, 0.005, 1.0).unwrap();
    let mut g = c.benchmark_group("theta_sweep");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("runge_n5_201", name), |b| {
            b.iter(|| theta_sweep(&f, 5, -1.0, 2.0, &thetas, 1e-12, exec).unwrap())
        });
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let specs: Vec<RuleSpec> = (1..=8)
        .flat_map(|n| {
            theta_grid(0.0, 0.01, 1.0)
                .unwrap()
                .into_iter()
                .map(move |t| RuleSpec::new(t, n, -1.0, 2.0).unwrap())
        })
        .collect();
    let mut g = c.benchmark_group("kernel_table");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("n1_8_808", name), |b| {
            b.iter(|| kernel_table(black_box(&specs), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, composite, sweep, kernels);
criterion_main!(benches);
