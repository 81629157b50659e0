use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hubbard_dots::measures::lbc_with;
use hubbard_dots::par::Execution;
use hubbard_dots::sweep::{run_sweep, Grid, MeasureSet, SweepConfig};
use hubbard_dots::{so_generators, HubbardParams, Spectrum};

fn executions() -> [(&'static str, Execution); 2] {
    [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ]
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_n3");
    group.sample_size(10);
    for (name, exec) in executions() {
        let mut cfg = SweepConfig::new(
            3,
            (1, 2),
            Grid::Linear {
                min: 0.0,
                max: 10.0,
                steps: 16,
            },
            Grid::Values(vec![0.0, 0.5, 1.0]),
        );
        cfg.measures = MeasureSet::ALL;
        cfg.workers = exec.is_sequential().then_some(1);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sweep(&cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_lbc(c: &mut Criterion) {
    let spec = Spectrum::solve(&HubbardParams::new(3, 2.0).unwrap()).unwrap();
    let pair = hubbard_dots::reduced_thermal_state(&spec, 0.7, 1e-9, &[0, 1]).unwrap();
    let gens = so_generators(4).unwrap();
    let mut group = c.benchmark_group("lbc_pair");
    for (name, exec) in executions() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| lbc_with(&pair.rho, &gens, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_lbc);
criterion_main!(benches);
