use criterion::{criterion_group, criterion_main, Criterion};

use condcop::{
    bootstrap_pvalue, cv_copula, fit_margins, generate_dataset, log_spaced, BandwidthChoice,
    CensoringLevel, CensoringScheme, CopulaFamily, CopulaSample, GlrSetup, LocalFitConfig,
    MarginKind, MarginSpec, RandomStream, Scenario, TauShape,
};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let build = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    vec![("sequential", build(1)), ("parallel", build(0))]
}

fn data() -> Vec<condcop::Observation> {
    let s = Scenario {
        tau_shape: TauShape::Convex,
        family: CopulaFamily::Clayton,
        n: 250,
        censoring: CensoringLevel::Low,
        margin_kind: MarginKind::Weibull,
        seed: 1,
    };
    generate_dataset(&s, &mut RandomStream::new(1)).unwrap()
}

fn bench_cv(c: &mut Criterion) {
    let data = data();
    let margins = fit_margins(&data, &MarginSpec::Weibull).unwrap();
    let sample = CopulaSample::from_margins(&data, &margins).unwrap();
    let grid = log_spaced(0.3, 3.0, 6);
    let template = LocalFitConfig::new(CopulaFamily::Clayton, 1.0);
    let mut group = c.benchmark_group("cv_copula");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| cv_copula(&sample, &template, &grid).unwrap()))
        });
    }
    group.finish();
}

fn bench_bootstrap(c: &mut Criterion) {
    let data = data();
    let setup = GlrSetup {
        local: LocalFitConfig::new(CopulaFamily::Clayton, 0.75),
        margins: MarginSpec::Weibull,
        scheme: CensoringScheme::Univariate,
        replicates: 20,
        seed: 3,
    };
    let choice = BandwidthChoice::fixed(0.75, None);
    let mut group = c.benchmark_group("bootstrap_pvalue");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| bootstrap_pvalue(&data, &setup, &choice).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cv, bench_bootstrap);
criterion_main!(benches);
