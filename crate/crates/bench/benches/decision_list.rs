use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sensecol::{extract_examples, extract_features, run_xval, train, FeatureKind, ProtocolConfig, DEFAULT_SMOOTHING};
use sensecol_bench::bench_corpus;

fn extraction(c: &mut Criterion) {
    let corpus = bench_corpus(500);
    let examples = extract_examples(&corpus, None);
    c.bench_function("extract_features/1000", |b| {
        b.iter(|| examples.iter().map(|e| extract_features(e).len()).sum::<usize>())
    });
}

fn training(c: &mut Criterion) {
    let kinds = FeatureKind::all();
    let mut group = c.benchmark_group("train");
    for n in [100, 400, 1600] {
        let corpus = bench_corpus(n);
        let examples = extract_examples(&corpus, Some("line.n"));
        group.bench_with_input(BenchmarkId::from_parameter(n), &examples, |b, ex| {
            b.iter(|| train(black_box(ex), &kinds, DEFAULT_SMOOTHING).unwrap())
        });
    }
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let corpus = bench_corpus(1000);
    let examples = extract_examples(&corpus, Some("line.n"));
    let dl = train(&examples, &FeatureKind::all(), DEFAULT_SMOOTHING).unwrap();
    let sets: Vec<_> = examples.iter().map(extract_features).collect();
    c.bench_function("predict/1000", |b| b.iter(|| sets.iter().filter(|f| dl.predict(f).sense().is_some()).count()));
}

fn xval(c: &mut Criterion) {
    let corpus = bench_corpus(300);
    let cfg = ProtocolConfig::default();
    let mut group = c.benchmark_group("xval");
    group.sample_size(10);
    group.bench_function("10fold/600", |b| b.iter(|| run_xval(black_box(&corpus), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, extraction, training, prediction, xval);
criterion_main!(benches);
