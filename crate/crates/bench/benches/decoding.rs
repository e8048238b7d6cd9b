use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sumdec_bench::ngram_model;
use sumdec_core::decode::{batch_decode, decode, DecodeConfig, Method};

fn methods(c: &mut Criterion) {
    let model = ngram_model(500, 3, 2000, 1);
    let prompt = [1, 2, 3];
    let mut group = c.benchmark_group("decode");
    for (label, config) in [
        (
            "greedy",
            DecodeConfig {
                method: Method::Greedy,
                ..DecodeConfig::default()
            },
        ),
        ("beam10", DecodeConfig::default()),
        (
            "sample_top50",
            DecodeConfig {
                method: Method::Sample,
                top_k: Some(50),
                ..DecodeConfig::default()
            },
        ),
        (
            "sample_top_p",
            DecodeConfig {
                method: Method::Sample,
                top_p: Some(0.9),
                ..DecodeConfig::default()
            },
        ),
        (
            "beam10_sampled",
            DecodeConfig {
                top_k: Some(50),
                sample_within_beam: true,
                ..DecodeConfig::default()
            },
        ),
    ] {
        group.bench_function(label, |b| {
            b.iter(|| decode(&model, black_box(&prompt), &config).unwrap())
        });
    }
    group.finish();
}

fn beam_width(c: &mut Criterion) {
    let model = ngram_model(500, 3, 2000, 2);
    let mut group = c.benchmark_group("beam_width");
    for beam in [1, 5, 10, 20] {
        let config = DecodeConfig {
            beam_size: beam,
            ..DecodeConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(beam), &config, |b, config| {
            b.iter(|| decode(&model, black_box(&[4, 5]), config).unwrap())
        });
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let model = ngram_model(500, 3, 2000, 3);
    let prompts: Vec<Vec<u32>> = (0..64).map(|i| vec![i % 499, (i * 7) % 499]).collect();
    let config = DecodeConfig {
        max_length: 32,
        ..DecodeConfig::default()
    };
    c.bench_function("batch_decode/64", |b| {
        b.iter(|| batch_decode(&model, black_box(&prompts), &config))
    });
}

criterion_group!(benches, methods, beam_width, batch);
criterion_main!(benches);
