use criterion::{black_box, criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use duplex_bench::{cohort, noisy_reply, transcripts};
use duplex_core::annotate::{annotate_document, detect_overlaps};
use duplex_core::attributes::bucketize_cohort;
use duplex_core::gateway::extract_trailing_json;
use duplex_core::{PipelineConfig, SpeakerId};

fn segmentation(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let docs = transcripts(20);
    let words: usize = docs.iter().flat_map(|d| d.channels.iter()).map(|ch| ch.words.len()).sum();
    let mut g = c.benchmark_group("segment_and_label");
    g.throughput(Throughput::Elements(words as u64));
    g.bench_function("20_conversations", |b| {
        b.iter(|| docs.iter().map(|d| annotate_document(black_box(d), &cfg).responses.len()).sum::<usize>())
    });
    g.finish();
}

fn overlaps(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let conv = annotate_document(&transcripts(1)[0], &cfg);
    let side = |s: SpeakerId| conv.responses.iter().filter(|r| r.speaker == s).cloned().collect::<Vec<_>>();
    let (a, b) = (side(SpeakerId::A), side(SpeakerId::B));
    c.bench_function("detect_overlaps", |bch| bch.iter(|| detect_overlaps(black_box(&a), black_box(&b), cfg.min_overlap())));
}

fn bucketing(c: &mut Criterion) {
    let mut g = c.benchmark_group("bucketize_cohort");
    for n in [10u64, 100] {
        let rows = cohort(n);
        g.bench_with_input(BenchmarkId::from_parameter(rows.len()), &rows, |b, rows| {
            b.iter(|| bucketize_cohort(black_box(rows), 0.8, 1.2).unwrap())
        });
    }
    g.finish();
}

fn extraction(c: &mut Criterion) {
    let mut g = c.benchmark_group("extract_trailing_json");
    for lines in [10usize, 200] {
        let reply = noisy_reply(lines);
        g.throughput(Throughput::Bytes(reply.len() as u64));
        g.bench_with_input(BenchmarkId::from_parameter(lines), &reply, |b, r| {
            b.iter_batched(|| r.as_str(), |r| extract_trailing_json(r).unwrap(), BatchSize::SmallInput)
        });
    }
    g.finish();
}

criterion_group!(benches, segmentation, overlaps, bucketing, extraction);
criterion_main!(benches);
