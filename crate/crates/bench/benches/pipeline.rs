use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vfix_bench::{listing_commit, synthetic_file, LISTING_AFTER, LISTING_BEFORE};
use vfix_core::callgraph::CallGraph;
use vfix_core::classifier::{Encoder, ReferenceEncoder};
use vfix_core::diff::diff;
use vfix_core::flow;
use vfix_core::pipeline::{build_context, ContextOptions};
use vfix_core::syntax::parse;

fn benches(c: &mut Criterion) {
    c.bench_function("parse listing", |b| b.iter(|| parse(black_box(LISTING_AFTER))));
    c.bench_function("diff listing", |b| b.iter(|| diff(black_box(LISTING_BEFORE), black_box(LISTING_AFTER))));

    let big = synthetic_file(200);
    let tree = parse(&big);
    c.bench_function("flow graphs 200 methods", |b| {
        b.iter(|| tree.methods.iter().map(|m| flow::build(&tree, m).len()).sum::<usize>())
    });
    c.bench_function("call graph 200 methods", |b| b.iter(|| CallGraph::build(&[black_box(&tree)])));

    let commit = listing_commit();
    let opts = ContextOptions::default();
    c.bench_function("context listing", |b| b.iter(|| build_context(black_box(&commit), &opts)));

    let enc = ReferenceEncoder::default();
    let text = build_context(&commit, &opts).document.text();
    c.bench_function("encode listing context", |b| b.iter(|| enc.encode(black_box(&text))));
}

criterion_group!(pipeline, benches);
criterion_main!(pipeline);
