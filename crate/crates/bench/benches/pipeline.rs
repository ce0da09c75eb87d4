use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use gridqa_bench::episode;
use gridqa_core::query::{sample_query, QueryParams};
use gridqa_core::rng::sample_rng;
use gridqa_core::{execute, generate_sample, make_shape, render_relational_context, render_text_context};
use gridqa_core::{GenConfig, QueryClass, ScenePools, Shape, ShapeSize};

fn bench_sample(c: &mut Criterion) {
    let config = GenConfig::default();
    let pools = ScenePools::default();
    let mut i = 0u64;
    c.bench_function("generate_sample/default", |b| {
        b.iter(|| {
            i += 1;
            black_box(generate_sample(&config, &pools, i).ok())
        })
    });
    let large = GenConfig { world_size: 30, n_npcs: 8, ..GenConfig::default() };
    c.bench_function("generate_sample/30_cube_8_npcs", |b| {
        b.iter(|| {
            i += 1;
            black_box(generate_sample(&large, &pools, i).ok())
        })
    });
}

fn bench_stages(c: &mut Criterion) {
    let config = GenConfig::default();
    let pools = ScenePools::default();
    let params = QueryParams::from_config(&config);
    let (snaps, log) = episode(&config, &pools, 7);

    c.bench_function("episode", |b| b.iter(|| black_box(episode(&config, &pools, 7))));
    c.bench_function("sample_query/geometric", |b| {
        b.iter_batched(
            || sample_rng(1, 1),
            |mut rng| black_box(sample_query(QueryClass::Geometric, &snaps, &log, &params, &mut rng).ok()),
            BatchSize::SmallInput,
        )
    });
    let q = sample_query(QueryClass::Temporal, &snaps, &log, &params, &mut sample_rng(2, 2)).expect("answerable");
    c.bench_function("execute/temporal", |b| b.iter(|| black_box(execute(&q.form, &snaps, &log).ok())));
    c.bench_function("render_text_context", |b| {
        b.iter_batched(
            || sample_rng(3, 3),
            |mut rng| black_box(render_text_context(&snaps, &mut rng)),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("render_relational_context", |b| b.iter(|| black_box(render_relational_context(&snaps))));
}

fn bench_shapes(c: &mut Criterion) {
    c.bench_function("make_shape/sphere_r6", |b| {
        b.iter(|| black_box(make_shape(Shape::Sphere, ShapeSize::uniform(6), [0, 0, 0])))
    });
    c.bench_function("make_shape/hollow_cube_8", |b| {
        b.iter(|| black_box(make_shape(Shape::HollowCube, ShapeSize::uniform(8), [0, 0, 0])))
    });
}

criterion_group!(benches, bench_sample, bench_stages, bench_shapes);
criterion_main!(benches);
