use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use sweepjt_bench::{continued_file, parameter_file};
use sweepjt_core::grammar::parse_template_appendix;
use sweepjt_core::{enumerate, parse_parameter_file, render_template, ConfigTable, Sweep, SweepRng};

fn parsing(c: &mut Criterion) {
    let cfg = ConfigTable::default();
    let mut group = c.benchmark_group("parse");
    for sets in [10, 100, 1000] {
        let text = continued_file(sets);
        group.throughput(Throughput::Bytes(text.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(sets), &text, |b, text| {
            b.iter(|| parse_parameter_file(black_box(text), &cfg).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let cfg = ConfigTable::default();
    let mut group = c.benchmark_group("enumerate");
    for (dims, width) in [(2, 30), (3, 20), (4, 10)] {
        let spec = parse_parameter_file(&parameter_file(dims, width), &cfg).unwrap();
        let sweep = Sweep::build(&spec, &cfg, &mut SweepRng::new(Some(1))).unwrap();
        group.throughput(Throughput::Elements(sweep.total));
        group.bench_function(BenchmarkId::new("points", format!("{dims}x{width}")), |b| {
            b.iter(|| {
                let mut rng = SweepRng::new(Some(1));
                sweep.points(&cfg, &mut rng).map(|p| p.unwrap().label.len()).sum::<usize>()
            })
        });
    }
    group.finish();
}

fn rendering(c: &mut Criterion) {
    let cfg = ConfigTable::default();
    let spec = parse_parameter_file(&parameter_file(3, 10), &cfg).unwrap();
    let points = enumerate(&spec, &cfg, &mut SweepRng::new(Some(1))).unwrap();
    let appendix = parse_template_appendix("REQUIREMENTS = ${1}\nRANK = ${JT_ID}\n", &cfg);
    let mut group = c.benchmark_group("render");
    group.throughput(Throughput::Elements(points.len() as u64));
    group.bench_function("templates", |b| {
        b.iter(|| {
            points
                .iter()
                .map(|p| render_template(p, "/usr/bin/worker", &appendix, &cfg).content().len())
                .sum::<usize>()
        })
    });
    group.finish();
}

criterion_group!(benches, parsing, enumeration, rendering);
criterion_main!(benches);
