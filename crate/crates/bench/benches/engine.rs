use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use novikov::bp_hopf::{build_bp, cached, HopfKind};
use novikov::cobar_ext::ext;
use novikov::comodules::{cyclic_quotient, render_comodule, unit_comodule, Comodule, Field};
use novikov::novikov_ss::{Caps, Definition, Origin};
use novikov::pipeline::{build_bundle, LayerSource, PipelineConfig};

fn hopf(c: &mut Criterion) {
    c.bench_function("build_bp(2, 20)", |b| b.iter(|| build_bp(black_box(2), 20).unwrap()));
    c.bench_function("build_bp(3, 24)", |b| b.iter(|| build_bp(black_box(3), 24).unwrap()));
}

fn ext_groups(c: &mut Criterion) {
    let a = cached(HopfKind::DualSteenrod, 2, 20).unwrap();
    let unit = unit_comodule(&a);
    c.bench_function("ext steenrod s<=5 t<=20", |b| b.iter(|| ext(&a, &unit, 5, 20).unwrap()));
    let bp = cached(HopfKind::BrownPeterson, 2, 14).unwrap();
    let m = unit_comodule(&bp);
    c.bench_function("ext BP s<=3 t<=14", |b| b.iter(|| ext(&bp, &m, 3, 14).unwrap()));
}

fn spectral_sequences(c: &mut Criterion) {
    let bp = cached(HopfKind::BrownPeterson, 2, 12).unwrap();
    let unit = unit_comodule(&bp);
    let four = cyclic_quotient(&bp, 2).unwrap();
    let caps = Caps::new(3, 12);
    let mut g = c.benchmark_group("algnss");
    g.sample_size(10);
    let origin = |m: &Comodule, definition| Origin::Algnss { comodule: render_comodule(m), definition, caps };
    let cases = [
        ("iadic BP", origin(&unit, Definition::Iadic)),
        ("cosimplicial BP", origin(&unit, Definition::Cosimplicial)),
        ("iadic BP/4", origin(&four, Definition::Iadic)),
        ("cosimplicial BP/4", origin(&four, Definition::Cosimplicial)),
    ];
    for (name, o) in cases {
        g.bench_function(name, |b| b.iter(|| o.build_uncached().unwrap()));
    }
    g.finish();
}

fn pipeline(c: &mut Criterion) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { chow_max: 4, source: LayerSource::Preset(Field::R), out: dir.path().to_path_buf(), ..Default::default() };
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("R through Chow 4, warm caches", |b| b.iter(|| build_bundle(&cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, hopf, ext_groups, spectral_sequences, pipeline);
criterion_main!(benches);
