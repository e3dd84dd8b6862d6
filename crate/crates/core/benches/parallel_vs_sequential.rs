use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use planar_mobiles::bdfg::MapSampler;
use planar_mobiles::exec::{map_indexed, ExecMode};
use planar_mobiles::experiment::{limit_estimate, quenched_histogram};
use planar_mobiles::limit::LimitModel;
use planar_mobiles::mobile::Conditioning;
use planar_mobiles::rng::stream;
use planar_mobiles::{RootKind, WeightModel, WeightSeq};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn sampling(c: &mut Criterion) {
    let model = WeightModel::critical(&WeightSeq::critical_quadrangulations()).unwrap();
    let sampler = MapSampler::new(&model, Conditioning::Faces).unwrap();
    let mut g = c.benchmark_group("sample_16_maps_400_faces");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| map_indexed(mode, 16, |i| sampler.sample(400, &mut stream(1, "bench", i as u64)).unwrap().map.vertex_count()))
        });
    }
    g.finish();
}

fn histograms(c: &mut Criterion) {
    let model = WeightModel::critical(&WeightSeq::critical_quadrangulations()).unwrap();
    let sampler = MapSampler::new(&model, Conditioning::Faces).unwrap();
    let maps: Vec<_> = (0..16).map(|i| sampler.sample(800, &mut stream(2, "bench", i)).unwrap().map).collect();
    let mut g = c.benchmark_group("quenched_histograms_16_maps_k2");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| map_indexed(mode, maps.len(), |i| quenched_histogram(&maps[i], RootKind::Vertex, 2).len()))
        });
    }
    g.finish();
}

fn limit_balls(c: &mut Criterion) {
    let model = WeightModel::critical(&WeightSeq::critical_quadrangulations()).unwrap();
    let lm = LimitModel::new(&model).unwrap();
    let mut g = c.benchmark_group("limit_balls_2000_k1");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| limit_estimate(&lm, RootKind::Vertex, 1, 2000, 3, 1_000_000, mode).unwrap().codes.len())
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, histograms, limit_balls);
criterion_main!(benches);
