use planar_mobiles::bdfg::{assemble_t0, psi, psi_full, MapClass, MapSampler};
use planar_mobiles::enumerate::{all_degrees, check_bijection};
use planar_mobiles::experiment::{quenched_counts, quenched_histogram, run_quenched_experiment, QuenchedConfig};
use planar_mobiles::exec::ExecMode;
use planar_mobiles::mobile::{Conditioning, Mobile, TreeSampler};
use planar_mobiles::rng::{stream, stream2};
use planar_mobiles::{RootKind, WeightModel, WeightSeq};

fn count_identities(m: &Mobile, v: usize, e: usize, f: usize) {
    let c = m.shape.type_counts();
    assert_eq!(v, 1 + c[0]);
    assert_eq!(e + 1, c[0] + c[2] + c[3]);
    assert_eq!(f, c[2] + c[3]);
}

#[test]
fn smallest_map() {
    let m = Mobile::parse("1:0(3:0)").unwrap();
    let map = psi(&m).unwrap();
    assert_eq!((map.vertex_count(), map.edge_count(), map.face_count()), (2, 1, 1));
}

#[test]
fn glued_trees() {
    let a = Mobile::parse("2:1/2(4:1/2(1:0))").unwrap();
    let b = Mobile::parse("2:1/2(4:1/2)").unwrap();
    let g = assemble_t0(&a, &b).unwrap();
    assert_eq!(g.shape.type_counts()[3], 2);
    for gamma in [[1, 0, 0, 0], [1, 0, 1, 1], [0, 0, 1, 1]] {
        assert_eq!(g.shape.gamma_size(gamma), a.shape.gamma_size(gamma) + b.shape.gamma_size(gamma));
    }
    let map = psi(&g).unwrap();
    count_identities(&g, map.vertex_count(), map.edge_count(), map.face_count());
}

#[test]
fn bijection_up_to_three_edges() {
    for e in 1..=3 {
        let c = check_bijection(e, &all_degrees()).unwrap();
        assert!(c.ok(), "{c:?}");
    }
    // quadrangulations alone
    let c = check_bijection(2, &WeightSeq::critical_quadrangulations()).unwrap();
    assert!(c.ok(), "{c:?}");
}

#[test]
fn sampled_maps_satisfy_count_identities() {
    for seq in [WeightSeq::critical_quadrangulations(), WeightSeq::CriticalGeometric { t: 1.0 }, WeightSeq::CriticalGeometric { t: 2.0 }] {
        let model = WeightModel::critical(&seq).unwrap();
        let ts = TreeSampler::new(&model).unwrap();
        let mut rng = stream(21, "counts", 0);
        let mut done = 0;
        while done < 500 {
            let Ok(m) = ts.sample_tree(1, &mut rng) else { continue };
            if m.shape.degree(0) == 0 {
                continue;
            }
            let out = psi_full(&m).unwrap();
            let map = &out.map;
            count_identities(&m, map.vertex_count(), map.edge_count(), map.face_count());
            for d in map.face_degrees() {
                assert!(model.q(d) > 0.0, "face of degree {d}");
            }
            done += 1;
        }
    }
}

#[test]
fn conditioned_maps_have_the_requested_size() {
    let model = WeightModel::critical(&WeightSeq::CriticalGeometric { t: 1.0 }).unwrap();
    for cond in [Conditioning::Vertices, Conditioning::Edges, Conditioning::Faces] {
        let s = MapSampler::new(&model, cond).unwrap();
        let mut classes = [0; 3];
        for i in 0..60 {
            let out = s.sample(25, &mut stream(22, "cond", i)).unwrap();
            let got = match cond {
                Conditioning::Vertices => out.map.vertex_count(),
                Conditioning::Edges => out.map.edge_count(),
                Conditioning::Faces => out.map.face_count(),
            };
            assert_eq!(got, 25);
            classes[out.class as usize] += 1;
        }
        assert!(classes.iter().all(|&c| c > 0), "{classes:?}");
    }
}

#[test]
fn two_vertex_maps_have_edges() {
    let model = WeightModel::critical(&WeightSeq::CriticalGeometric { t: 1.0 }).unwrap();
    let s = MapSampler::new(&model, Conditioning::Vertices).unwrap();
    for i in 0..200 {
        let m = s.sample(2, &mut stream(28, "two", i)).unwrap().map;
        assert_eq!(m.vertex_count(), 2);
        assert!(m.edge_count() >= 1);
    }
}

#[test]
fn bipartite_models_have_no_glued_class() {
    let model = WeightModel::critical(&WeightSeq::critical_quadrangulations()).unwrap();
    let s = MapSampler::new(&model, Conditioning::Faces).unwrap();
    assert_eq!(s.prior(), [0.5, 0.0, 0.5]);
    let mut plus = 0;
    for i in 0..400 {
        let out = s.sample(10, &mut stream(23, "bip", i)).unwrap();
        assert_ne!(out.class, MapClass::Zero);
        assert!(out.map.face_degrees().iter().all(|&d| d == 4));
        plus += (out.class == MapClass::Plus) as usize;
    }
    assert!((plus as f64 - 200.0).abs() < 4.0 * 10.0, "{plus}");
}

#[test]
fn root_reversal_keeps_histograms() {
    let model = WeightModel::critical(&WeightSeq::CriticalGeometric { t: 1.0 }).unwrap();
    let s = MapSampler::new(&model, Conditioning::Edges).unwrap();
    for i in 0..10 {
        let m = s.sample(150, &mut stream(24, "rev", i)).unwrap().map;
        let r = m.reversed_root();
        for kind in [RootKind::Vertex, RootKind::HalfEdge, RootKind::Face] {
            assert_eq!(quenched_counts(&m, kind, 2), quenched_counts(&r, kind, 2));
        }
    }
}

#[test]
fn glued_halves_are_unbalanced() {
    let model = WeightModel::critical(&WeightSeq::CriticalGeometric { t: 1.0 }).unwrap();
    let ts = TreeSampler::new(&model).unwrap();
    let gamma = Conditioning::Edges.gamma();
    let n = 2000;
    let target = Conditioning::Edges.tree_target(n).unwrap();
    let samples = 100;
    let mut small = 0;
    let mut rng = stream(25, "glued", 0);
    let mut got = 0;
    while got < samples {
        if let Some((a, b)) = ts.try_pair(2, gamma, target, &mut rng) {
            let m = a.gamma_size(gamma).min(b.gamma_size(gamma));
            small += (m < n / 10) as usize;
            got += 1;
        }
    }
    assert!(small >= 95, "{small} of {samples}");
}

#[test]
fn pooled_histograms_equal_the_annealed_histogram() {
    let cfg = QuenchedConfig {
        model: WeightSeq::critical_quadrangulations(),
        conditioning: Conditioning::Faces,
        kind: RootKind::Vertex,
        k: 1,
        sizes: vec![40],
        replicas: 6,
        limit_samples: 100,
        seed: 26,
        exec: ExecMode::Parallel,
        limit_budget: 1_000_000,
    };
    let report = run_quenched_experiment(&cfg).unwrap();
    // regrouping: the same maps, one (map, mark) pair per vertex
    let model = WeightModel::critical(&cfg.model).unwrap();
    let s = MapSampler::new(&model, cfg.conditioning).unwrap();
    let replica = |r: usize| s.sample(40, &mut stream2(cfg.seed, "replica", 40, r as u64)).unwrap().map;
    let mut pooled = std::collections::BTreeMap::<String, f64>::new();
    let mut marks = 0u64;
    for r in 0..cfg.replicas {
        let map = replica(r);
        let counts = quenched_counts(&map, cfg.kind, cfg.k);
        let total: u64 = counts.values().sum();
        let h = quenched_histogram(&map, cfg.kind, cfg.k);
        assert_eq!(&h, &report.per_map_histograms[0].replicas[r]);
        for (c, n) in counts {
            *pooled.entry(c.to_hex()).or_default() += n as f64;
        }
        marks += total;
    }
    let conc = report.concentration_at(40).unwrap();
    // equal-size maps: the per-map mean equals the pooled frequency
    let vertices: Vec<usize> = (0..cfg.replicas).map(|r| replica(r).vertex_count()).collect();
    assert!(vertices.iter().all(|&v| v == vertices[0]));
    for (c, n) in pooled {
        let f = n / marks as f64;
        assert!((conc.codes[&c].mean - f).abs() < 1e-12);
    }
}

#[test]
fn experiment_is_deterministic_across_modes() {
    let mut cfg = QuenchedConfig {
        model: WeightSeq::CriticalGeometric { t: 1.0 },
        conditioning: Conditioning::Edges,
        kind: RootKind::HalfEdge,
        k: 1,
        sizes: vec![30, 60],
        replicas: 4,
        limit_samples: 300,
        seed: 27,
        exec: ExecMode::Parallel,
        limit_budget: 1_000_000,
    };
    let a = run_quenched_experiment(&cfg).unwrap();
    let b = run_quenched_experiment(&cfg).unwrap();
    cfg.exec = ExecMode::Sequential;
    let mut c = run_quenched_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    c.config.exec = ExecMode::Parallel;
    assert_eq!(a, c);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
