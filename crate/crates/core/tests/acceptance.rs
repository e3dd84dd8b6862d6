//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use planar_mobiles::bdfg::MapSampler;
use planar_mobiles::enumerate::{all_degrees, check_bijection, rotation_systems};
use planar_mobiles::exec::ExecMode;
use planar_mobiles::experiment::{run_quenched_experiment, QuenchedConfig};
use planar_mobiles::limit::{LimitModel, SpineMobile};
use planar_mobiles::mobile::{all_bridges, bridge_count, child_types, sample_bridge, Conditioning, Offspring, TreeSampler};
use planar_mobiles::rng::stream;
use planar_mobiles::series::Lattice;
use planar_mobiles::weights::{bullet_coef, crit_residual, diamond_coef, vertex_weight_params, Weights};
use planar_mobiles::{ball, canonical_code, PlanarMap, RootKind, WeightModel, WeightSeq};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const KINDS: [RootKind; 3] = [RootKind::Vertex, RootKind::HalfEdge, RootKind::Face];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn quads() -> WeightModel {
    WeightModel::critical(&WeightSeq::critical_quadrangulations()).unwrap()
}

fn vw(t: f64) -> WeightModel {
    WeightModel::critical(&WeightSeq::CriticalGeometric { t }).unwrap()
}

fn bijection() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let c = check_bijection(n, &all_degrees()).unwrap();
        pass &= c.ok();
        parts.push(format!("n={n}: {} images of {} pointed rooted maps", c.distinct_images, c.pointed_rooted_maps));
    }
    outcome(pass, parts.join("; "))
}

fn count_identities() -> Outcome {
    let mut bad = 0;
    let mut parts = Vec::new();
    for (name, model) in [("quadrangulations", quads()), ("t=1", vw(1.0)), ("t=2", vw(2.0))] {
        let s = MapSampler::new(&model, Conditioning::Edges).unwrap();
        let mut rng = stream(101, "identities", 0);
        let mut zero = 0;
        let mut done = 0;
        while done < 10_000 {
            let n = rng.random_range(1..=120usize);
            let Ok(out) = s.sample(n, &mut rng) else { continue };
            let c = out.mobile.shape.type_counts();
            let m = &out.map;
            let ok = m.vertex_count() == 1 + c[0]
                && m.edge_count() + 1 == c[0] + c[2] + c[3]
                && m.face_count() == c[2] + c[3]
                && m.face_degrees().iter().all(|&d| model.q(d) > 0.0);
            bad += !ok as usize;
            zero += (out.class == planar_mobiles::bdfg::MapClass::Zero) as usize;
            done += 1;
        }
        parts.push(format!("{name}: 10000 maps ({zero} glued)"));
    }
    outcome(bad == 0, format!("{}; {bad} violations", parts.join(", ")))
}

fn criticality() -> Outcome {
    let q = WeightModel::new(&WeightSeq::critical_quadrangulations()).unwrap();
    let s = q.solution;
    let mut pass = s.x == 2.0 && s.y == 0.0 && s.crit_residual.abs() < 1e-10 && (s.spectral_radius - 1.0).abs() < 1e-9;
    let mut worst: f64 = 0.0;
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let p = vertex_weight_params(t).unwrap();
        let v = Weights::new(&WeightSeq::Geometric { t, lambda: p.lambda }).unwrap().eval(p.x, p.y).unwrap();
        for r in [v.fb - (1.0 - 1.0 / p.x), v.fd - p.y, crit_residual(p.x, &v)] {
            worst = worst.max(r.abs());
        }
    }
    let p = vertex_weight_params(1.0).unwrap();
    let at_one = [(p.x, 4.0 / 3.0), (p.y, 1.0 / 3f64.sqrt()), (p.lambda, 1.0 / (2.0 * 3f64.sqrt()))];
    let off = at_one.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    pass &= worst < 1e-9 && off < 1e-9;
    outcome(
        pass,
        format!(
            "quadrangulations (x,y)=({},{}), residual {:.1e}, radius-1 {:.1e}; vertex-weighted max residual {worst:.1e}, t=1 error {off:.1e}",
            s.x,
            s.y,
            s.crit_residual.abs(),
            (s.spectral_radius - 1.0).abs()
        ),
    )
}

fn arrangements(k: usize, kp: usize) -> Vec<Vec<u8>> {
    if k + kp == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if k > 0 {
        for mut r in arrangements(k - 1, kp) {
            r.insert(0, 1);
            out.push(r);
        }
    }
    if kp > 0 {
        for mut r in arrangements(k, kp - 1) {
            r.insert(0, 2);
            out.push(r);
        }
    }
    out
}

fn bridge_laws() -> Outcome {
    let mut count_errors = 0;
    for total in 0..=5 {
        for k in 0..=total {
            let kp = total - k;
            for ty in [3u8, 4] {
                let mut enumerated = 0.0;
                for kids in arrangements(k, kp) {
                    let n = all_bridges(ty, &kids).len() as f64;
                    count_errors += (n != bridge_count(ty, &kids)) as usize;
                    enumerated += n;
                }
                let coef = if ty == 3 { bullet_coef(k, kp) } else { diamond_coef(k, kp) };
                count_errors += (enumerated != coef) as usize;
            }
        }
    }
    let (mut cases, mut min_p) = (0u64, 1.0f64);
    for k in 0..=2 {
        for kp in 0..=2 {
            for ty in [3u8, 4] {
                for kids in arrangements(k, kp) {
                    let all = all_bridges(ty, &kids);
                    if all.len() < 2 {
                        continue;
                    }
                    let index: BTreeMap<Vec<i64>, usize> = all.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
                    let mut counts = vec![0u64; all.len()];
                    let mut rng = stream(104, "bridges", cases);
                    cases += 1;
                    let draws = 100_000;
                    for _ in 0..draws {
                        counts[index[&sample_bridge(ty, &kids, &mut rng)]] += 1;
                    }
                    let e = draws as f64 / all.len() as f64;
                    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
                    min_p = min_p.min(1.0 - ChiSquared::new((all.len() - 1) as f64).unwrap().cdf(chi2));
                }
            }
        }
    }
    outcome(
        count_errors == 0 && min_p > 0.001,
        format!("{count_errors} count mismatches for k+k'<=5; {cases} uniformity cases, smallest p = {min_p:.4}"),
    )
}

fn killed_mean(model: &WeightModel, draws: u64, seed: u64) -> f64 {
    let off = Offspring::new(model).unwrap();
    let mut rng = stream(seed, "killed", 0);
    let mut sum = 0u64;
    let mut stack = Vec::new();
    for _ in 0..draws {
        let mut ones = 1u64;
        stack.clear();
        stack.push(1u8);
        let mut root = true;
        while let Some(ty) = stack.pop() {
            if ty == 1 && !root {
                ones += 1;
                continue;
            }
            root = false;
            let (a, b) = off.sample_counts(ty, &mut rng);
            let (ta, tb) = child_types(ty);
            stack.extend(std::iter::repeat_n(ta, a as usize));
            stack.extend(std::iter::repeat_n(tb, b as usize));
        }
        sum += ones;
    }
    sum as f64 / draws as f64
}

fn size_biased_law() -> Outcome {
    // quadrangulation T^1 with at most 9 vertices: a root with k <= 4 type-3
    // children, each over one killed leaf; atom (k, j) has mass 2^-(k+1)
    let lm = LimitModel::new(&quads()).unwrap();
    let draws = 100_000u64;
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rest = 0u64;
    let mut rng = stream(105, "atoms", 0);
    for _ in 0..draws {
        let b = lm.sample_biased_block(1, 1, 1_000_000, &mut rng).unwrap();
        let m = b.mark.unwrap() as usize;
        let k = b.shape.degree(0);
        if b.len() > 9 || b.shape.type_counts() != [1 + k, 0, k, 0] {
            rest += 1;
            continue;
        }
        let j = b.shape.position(b.shape.parent(m).unwrap());
        *counts.entry((k, j)).or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    let mut z = |p: f64, got: u64| {
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max((got as f64 / draws as f64 - p).abs() / se);
    };
    for k in 1..=4 {
        for j in 0..k {
            z(0.5f64.powi(k as i32 + 1), counts.get(&(k, j)).copied().unwrap_or(0));
        }
    }
    z((5..200).map(|k| k as f64 * 0.5f64.powi(k + 1)).sum(), rest);
    let mq = killed_mean(&quads(), 1_000_000, 105);
    let mv = killed_mean(&vw(1.0), 1_000_000, 106);
    outcome(
        worst < 3.0 && (mq - 2.0).abs() < 0.02 && (mv - 2.0).abs() < 0.02,
        format!("11 atoms, largest deviation {worst:.2} SE; E[#1 T^1] = {mq:.4} (quadrangulations), {mv:.4} (t=1)"),
    )
}

fn spine_walk() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, model) in [("quadrangulations", quads()), ("t=1", vw(1.0))] {
        let lm = LimitModel::new(&model).unwrap();
        let mut steps = Vec::with_capacity(100_000);
        let mut below = 0;
        for i in 0..100 {
            let mut s = SpineMobile::new(&lm, 1, stream(106, "spine", i), u64::MAX).unwrap();
            for b in 0..10_000 {
                let step = s.extend_spine();
                if b < 1000 {
                    steps.push(step as f64);
                }
            }
            // labels are stored in half-units
            let labels = s.spine_labels();
            let min = labels.iter().map(|l| l - labels[0]).min().unwrap();
            below += (min < -20) as usize;
        }
        let n = steps.len() as f64;
        let mean = steps.iter().sum::<f64>() / n;
        let sd = (steps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let z = mean / (sd / n.sqrt());
        // the primary gate uses quadrangulations; t=1 is reported alongside
        if name == "quadrangulations" {
            pass = z.abs() < 3.0 && below >= 99;
        }
        parts.push(format!("{name}: mean step {:.4} (z = {z:.2}), minimum below -10 in {below}/100", mean / 2.0));
    }
    outcome(pass, parts.join("; "))
}

fn quenched_concentration() -> Outcome {
    let sizes = vec![200, 800, 3200];
    let cfg = QuenchedConfig {
        model: WeightSeq::critical_quadrangulations(),
        conditioning: Conditioning::Edges,
        kind: RootKind::Vertex,
        k: 1,
        sizes: sizes.clone(),
        replicas: 50,
        limit_samples: 10_000,
        seed: 107,
        exec: ExecMode::default(),
        limit_budget: 10_000_000,
    };
    let report = run_quenched_experiment(&cfg).unwrap();
    let sds: Vec<f64> = sizes.iter().map(|&n| report.concentration_at(n).unwrap().mean_top_sd(20)).collect();
    let ratios: Vec<f64> = sds.windows(2).map(|w| w[0] / w[1]).collect();
    let z: Vec<f64> = report.agreement(3200, 10).iter().map(|a| a.z().abs()).collect();
    let zmax = z.iter().cloned().fold(0.0, f64::max);
    outcome(
        ratios.iter().all(|&r| r >= 1.5) && zmax <= 3.0,
        format!(
            "mean top-20 sd {:?}, ratios {:?}; top-10 |z| max {zmax:.2}, unresolved limit mass {:.1e}",
            sds.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>(),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>(),
            report.limit_estimate.unresolved.freq
        ),
    )
}

fn lattices_and_shifts() -> Outcome {
    let cap = 40;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, model) in [("quadrangulations", quads()), ("t=1", vw(1.0))] {
        let ts = TreeSampler::new(&model).unwrap();
        for cond in [Conditioning::Vertices, Conditioning::Edges, Conditioning::Faces] {
            let g = cond.gamma();
            let p = ts.size_distribution(1, g, cap).unwrap();
            let detected = Lattice::from_distribution(&p).unwrap();
            let mut seen = vec![0u64; cap + 1];
            let mut rng = stream(108, "raw", g.iter().map(|&x| x as u64).sum());
            for _ in 0..1_000_000 {
                if let Some(s) = ts.sample_size(1, g, cap, &mut rng) {
                    seen[s] += 1;
                }
            }
            let observed: Vec<f64> = seen.iter().map(|&c| c as f64).collect();
            let empirical = Lattice::from_distribution(&observed).unwrap();
            // every observed size is in the support; every size with expected count >= 10 is observed
            let consistent = (0..=cap).all(|m| (seen[m] == 0 || p[m] > 0.0) && (p[m] * 1e6 < 10.0 || seen[m] > 0));
            let ok = consistent && empirical == detected && (0..=cap).all(|m| p[m] == 0.0 || detected.contains(m));
            pass &= ok;
            parts.push(format!("{name} {cond:?}: (a,d) = ({},{})", detected.offset, detected.period));
        }
    }
    let mut violations = 0;
    let mut checked = 0;
    for (model, conds) in [
        (vw(1.0), vec![Conditioning::Vertices, Conditioning::Edges, Conditioning::Faces]),
        (quads(), vec![Conditioning::Faces]),
    ] {
        for cond in conds {
            let s = MapSampler::new(&model, cond).unwrap();
            let mut rng = stream(108, "shifts", checked as u64);
            for _ in 0..300 {
                let n = rng.random_range(2..=80usize);
                let out = s.sample(n, &mut rng).unwrap();
                let got = match cond {
                    Conditioning::Vertices => out.map.vertex_count(),
                    Conditioning::Edges => out.map.edge_count(),
                    Conditioning::Faces => out.map.face_count(),
                };
                violations += (got != n || Some(out.mobile.shape.gamma_size(cond.gamma())) != cond.tree_target(n)) as usize;
                checked += 1;
            }
        }
    }
    pass &= violations == 0;
    outcome(pass, format!("{}; {checked} conditioned maps, {violations} shift violations", parts.join(", ")))
}

/// Root-preserving isomorphism by trying every dart bijection.
fn naive_isomorphic(a: &PlanarMap, b: &PlanarMap, kind: RootKind) -> bool {
    let n = a.dart_count();
    if n != b.dart_count() {
        return false;
    }
    if n == 0 {
        return true;
    }
    let ra = a.root_dart().unwrap();
    let rb = b.root_dart().unwrap();
    let targets: Vec<usize> = match kind {
        RootKind::HalfEdge => vec![rb],
        RootKind::Vertex => b.darts_at(b.vertex_of(rb)),
        RootKind::Face => b.face_darts(b.left_face(rb)).into_iter().map(|d| b.alpha(d)).collect(),
    };
    let src = match kind {
        RootKind::Face => a.alpha(a.face_darts(a.left_face(ra))[0]),
        _ => ra,
    };
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        if targets.contains(&p[src]) && (0..n).all(|d| p[a.alpha(d)] == b.alpha(p[d]) && p[a.sigma(d)] == b.sigma(p[d])) {
            return true;
        }
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return false };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

fn topology_coherence() -> Outcome {
    let s = MapSampler::new(&vw(1.0), Conditioning::Edges).unwrap();
    let mut rng = stream(109, "coherence", 0);
    let mut bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=60usize);
        let m = s.sample(n, &mut rng).unwrap().map.with_mark(None).unwrap();
        for kind in KINDS {
            for j in 0..=4 {
                let bj = ball(&m, kind, j);
                for i in 0..=j {
                    bad += (canonical_code(&ball(&bj, kind, i), kind) != canonical_code(&ball(&m, kind, i), kind)) as usize;
                }
            }
        }
    }
    let mut oracle_bad = 0;
    let mut classes_total = 0;
    for kind in KINDS {
        let mut classes: BTreeMap<Vec<u32>, Vec<PlanarMap>> = BTreeMap::new();
        classes.entry(canonical_code(&PlanarMap::vertex_map(), kind)).or_default().push(PlanarMap::vertex_map());
        for e in 1..=3 {
            for m in rotation_systems(e) {
                for r in 0..m.dart_count() {
                    let mr = m.with_root(r).unwrap();
                    classes.entry(canonical_code(&mr, kind)).or_default().push(mr);
                }
            }
        }
        let reps: Vec<&PlanarMap> = classes.values().map(|v| &v[0]).collect();
        for v in classes.values() {
            oracle_bad += v[1..].iter().filter(|m| !naive_isomorphic(&v[0], m, kind)).count();
        }
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                oracle_bad += naive_isomorphic(reps[i], reps[j], kind) as usize;
            }
        }
        classes_total += classes.len();
    }
    outcome(
        bad == 0 && oracle_bad == 0,
        format!("{bad} projection failures on 1000 maps; {classes_total} classes, {oracle_bad} oracle disagreements"),
    )
}

type Criterion = (usize, &'static str, Duration, fn() -> Outcome);

fn main() {
    let minute = Duration::from_secs(60);
    let criteria: [Criterion; 9] = [
        (1, "bijection oracle", minute, bijection),
        (2, "count identities", 2 * minute, count_identities),
        (3, "criticality solutions", minute, criticality),
        (4, "bridge laws", 2 * minute, bridge_laws),
        (5, "size-biased law", 5 * minute, size_biased_law),
        (6, "spine label walk", 5 * minute, spine_walk),
        (7, "quenched concentration", 30 * minute, quenched_concentration),
        (8, "conditioning shifts and lattice", 5 * minute, lattices_and_shifts),
        (9, "local topology coherence", 2 * minute, topology_coherence),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let pass = o.pass && took <= limit;
        failed += !pass as usize;
        println!(
            "criterion {id} {name}: {} ({:.1} s, limit {} s): {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
