use std::collections::BTreeMap;

use planar_mobiles::weights::{
    bullet_coef, classify, crit_residual, diamond_coef, spectral_radius, vertex_weight_params, Status, Weights,
};
use planar_mobiles::{WeightModel, WeightSeq};

fn power_iteration(m: &[[f64; 3]; 3]) -> f64 {
    // shift by the identity so periodic matrices converge
    let mut v = [1.0; 3];
    let mut lambda = 0.0;
    for _ in 0..200_000 {
        let mut w = [0.0; 3];
        for i in 0..3 {
            w[i] = v[i] + (0..3).map(|j| m[i][j] * v[j]).sum::<f64>();
        }
        let norm = w.iter().cloned().fold(0.0, f64::max);
        lambda = norm;
        v = w.map(|x| x / norm);
    }
    lambda - 1.0
}

#[test]
fn quadrangulation_examples() {
    let w = Weights::new(&WeightSeq::critical_quadrangulations()).unwrap();
    let v = w.eval(0.7, 0.3).unwrap();
    let c = 1.0 / 12.0;
    assert!((v.fb - (3.0 * c * 0.7 + 3.0 * c * 0.09)).abs() < 1e-15);
    assert!((v.fd - (c * 0.027 + 6.0 * c * 0.7 * 0.3)).abs() < 1e-15);
    let s = w.solve().unwrap();
    assert_eq!((s.x, s.y), (2.0, 0.0));
    assert!(crit_residual(s.x, &w.eval(s.x, s.y).unwrap()).abs() < 1e-12);
    assert!((s.spectral_radius - 1.0).abs() < 1e-9);

    let sub = WeightModel::new(&WeightSeq::quadrangulations(1.0 / 24.0)).unwrap();
    assert_eq!(sub.solution.status, Status::Admissible);
    assert!(sub.solution.spectral_radius < 1.0);
    assert!(sub.solution.crit_residual.abs() > 1e-3);
}

#[test]
fn constant_terms() {
    let w = Weights::new(&WeightSeq::Finite { q: BTreeMap::from([(1, 0.1), (2, 0.2), (4, 0.01)]) }).unwrap();
    let v = w.eval(0.0, 0.0).unwrap();
    assert_eq!((v.fb, v.fd), (0.2, 0.1));
}

#[test]
fn tiny_triangle_weight() {
    let eps = 1e-4;
    let m = WeightModel::new(&WeightSeq::Finite { q: BTreeMap::from([(3, eps)]) }).unwrap();
    let s = m.solution;
    assert!(s.x > 1.0 && s.x < 1.01, "{s:?}");
    assert!(s.y > 0.0 && s.y < 0.01, "{s:?}");
    assert!(s.residual_bullet.abs() < 1e-12 && s.residual_diamond.abs() < 1e-12);
}

#[test]
fn inadmissible_weights() {
    let r = classify(&WeightSeq::quadrangulations(0.2)).unwrap();
    assert_eq!(r.status, Status::Inadmissible);
}

#[test]
fn newton_radius_matches_power_iteration() {
    let seqs = [
        WeightSeq::critical_quadrangulations(),
        WeightSeq::quadrangulations(0.05),
        WeightSeq::CriticalGeometric { t: 1.0 },
        WeightSeq::CriticalGeometric { t: 0.25 },
        WeightSeq::Geometric { t: 1.0, lambda: 0.25 },
        WeightSeq::Finite { q: BTreeMap::from([(3, 0.05), (4, 0.03)]) },
    ];
    for seq in seqs {
        let m = WeightModel::new(&seq).unwrap();
        if m.y() == 0.0 {
            continue;
        }
        let mat = m.weights.criticality_matrix(m.x(), m.y()).unwrap();
        let a = spectral_radius(&mat);
        let b = power_iteration(&mat);
        assert!((a - b).abs() < 1e-8, "{seq:?}: {a} vs {b}");
    }
}

#[test]
fn criticality_criteria_agree_on_a_grid() {
    let mut seqs = Vec::new();
    for i in 1..=12 {
        seqs.push(WeightSeq::quadrangulations(i as f64 / 144.0));
    }
    for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        seqs.push(WeightSeq::CriticalGeometric { t });
        let crit = vertex_weight_params(t).unwrap().lambda;
        for f in [0.5, 0.8, 0.95, 0.999] {
            seqs.push(WeightSeq::Geometric { t, lambda: crit * f });
        }
    }
    for a in 1..=4 {
        for b in 1..=4 {
            seqs.push(WeightSeq::Finite { q: BTreeMap::from([(3, 0.02 * a as f64), (4, 0.01 * b as f64)]) });
        }
    }
    let mut seen = [0; 2];
    for seq in seqs {
        let Ok(m) = WeightModel::new(&seq) else { continue };
        let s = m.solution;
        let radius_says = (s.spectral_radius - 1.0).abs() < 1e-7;
        let residual_says = s.crit_residual.abs() < 1e-7;
        assert_eq!(radius_says, residual_says, "{seq:?}: {s:?}");
        assert!(s.spectral_radius <= 1.0 + 1e-9);
        seen[radius_says as usize] += 1;
    }
    assert!(seen[0] > 10 && seen[1] > 3, "{seen:?}");
}

#[test]
fn geometric_closed_form_matches_series() {
    let (t, lam) = (1.0, 1.0 / (2.0 * 3f64.sqrt()));
    let w = Weights::new(&WeightSeq::Geometric { t, lambda: lam }).unwrap();
    let points: [(f64, f64); 4] = [(4.0 / 3.0, 1.0 / 3f64.sqrt()), (1.1, 0.2), (0.5, 0.9), (1.5, 0.0)];
    for (x, y) in points {
        let (mut fb, mut fd) = (0.0, 0.0);
        for n in 1..=400usize {
            let q = t * lam.powi(n as i32);
            if n >= 2 {
                for k in 0..=(n - 2) / 2 {
                    let kp = n - 2 - 2 * k;
                    fb += bullet_coef(k, kp) * q * x.powi(k as i32) * y.powi(kp as i32);
                }
            }
            for k in 0..=(n - 1) / 2 {
                let kp = n - 1 - 2 * k;
                fd += diamond_coef(k, kp) * q * x.powi(k as i32) * y.powi(kp as i32);
            }
        }
        let v = w.eval(x, y).unwrap();
        assert!((v.fb - fb).abs() < 1e-10, "({x},{y}): {} vs {fb}", v.fb);
        assert!((v.fd - fd).abs() < 1e-10, "({x},{y}): {} vs {fd}", v.fd);
    }
}

#[test]
fn vertex_weight_params_match_solver() {
    for &t in &[0.25, 0.5, 1.0, 2.0, 4.0] {
        let p = vertex_weight_params(t).unwrap();
        let m = WeightModel::new(&WeightSeq::Geometric { t, lambda: p.lambda }).unwrap();
        assert!((m.x() - p.x).abs() < 1e-8, "t={t}: {} vs {}", m.x(), p.x);
        assert!((m.y() - p.y).abs() < 1e-8, "t={t}: {} vs {}", m.y(), p.y);
        assert!(m.solution.status.is_critical());
    }
    let p = vertex_weight_params(1.0).unwrap();
    assert!((p.x - 4.0 / 3.0).abs() < 1e-9);
    assert!((p.y - 1.0 / 3f64.sqrt()).abs() < 1e-9);
    assert!((p.lambda - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-9);
}

#[test]
fn regular_criticality() {
    let w = Weights::new(&WeightSeq::critical_quadrangulations()).unwrap();
    assert!(w.regular_critical(2.0, 0.0, 10.0));
    let p = vertex_weight_params(1.0).unwrap();
    let g = Weights::new(&WeightSeq::Geometric { t: 1.0, lambda: p.lambda }).unwrap();
    assert!(g.regular_critical(p.x, p.y, 1e-6));
    assert!(!g.regular_critical(p.x, p.y, 2.0));
}
