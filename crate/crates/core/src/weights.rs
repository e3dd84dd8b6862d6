//! Face weights, the generating functions `f•` and `f◇`, the admissibility
//! system and its criticality.
//!
//! With face weights `q_n`,
//!
//! ```text
//! f•(x, y) = Σ C(2k+k'+1, k+1) C(k+k', k) q_{2+2k+k'} x^k y^k'
//! f◇(x, y) = Σ C(2k+k', k)     C(k+k', k) q_{1+2k+k'} x^k y^k'
//! ```
//!
//! and a weight sequence is admissible when `f•(x, y) = 1 - 1/x` and
//! `f◇(x, y) = y` have a solution with `x > 1`, `y >= 0`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Face weight sequence as given by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSeq {
    /// Finitely supported weights `q_n`.
    Finite {
        #[serde(with = "degree_keys")]
        q: BTreeMap<usize, f64>,
    },
    /// `q_n = t λ^n`, the vertex-weighted family.
    Geometric { t: f64, lambda: f64 },
    /// The critical member of the geometric family with vertex weight `t`.
    CriticalGeometric { t: f64 },
}

// JSON object keys are strings; internally tagged enums lose serde_json's
// integer-key coercion, so convert by hand.
mod degree_keys {
    use std::collections::BTreeMap;

    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &BTreeMap<usize, f64>, s: S) -> Result<S::Ok, S::Error> {
        q.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<String, f64>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, f64>, D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| k.trim().parse::<usize>().map(|k| (k, v)).map_err(|_| D::Error::custom(format!("face degree {k:?}"))))
            .collect()
    }
}

impl WeightSeq {
    /// Critical quadrangulations, `q_4 = 1/12`.
    pub fn critical_quadrangulations() -> Self {
        Self::quadrangulations(1.0 / 12.0)
    }

    pub fn quadrangulations(q4: f64) -> Self {
        WeightSeq::Finite { q: BTreeMap::from([(4, q4)]) }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("weight sequence: {e}")))
    }

    /// Check the sequence and resolve `critical_geometric` to its `λ`.
    pub fn normalize(&self) -> Result<WeightSeq> {
        match self {
            WeightSeq::Finite { q } => {
                if q.is_empty() {
                    return Err(Error::Domain("empty weight sequence".into()));
                }
                for (&n, &w) in q {
                    if n == 0 {
                        return Err(Error::Domain("q_0 is not a face weight".into()));
                    }
                    if !w.is_finite() || w < 0.0 {
                        return Err(Error::Domain(format!("q_{n} = {w} is not a non-negative number")));
                    }
                }
                if !q.iter().any(|(&n, &w)| n >= 3 && w > 0.0) {
                    return Err(Error::Domain("need a positive q_n for some n >= 3".into()));
                }
                let q = q.iter().filter(|(_, &w)| w > 0.0).map(|(&n, &w)| (n, w)).collect();
                Ok(WeightSeq::Finite { q })
            }
            WeightSeq::Geometric { t, lambda } => {
                if !(t.is_finite() && *t > 0.0 && lambda.is_finite() && *lambda > 0.0) {
                    return Err(Error::Domain(format!("geometric weights need t > 0 and λ > 0, got t={t}, λ={lambda}")));
                }
                Ok(self.clone())
            }
            WeightSeq::CriticalGeometric { t } => {
                let p = vertex_weight_params(*t)?;
                Ok(WeightSeq::Geometric { t: *t, lambda: p.lambda })
            }
        }
    }

    /// `q_n`.
    pub fn q(&self, n: usize) -> f64 {
        match self {
            WeightSeq::Finite { q } => q.get(&n).copied().unwrap_or(0.0),
            WeightSeq::Geometric { t, lambda } => {
                if n == 0 {
                    0.0
                } else {
                    t * lambda.powi(n as i32)
                }
            }
            WeightSeq::CriticalGeometric { .. } => panic!("normalize before use"),
        }
    }

    /// Largest `n` with `q_n > 0`, or `None` for infinite support.
    pub fn max_degree(&self) -> Option<usize> {
        match self {
            WeightSeq::Finite { q } => q.keys().next_back().copied(),
            _ => None,
        }
    }

    /// Only even face degrees carry weight.
    pub fn is_bipartite(&self) -> bool {
        match self {
            WeightSeq::Finite { q } => q.iter().all(|(&n, &w)| n % 2 == 0 || w == 0.0),
            _ => false,
        }
    }
}

/// `C(n, k)` in floating point.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round_if_exact()
}

trait RoundIfExact {
    fn round_if_exact(self) -> f64;
}
impl RoundIfExact for f64 {
    fn round_if_exact(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}

/// Coefficient of `x^k y^k'` in `f•` divided by `q_{2+2k+k'}`.
pub fn bullet_coef(k: usize, kp: usize) -> f64 {
    binom(2 * k + kp + 1, k + 1) * binom(k + kp, k)
}

/// Coefficient of `x^k y^k'` in `f◇` divided by `q_{1+2k+k'}`.
pub fn diamond_coef(k: usize, kp: usize) -> f64 {
    binom(2 * k + kp, k) * binom(k + kp, k)
}

/// Values and first partial derivatives of `f•` and `f◇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FVals {
    pub fb: f64,
    pub fb_x: f64,
    pub fb_y: f64,
    pub fd: f64,
    pub fd_x: f64,
    pub fd_y: f64,
    /// `∂²f◇/∂x∂y`, needed for the `y → 0` limit of the criticality matrix.
    pub fd_xy: f64,
}

/// Polynomial terms `(k, k', coefficient·q)`.
#[derive(Debug, Clone)]
struct Terms {
    bullet: Vec<(i32, i32, f64)>,
    diamond: Vec<(i32, i32, f64)>,
}

fn finite_terms(q: &BTreeMap<usize, f64>) -> Terms {
    let mut bullet = Vec::new();
    let mut diamond = Vec::new();
    for (&n, &w) in q {
        if n >= 2 {
            for k in 0..=(n - 2) / 2 {
                let kp = n - 2 - 2 * k;
                bullet.push((k as i32, kp as i32, bullet_coef(k, kp) * w));
            }
        }
        for k in 0..=(n - 1) / 2 {
            let kp = n - 1 - 2 * k;
            diamond.push((k as i32, kp as i32, diamond_coef(k, kp) * w));
        }
    }
    Terms { bullet, diamond }
}

fn pw(x: f64, k: i32) -> f64 {
    if k < 0 {
        0.0
    } else {
        x.powi(k)
    }
}

/// A validated weight sequence ready for evaluation.
#[derive(Debug, Clone)]
pub struct Weights {
    seq: WeightSeq,
    terms: Option<Terms>,
}

impl Weights {
    pub fn new(seq: &WeightSeq) -> Result<Self> {
        let seq = seq.normalize()?;
        let terms = match &seq {
            WeightSeq::Finite { q } => Some(finite_terms(q)),
            _ => None,
        };
        Ok(Weights { seq, terms })
    }

    pub fn seq(&self) -> &WeightSeq {
        &self.seq
    }

    /// Evaluate at `(x, y)`; `None` outside the domain of convergence.
    pub fn eval(&self, x: f64, y: f64) -> Option<FVals> {
        if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
            return None;
        }
        match (&self.seq, &self.terms) {
            (_, Some(t)) => {
                let mut v = FVals { fb: 0.0, fb_x: 0.0, fb_y: 0.0, fd: 0.0, fd_x: 0.0, fd_y: 0.0, fd_xy: 0.0 };
                for &(k, kp, c) in &t.bullet {
                    v.fb += c * pw(x, k) * pw(y, kp);
                    v.fb_x += c * k as f64 * pw(x, k - 1) * pw(y, kp);
                    v.fb_y += c * kp as f64 * pw(x, k) * pw(y, kp - 1);
                }
                for &(k, kp, c) in &t.diamond {
                    v.fd += c * pw(x, k) * pw(y, kp);
                    v.fd_x += c * k as f64 * pw(x, k - 1) * pw(y, kp);
                    v.fd_y += c * kp as f64 * pw(x, k) * pw(y, kp - 1);
                    v.fd_xy += c * (k * kp) as f64 * pw(x, k - 1) * pw(y, kp - 1);
                }
                Some(v)
            }
            (WeightSeq::Geometric { t, lambda }, None) => geometric_eval(*t, *lambda, x, y),
            _ => unreachable!("normalized"),
        }
    }

    /// Smallest `y >= 0` with `f◇(x, y) = y`.
    pub fn y_of_x(&self, x: f64) -> Option<f64> {
        let v0 = self.eval(x, 0.0)?;
        if v0.fd == 0.0 {
            return Some(0.0);
        }
        if v0.fd_y >= 1.0 {
            return None;
        }
        let k = |y: f64| self.eval(x, y).map(|v| (v.fd - y, v.fd_y - 1.0));
        // bracket either a root of k or the minimiser of the convex k
        let mut hi = v0.fd.max(1e-8);
        let mut root_hi = None;
        loop {
            match k(hi) {
                Some((kv, _)) if kv <= 0.0 => {
                    root_hi = Some(hi);
                    break;
                }
                Some((_, kd)) if kd < 0.0 => {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return None;
                    }
                }
                _ => break,
            }
        }
        let root_hi = match root_hi {
            Some(h) => h,
            None => {
                let (mut lo, mut up) = (0.0, hi);
                let mut found = None;
                for _ in 0..400 {
                    let mid = 0.5 * (lo + up);
                    if mid <= lo || mid >= up {
                        break;
                    }
                    match k(mid) {
                        Some((kv, _)) if kv <= 0.0 => {
                            found = Some(mid);
                            break;
                        }
                        Some((_, kd)) if kd < 0.0 => lo = mid,
                        _ => up = mid,
                    }
                }
                match found {
                    Some(m) => m,
                    None => match k(lo) {
                        Some((kv, _)) if kv <= 0.0 => lo,
                        _ => return None,
                    },
                }
            }
        };
        let (mut lo, mut up) = (0.0, root_hi);
        for _ in 0..400 {
            let mid = 0.5 * (lo + up);
            if mid <= lo || mid >= up {
                break;
            }
            match k(mid) {
                Some((kv, _)) if kv > 0.0 => lo = mid,
                _ => up = mid,
            }
        }
        // the upper end satisfies k <= 0 and is within one ulp of the root
        let klo = k(lo).map_or(f64::INFINITY, |v| v.0.abs());
        let kup = k(up).map_or(f64::INFINITY, |v| v.0.abs());
        Some(if klo < kup { lo } else { up })
    }

    /// `g(x) = f•(x, y(x)) - 1 + 1/x` and its derivative.
    fn g(&self, x: f64) -> Option<(f64, f64, f64)> {
        let y = self.y_of_x(x)?;
        let v = self.eval(x, y)?;
        let dy = if y == 0.0 && v.fd_x == 0.0 { 0.0 } else { v.fd_x / (1.0 - v.fd_y) };
        if !dy.is_finite() || dy < 0.0 {
            return None;
        }
        Some((v.fb - 1.0 + 1.0 / x, v.fb_x + v.fb_y * dy - 1.0 / (x * x), y))
    }

    /// Solve the admissibility system for the smallest `x > 1`.
    pub fn solve(&self) -> Result<Solution> {
        let tol = 1e-12;
        let Some((g1, dg1, _)) = self.g(1.0) else {
            return Err(Error::NoSolution("f◇(1, y) = y has no solution".into()));
        };
        if g1 <= 0.0 {
            return Err(Error::NoSolution("f•(1, y) vanishes".into()));
        }
        if dg1 >= 0.0 {
            return Err(Error::NoSolution("f•(x, y(x)) - 1 + 1/x is increasing from x = 1".into()));
        }
        // bracket either a sign change of g or the minimiser of g
        let mut lo = 1.0;
        let mut hi = 2.0;
        let mut sign_change = None;
        loop {
            match self.g(hi) {
                Some((gv, _, _)) if gv < -tol => {
                    sign_change = Some(hi);
                    break;
                }
                Some((_, dg, _)) if dg < 0.0 => {
                    lo = hi;
                    hi *= 2.0;
                    if hi > 1e15 {
                        return Err(Error::NonConvergence("no bracket for the minimum of g".into()));
                    }
                }
                _ => break,
            }
        }
        let mut critical = false;
        let root_hi = match sign_change {
            Some(h) => h,
            None => {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..400 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    match self.g(mid) {
                        Some((gv, _, _)) if gv < -tol => {
                            sign_change = Some(mid);
                            break;
                        }
                        Some((_, dg, _)) if dg < 0.0 => a = mid,
                        _ => b = mid,
                    }
                }
                match sign_change {
                    Some(h) => h,
                    None => {
                        let xm = [a, b]
                            .into_iter()
                            .filter_map(|x| self.g(x).map(|g| (x, g.0)))
                            .min_by(|p, q| p.1.total_cmp(&q.1));
                        let Some((xm, gm)) = xm else {
                            return Err(Error::NonConvergence("minimum of g left the domain".into()));
                        };
                        if gm > tol {
                            return Err(Error::NoSolution(format!("min over x of f•(x, y(x)) - 1 + 1/x is {gm:e} > 0")));
                        }
                        critical = true;
                        xm
                    }
                }
            }
        };
        let x = if critical {
            root_hi
        } else {
            let (mut a, mut b) = (1.0, root_hi);
            for _ in 0..400 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                match self.g(mid) {
                    Some((gv, _, _)) if gv > 0.0 => a = mid,
                    _ => b = mid,
                }
            }
            let ga = self.g(a).map_or(f64::INFINITY, |v| v.0.abs());
            let gb = self.g(b).map_or(f64::INFINITY, |v| v.0.abs());
            if ga < gb {
                a
            } else {
                b
            }
        };
        let y = self.y_of_x(x).ok_or_else(|| Error::NumericalInstability("y(x) vanished at the solution".into()))?;
        self.solution_at(x, y, critical)
    }

    fn solution_at(&self, x: f64, y: f64, fold: bool) -> Result<Solution> {
        let v = self.eval(x, y).ok_or(Error::NumericalInstability("solution outside domain".into()))?;
        let m = self.criticality_matrix(x, y)?;
        let rho = spectral_radius(&m);
        let crit = crit_residual(x, &v);
        let critical = fold || (rho - 1.0).abs() <= 1e-9;
        let status = if !critical {
            Status::Admissible
        } else if self.regular_critical(x, y, 1e-6) {
            Status::RegularCritical
        } else {
            Status::Critical
        };
        Ok(Solution {
            x,
            y,
            status,
            spectral_radius: rho,
            residual_bullet: v.fb - (1.0 - 1.0 / x),
            residual_diamond: v.fd - y,
            crit_residual: crit,
        })
    }

    /// Criticality matrix at `(x, y)`.
    pub fn criticality_matrix(&self, x: f64, y: f64) -> Result<[[f64; 3]; 3]> {
        if x == 1.0 {
            return Err(Error::SingularPoint);
        }
        let v = self.eval(x, y).ok_or(Error::NumericalInstability("matrix outside domain".into()))?;
        let b = if y == 0.0 {
            if v.fd_x != 0.0 {
                return Err(Error::SingularPoint);
            }
            x * v.fd_xy
        } else {
            x / y * v.fd_x
        };
        Ok([
            [0.0, 0.0, x - 1.0],
            [b, v.fd_y, 0.0],
            [x * x / (x - 1.0) * v.fb_x, x * y / (x - 1.0) * v.fb_y, 0.0],
        ])
    }

    /// `f•` stays finite slightly beyond `(x, y)`.
    pub fn regular_critical(&self, x: f64, y: f64, eps: f64) -> bool {
        self.eval(x + eps, y + eps).is_some_and(|v| v.fb.is_finite() && v.fd.is_finite())
    }
}

fn geometric_eval(t: f64, lam: f64, x: f64, y: f64) -> Option<FVals> {
    let u = 1.0 - lam * y;
    if u <= 0.0 {
        return None;
    }
    let w = 4.0 * lam * lam * x / (u * u);
    if w >= 1.0 {
        return None;
    }
    let z = (1.0 - w).sqrt();
    let z_x = -(4.0 * lam * lam / (u * u)) / (2.0 * z);
    let z_y = -(8.0 * lam.powi(3) * x / u.powi(3)) / (2.0 * z);
    let a = z * (1.0 + z);
    let c = 2.0 * t * lam * lam;
    let fb = c / (u * u * a);
    let fb_x = -c / (u * u) * z_x * (1.0 + 2.0 * z) / (a * a);
    let fb_y = c * (2.0 * lam / (u.powi(3) * a) - z_y * (1.0 + 2.0 * z) / (u * u * a * a));
    let fd = t * lam / (u * z);
    let fd_x = -t * lam * z_x / (u * z * z);
    let fd_y = t * lam * (lam / (u * u * z) - z_y / (u * z * z));
    Some(FVals { fb, fb_x, fb_y, fd, fd_x, fd_y, fd_xy: f64::NAN })
}

/// `x² det J + 1 - x² ∂ₓf• - ∂_y f◇`, which vanishes exactly at criticality.
pub fn crit_residual(x: f64, v: &FVals) -> f64 {
    let det = v.fb_x * v.fd_y - v.fb_y * v.fd_x;
    x * x * det + 1.0 - x * x * v.fb_x - v.fd_y
}

/// Classification of a weight sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Admissible,
    Critical,
    RegularCritical,
    Inadmissible,
}

impl Status {
    pub fn is_critical(self) -> bool {
        matches!(self, Status::Critical | Status::RegularCritical)
    }
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Admissible => "admissible",
            Status::Critical => "critical",
            Status::RegularCritical => "regular_critical",
            Status::Inadmissible => "inadmissible",
        }
    }
}

/// Solution of the admissibility system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: f64,
    pub y: f64,
    pub status: Status,
    pub spectral_radius: f64,
    pub residual_bullet: f64,
    pub residual_diamond: f64,
    pub crit_residual: f64,
}

/// A weight sequence together with its solution.
#[derive(Debug, Clone)]
pub struct WeightModel {
    pub weights: Weights,
    pub solution: Solution,
}

impl WeightModel {
    pub fn new(seq: &WeightSeq) -> Result<Self> {
        let weights = Weights::new(seq)?;
        let solution = match weights.seq() {
            WeightSeq::Geometric { t, lambda } if matches!(seq, WeightSeq::CriticalGeometric { .. }) => {
                let p = vertex_weight_params(*t)?;
                debug_assert_eq!(p.lambda, *lambda);
                weights.solution_at(p.x, p.y, true)?
            }
            _ => weights.solve()?,
        };
        Ok(WeightModel { weights, solution })
    }

    /// Build and insist on criticality.
    pub fn critical(seq: &WeightSeq) -> Result<Self> {
        let m = Self::new(seq)?;
        if !m.solution.status.is_critical() {
            return Err(Error::NotCritical(format!("spectral radius {}", m.solution.spectral_radius)));
        }
        Ok(m)
    }

    pub fn x(&self) -> f64 {
        self.solution.x
    }
    pub fn y(&self) -> f64 {
        self.solution.y
    }
    pub fn seq(&self) -> &WeightSeq {
        self.weights.seq()
    }
    pub fn q(&self, n: usize) -> f64 {
        self.weights.seq().q(n)
    }
    pub fn at_solution(&self) -> FVals {
        self.weights.eval(self.x(), self.y()).expect("solution is inside the domain")
    }
}

/// Outcome of classifying a sequence: a solution, or inadmissibility.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub solution: Option<Solution>,
}

pub fn classify(seq: &WeightSeq) -> Result<SolveReport> {
    match WeightModel::new(seq) {
        Ok(m) => Ok(SolveReport { status: m.solution.status, solution: Some(m.solution) }),
        Err(Error::NoSolution(_)) => Ok(SolveReport { status: Status::Inadmissible, solution: None }),
        Err(e) => Err(e),
    }
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn shifted(m: &[[f64; 3]; 3], lam: f64) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = if i == j { lam } else { 0.0 } - m[i][j];
        }
    }
    a
}

/// Perron root of a non-negative 3×3 matrix.
///
/// Newton's method on `det(λI - M)` started from the largest row sum
/// decreases monotonically to the largest real root, because the
/// characteristic polynomial is convex to the right of its inflection point
/// `tr M / 3`, which never exceeds the Perron root. This stays accurate at
/// double roots, where power iteration stalls.
pub fn spectral_radius(m: &[[f64; 3]; 3]) -> f64 {
    let mut lam: f64 = m.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    if lam == 0.0 {
        return 0.0;
    }
    for _ in 0..2000 {
        let a = shifted(m, lam);
        let q = det3(&a);
        if q <= 0.0 {
            break;
        }
        let dq = a[1][1] * a[2][2] - a[1][2] * a[2][1] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[0][0] * a[1][1]
            - a[0][1] * a[1][0];
        if dq <= 0.0 {
            break;
        }
        let next = lam - q / dq;
        if !(next < lam) || next < 0.0 {
            break;
        }
        lam = next;
    }
    lam
}

/// Parameters of the critical vertex-weighted model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexWeightParams {
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
}

/// Closed-form `x(t)`, `y(t)` and `λ(t)` for the critical vertex-weighted
/// model. The radical is evaluated with principal complex branches; the
/// result is real up to rounding.
pub fn vertex_weight_params(t: f64) -> Result<VertexWeightParams> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain(format!("vertex weight t = {t} must be positive")));
    }
    let tc = Complex64::new(t, 0.0);
    let inner = -(tc - 1.0).powu(2) * tc * tc;
    let c = if inner.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { inner.powf(1.0 / 3.0) };
    let cbrt2 = 2f64.cbrt();
    let a = 6.0 * cbrt2 * c + 4.0 * (tc - 1.0) * tc + 4.0;
    let b = 3.0 * c / (cbrt2 * cbrt2) + (tc - 1.0) * tc + 1.0;
    let cc = -4.0 * (tc + 1.0) * (2.0 * tc - 1.0) * (tc - 2.0) / (9.0 * b.sqrt()) - 2.0 / 3.0 * cbrt2 * c
        + 8.0 / 9.0 * (tc - 2.0).powu(2)
        + 8.0 * (tc - 1.0) / 3.0;
    let xc = 2.0 / 3.0 - tc / 3.0 + a.sqrt() / 6.0 + 0.5 * cc.sqrt();
    if xc.im.abs() > 1e-9 * xc.re.abs().max(1.0) || !xc.re.is_finite() {
        return Err(Error::NumericalInstability(format!("x({t}) = {xc} is not real")));
    }
    let x = xc.re;
    let y = (x - 1.0).sqrt() * (t + x - 1.0).sqrt() / x.sqrt();
    let lambda = (x - 1.0).sqrt() * x.sqrt() * (t + x - 1.0).sqrt() / (2.0 * (t - 2.0) * x - t + 3.0 * x * x + 1.0);
    let p = VertexWeightParams { x, y, lambda };
    let v = geometric_eval(t, lambda, x, y).ok_or_else(|| Error::NumericalInstability("outside domain".into()))?;
    let scale = 1e-9;
    let r1 = v.fb - (1.0 - 1.0 / x);
    let r2 = v.fd - y;
    let r3 = crit_residual(x, &v);
    if r1.abs() > scale || r2.abs() > scale || r3.abs() > 1e-7 {
        return Err(Error::NumericalInstability(format!("closed form residuals {r1:e}, {r2:e}, {r3:e}")));
    }
    Ok(p)
}
