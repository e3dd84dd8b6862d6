//! Truncated power series and exact size distributions of the multitype
//! Galton–Watson trees.
//!
//! With `F_i(z) = E[z^{|T(i)|_γ}]`, the offspring laws give
//!
//! ```text
//! F_1 = z^γ1 (1/x) / (1 - (1 - 1/x) F_3)
//! F_2 = z^γ2 F_4
//! F_3 = z^γ3 f•(x F_1, y F_2) / f•(x, y)
//! F_4 = z^γ4 f◇(x F_1, y F_2) / f◇(x, y)
//! ```
//!
//! and iterating from zero converges coefficientwise.

use crate::error::{Error, Result};
use crate::weights::{WeightModel, WeightSeq};

/// Truncated product.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal of a series with non-zero constant term.
pub fn recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = 1.0 / a[0];
    for m in 1..n {
        let s: f64 = (1..=m).map(|j| a[j] * out[m - j]).sum();
        out[m] = -s / a[0];
    }
    out
}

/// Square root of a series with positive constant term.
pub fn sqrt(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = a[0].sqrt();
    for m in 1..n {
        let s: f64 = (1..m).map(|j| out[j] * out[m - j]).sum();
        out[m] = (a[m] - s) / (2.0 * out[0]);
    }
    out
}

fn shift(a: &[f64], by: usize) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n.saturating_sub(by) {
        out[i + by] = a[i];
    }
    out
}

fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|v| v * c).collect()
}

fn one_minus(a: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = a.iter().map(|v| -v).collect();
    out[0] += 1.0;
    out
}

fn powers(a: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut p = vec![{
        let mut one = vec![0.0; a.len()];
        one[0] = 1.0;
        one
    }];
    for i in 1..=k {
        let next = mul(&p[i - 1], a);
        p.push(next);
    }
    p
}

/// `(f•(X, Y), f◇(X, Y))` for series arguments.
fn apply(model: &WeightModel, xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    match model.seq() {
        WeightSeq::Finite { q } => {
            let dmax = *q.keys().next_back().unwrap();
            let px = powers(xs, dmax / 2);
            let py = powers(ys, dmax);
            let mut fb = vec![0.0; n];
            let mut fd = vec![0.0; n];
            for (&deg, &w) in q {
                if deg >= 2 {
                    for k in 0..=(deg - 2) / 2 {
                        let kp = deg - 2 - 2 * k;
                        let c = crate::weights::bullet_coef(k, kp) * w;
                        for (o, v) in fb.iter_mut().zip(mul(&px[k], &py[kp])) {
                            *o += c * v;
                        }
                    }
                }
                for k in 0..=(deg - 1) / 2 {
                    let kp = deg - 1 - 2 * k;
                    let c = crate::weights::diamond_coef(k, kp) * w;
                    for (o, v) in fd.iter_mut().zip(mul(&px[k], &py[kp])) {
                        *o += c * v;
                    }
                }
            }
            (fb, fd)
        }
        WeightSeq::Geometric { t, lambda } => {
            let (t, lam) = (*t, *lambda);
            let u = one_minus(&scale(ys, lam));
            let ru = recip(&u);
            let w = scale(&mul(xs, &mul(&ru, &ru)), 4.0 * lam * lam);
            let z = sqrt(&one_minus(&w));
            let mut z1 = z.clone();
            z1[0] += 1.0;
            let den = mul(&mul(&u, &u), &mul(&z, &z1));
            let fb = scale(&recip(&den), 2.0 * t * lam * lam);
            let fd = scale(&recip(&mul(&u, &z)), t * lam);
            (fb, fd)
        }
        WeightSeq::CriticalGeometric { .. } => unreachable!("normalized"),
    }
}

/// `P(|T(root)|_γ = m)` for `m = 0..=n`.
pub fn size_distribution(model: &WeightModel, root_type: u8, gamma: [u32; 4], n: usize) -> Result<Vec<f64>> {
    if !(1..=4).contains(&root_type) {
        return Err(Error::TypeMismatch(format!("root type {root_type}")));
    }
    let (x, y) = (model.x(), model.y());
    if y == 0.0 && (root_type == 2 || root_type == 4) {
        return Err(Error::TypeMismatch("types 2 and 4 do not occur when y = 0".into()));
    }
    let len = n + 1;
    let v = model.at_solution();
    let mut f = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let g = gamma.map(|c| c as usize);
    for iter in 0.. {
        if iter > 200_000 {
            return Err(Error::NonConvergence("size distribution fixed point".into()));
        }
        let f1 = shift(&scale(&recip(&one_minus(&scale(&f[2], 1.0 - 1.0 / x))), 1.0 / x), g[0]);
        let f2 = shift(&f[3], g[1]);
        let (fb, fd) = apply(model, &scale(&f[0], x), &scale(&f[1], y));
        let f3 = shift(&scale(&fb, 1.0 / v.fb), g[2]);
        let f4 = if y == 0.0 { vec![0.0; len] } else { shift(&scale(&fd, 1.0 / v.fd), g[3]) };
        let next = [f1, f2, f3, f4];
        let diff = next
            .iter()
            .zip(f.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max);
        f = next;
        if diff <= 1e-17 {
            break;
        }
    }
    Ok(f[root_type as usize - 1].clone())
}

/// Arithmetic support of a size distribution: sizes with positive mass lie
/// in `offset + period · ℕ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub offset: usize,
    pub period: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Lattice {
    /// Read the lattice off a probability vector.
    pub fn from_distribution(p: &[f64]) -> Option<Lattice> {
        let support: Vec<usize> = p.iter().enumerate().filter(|(_, &v)| v > 1e-300).map(|(i, _)| i).collect();
        let &offset = support.first()?;
        let period = support.iter().fold(0, |g, &m| gcd(g, m - offset));
        Some(Lattice { offset, period: period.max(1) })
    }

    pub fn contains(&self, m: usize) -> bool {
        m >= self.offset && (m - self.offset) % self.period == 0
    }
}
