//! Four-type labelled mobiles.
//!
//! Vertices of type 1 have a geometric number of type-3 children, type 2
//! has exactly one type-4 child, and types 3 and 4 draw a pair `(k, k')` of
//! type-1 and type-2 children from the face weights, arranged uniformly at
//! random. Type-1 vertices carry integer labels and type-2 vertices
//! half-integers; labels are stored in half-units throughout.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::series::{size_distribution, Lattice};
use crate::weights::{WeightModel, WeightSeq};

/// Which map statistic the conditioning counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    Vertices,
    Edges,
    Faces,
}

impl Conditioning {
    /// Per-type weights of the tree size.
    pub fn gamma(self) -> [u32; 4] {
        match self {
            Conditioning::Vertices => [1, 0, 0, 0],
            Conditioning::Edges => [1, 0, 1, 1],
            Conditioning::Faces => [0, 0, 1, 1],
        }
    }

    /// Tree size `|T|_γ` of a mobile whose map has `n` of the counted
    /// objects, or `None` when no tree qualifies.
    pub fn tree_target(self, n: usize) -> Option<usize> {
        match self {
            Conditioning::Vertices => n.checked_sub(1),
            Conditioning::Edges => Some(n + 1),
            Conditioning::Faces => Some(n),
        }
    }

    /// Types that carry marks under this conditioning.
    pub fn mark_types(self) -> &'static [u8] {
        match self {
            Conditioning::Vertices => &[1],
            Conditioning::Edges => &[1, 3, 4],
            Conditioning::Faces => &[3, 4],
        }
    }
}

impl FromStr for Conditioning {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertices" | "vertex" => Ok(Conditioning::Vertices),
            "edges" | "edge" => Ok(Conditioning::Edges),
            "faces" | "face" => Ok(Conditioning::Faces),
            _ => Err(Error::Parse(format!("unknown conditioning {s:?}"))),
        }
    }
}

fn ln_factorial(n: u64) -> f64 {
    const SMALL: usize = 32;
    if (n as usize) < SMALL {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Whether a pair table serves type-3 or type-4 vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSide {
    Bullet,
    Diamond,
}

impl FaceSide {
    fn first_degree(self) -> usize {
        match self {
            FaceSide::Bullet => 2,
            FaceSide::Diamond => 1,
        }
    }
    fn ln_coef(self, k: u64, kp: u64) -> f64 {
        match self {
            FaceSide::Bullet => ln_binom(2 * k + kp + 1, k + 1) + ln_binom(k + kp, k),
            FaceSide::Diamond => ln_binom(2 * k + kp, k) + ln_binom(k + kp, k),
        }
    }
}

/// Law of `(k, k')` for a type-3 or type-4 vertex, optionally tilted by
/// `k h1 + k' h2`.
#[derive(Debug, Clone)]
pub struct PairTable {
    side: FaceSide,
    seq: WeightSeq,
    ln_x: f64,
    ln_y: f64,
    tilt: Option<(f64, f64)>,
    ln_total: f64,
    pairs: Vec<(u32, u32)>,
    probs: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    last_degree: usize,
    tail_mass: f64,
}

impl PairTable {
    /// `total` is the exact sum of all weights, used to certify the
    /// truncation of infinite supports.
    pub fn new(model: &WeightModel, side: FaceSide, tilt: Option<(f64, f64)>, total: f64) -> Result<Self> {
        let (x, y) = (model.x(), model.y());
        let mut t = PairTable {
            side,
            seq: model.seq().clone(),
            ln_x: x.ln(),
            ln_y: if y > 0.0 { y.ln() } else { f64::NEG_INFINITY },
            tilt,
            ln_total: total.ln(),
            pairs: Vec::new(),
            probs: Vec::new(),
            alias: WeightedAliasIndex::new(vec![1.0]).unwrap(),
            last_degree: 0,
            tail_mass: 0.0,
        };
        let max = model.seq().max_degree();
        let mut head = 0.0;
        let mut n = side.first_degree();
        loop {
            if let Some(m) = max {
                if n > m {
                    break;
                }
            } else if 1.0 - head < 1e-13 {
                break;
            }
            if n > 100_000 {
                return Err(Error::NumericalInstability("face degree law does not concentrate".into()));
            }
            for (k, kp, p) in t.degree_terms(n) {
                head += p;
                t.pairs.push((k, kp));
                t.probs.push(p);
            }
            t.last_degree = n;
            n += 1;
        }
        if max.is_some() {
            // normalise exactly over the finite support
            for p in t.probs.iter_mut() {
                *p /= head;
            }
        } else {
            t.tail_mass = (1.0 - head).max(0.0);
        }
        if t.probs.is_empty() {
            return Err(Error::Domain("empty face degree law".into()));
        }
        let mut w = t.probs.clone();
        w.push(t.tail_mass);
        t.alias = WeightedAliasIndex::new(w).map_err(|e| Error::NumericalInstability(format!("alias table: {e}")))?;
        Ok(t)
    }

    /// `(k, k', probability)` for q-index `n`.
    fn degree_terms(&self, n: usize) -> Vec<(u32, u32, f64)> {
        let q = self.seq.q(n);
        if q <= 0.0 {
            return Vec::new();
        }
        let base = n - self.side.first_degree();
        let mut out = Vec::new();
        for k in 0..=base / 2 {
            let kp = base - 2 * k;
            if kp > 0 && self.ln_y == f64::NEG_INFINITY {
                continue;
            }
            let tilt = match self.tilt {
                None => 1.0,
                Some((h1, h2)) => k as f64 * h1 + kp as f64 * h2,
            };
            if tilt <= 0.0 {
                continue;
            }
            let lw = self.side.ln_coef(k as u64, kp as u64) + q.ln() + k as f64 * self.ln_x
                + if kp > 0 { kp as f64 * self.ln_y } else { 0.0 }
                + tilt.ln()
                - self.ln_total;
            out.push((k as u32, kp as u32, lw.exp()));
        }
        out
    }

    pub fn sample(&self, rng: &mut Rng) -> (u32, u32) {
        let i = self.alias.sample(rng);
        if i < self.pairs.len() {
            return self.pairs[i];
        }
        // tail: walk the degrees beyond the table
        let mut u = rng.random::<f64>() * self.tail_mass;
        let mut n = self.last_degree + 1;
        let mut last = None;
        while n < self.last_degree + 1_000_000 {
            for (k, kp, p) in self.degree_terms(n) {
                last = Some((k, kp));
                u -= p;
                if u <= 0.0 {
                    return (k, kp);
                }
            }
            n += 1;
        }
        last.unwrap_or(self.pairs[self.pairs.len() - 1])
    }

    /// Exact probability of `(k, k')`.
    pub fn prob(&self, k: u32, kp: u32) -> f64 {
        let n = self.side.first_degree() + 2 * k as usize + kp as usize;
        self.degree_terms(n)
            .into_iter()
            .find(|&(a, b, _)| a == k && b == kp)
            .map_or(0.0, |t| t.2)
    }

    /// Probability mass outside the explicit table.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Explicit `(k, k', probability)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.pairs.iter().zip(self.probs.iter()).map(|(&(a, b), &p)| (a, b, p))
    }
}

/// Offspring laws of the four types at a solved weight sequence.
#[derive(Debug, Clone)]
pub struct Offspring {
    model: WeightModel,
    geo: Geometric,
    t3: PairTable,
    t4: Option<PairTable>,
}

impl Offspring {
    pub fn new(model: &WeightModel) -> Result<Self> {
        let v = model.at_solution();
        let geo = Geometric::new(1.0 / model.x()).map_err(|e| Error::Domain(format!("geometric law: {e}")))?;
        let t3 = PairTable::new(model, FaceSide::Bullet, None, v.fb)?;
        let t4 = if model.y() > 0.0 { Some(PairTable::new(model, FaceSide::Diamond, None, v.fd)?) } else { None };
        Ok(Offspring { model: model.clone(), geo, t3, t4 })
    }

    pub fn model(&self) -> &WeightModel {
        &self.model
    }
    pub fn x(&self) -> f64 {
        self.model.x()
    }
    pub fn y(&self) -> f64 {
        self.model.y()
    }
    pub fn table(&self, ty: u8) -> Option<&PairTable> {
        match ty {
            3 => Some(&self.t3),
            4 => self.t4.as_ref(),
            _ => None,
        }
    }

    /// Numbers of children of the two possible child types of `ty`.
    #[inline]
    pub fn sample_counts(&self, ty: u8, rng: &mut Rng) -> (u32, u32) {
        match ty {
            1 => (self.geo.sample(rng) as u32, 0),
            2 => (0, 1),
            3 => self.t3.sample(rng),
            4 => self.t4.as_ref().expect("type 4 needs y > 0").sample(rng),
            _ => unreachable!(),
        }
    }

    /// Mean offspring matrix `M[i][j]` = expected number of type-`j+1`
    /// children of a type-`i+1` vertex.
    pub fn mean_matrix(&self) -> [[f64; 4]; 4] {
        mean_matrix(&self.model)
    }
}

/// Mean offspring matrix of the four-type tree.
pub fn mean_matrix(model: &WeightModel) -> [[f64; 4]; 4] {
    let (x, y) = (model.x(), model.y());
    let v = model.at_solution();
    let mut m = [[0.0; 4]; 4];
    m[0][2] = x - 1.0;
    m[1][3] = 1.0;
    m[2][0] = x * v.fb_x / v.fb;
    m[2][1] = y * v.fb_y / v.fb;
    if y > 0.0 {
        m[3][0] = x * v.fd_x / v.fd;
        m[3][1] = y * v.fd_y / v.fd;
    }
    m
}

/// Left Perron vector `c` of the mean matrix at criticality, normalised by
/// `c_3 = 1`.
pub fn perron_left(model: &WeightModel) -> [f64; 4] {
    let m = mean_matrix(model);
    let r = m[2][1] / (1.0 - m[3][1]);
    [m[2][0] + r * m[3][0], r, 1.0, r]
}

/// Child types of `ty`.
#[inline]
pub fn child_types(ty: u8) -> (u8, u8) {
    match ty {
        1 => (3, 3),
        2 => (4, 4),
        _ => (1, 2),
    }
}

/// A rooted plane tree with typed vertices, children stored in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    pub(crate) ty: Vec<u8>,
    pub(crate) parent: Vec<u32>,
    pub(crate) pos: Vec<u32>,
    pub(crate) start: Vec<u32>,
    pub(crate) kids: Vec<u32>,
}

pub const NO_PARENT: u32 = u32::MAX;

impl TreeShape {
    pub fn len(&self) -> usize {
        self.ty.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ty.is_empty()
    }
    pub fn ty(&self, v: usize) -> u8 {
        self.ty[v]
    }
    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parent[v];
        (p != NO_PARENT).then_some(p as usize)
    }
    /// Index of `v` among its parent's children.
    pub fn position(&self, v: usize) -> usize {
        self.pos[v] as usize
    }
    pub fn children(&self, v: usize) -> &[u32] {
        &self.kids[self.start[v] as usize..self.start[v + 1] as usize]
    }
    pub fn degree(&self, v: usize) -> usize {
        (self.start[v + 1] - self.start[v]) as usize
    }
    pub fn type_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for &t in &self.ty {
            c[t as usize - 1] += 1;
        }
        c
    }
    pub fn gamma_size(&self, gamma: [u32; 4]) -> usize {
        let c = self.type_counts();
        (0..4).map(|i| c[i] * gamma[i] as usize).sum()
    }

    /// Build from per-vertex types and child lists; vertex 0 is the root.
    pub fn from_children(ty: Vec<u8>, children: &[Vec<u32>]) -> Result<Self> {
        let n = ty.len();
        if children.len() != n || n == 0 {
            return Err(Error::MalformedMobile("child lists do not match vertices".into()));
        }
        let mut parent = vec![NO_PARENT; n];
        let mut pos = vec![0; n];
        let mut start = Vec::with_capacity(n + 1);
        let mut kids = Vec::new();
        for (v, cs) in children.iter().enumerate() {
            start.push(kids.len() as u32);
            for (i, &c) in cs.iter().enumerate() {
                let c = c as usize;
                if c >= n || c == 0 || parent[c] != NO_PARENT {
                    return Err(Error::MalformedMobile(format!("vertex {c} has several parents")));
                }
                parent[c] = v as u32;
                pos[c] = i as u32;
                kids.push(c as u32);
            }
        }
        start.push(kids.len() as u32);
        let s = TreeShape { ty, parent, pos, start, kids };
        // every vertex reachable from the root
        let mut seen = 0;
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            seen += 1;
            stack.extend(s.children(v).iter().map(|&c| c as usize));
        }
        if seen != n {
            return Err(Error::MalformedMobile("vertices unreachable from the root".into()));
        }
        Ok(s)
    }

    /// Vertices in depth-first preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in self.children(v).iter().rev() {
                stack.push(c as usize);
            }
        }
        out
    }
}

/// Outcome of growing a tree under a size bound.
enum Grown {
    Done(usize),
    TooBig,
}

/// Breadth-first growth of `T(root)`; child order within a vertex is
/// canonical (type-1 before type-2) and randomised later. Gives up as soon
/// as the γ-size exceeds `limit`.
fn grow(
    off: &Offspring,
    root: u8,
    gamma: [u32; 4],
    limit: usize,
    rng: &mut Rng,
    mut build: Option<&mut Vec<(u8, u32)>>,
) -> Grown {
    let mut size = gamma[root as usize - 1] as usize;
    if size > limit {
        return Grown::TooBig;
    }
    let mut queue: VecDeque<(u8, u32)> = VecDeque::from([(root, 0)]);
    let mut next_id = 1u32;
    if let Some(b) = build.as_deref_mut() {
        b.clear();
        b.push((root, NO_PARENT));
    }
    while let Some((ty, id)) = queue.pop_front() {
        let (a, b) = off.sample_counts(ty, rng);
        let (ta, tb) = child_types(ty);
        size += a as usize * gamma[ta as usize - 1] as usize + b as usize * gamma[tb as usize - 1] as usize;
        if size > limit {
            return Grown::TooBig;
        }
        for (t, cnt) in [(ta, a), (tb, b)] {
            for _ in 0..cnt {
                queue.push_back((t, next_id));
                if let Some(bv) = build.as_deref_mut() {
                    bv.push((t, id));
                }
                next_id += 1;
            }
        }
    }
    Grown::Done(size)
}

fn shape_from_parents(list: &[(u8, u32)]) -> TreeShape {
    let n = list.len();
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, &(_, p)) in list.iter().enumerate().skip(1) {
        children[p as usize].push(i as u32);
    }
    TreeShape::from_children(list.iter().map(|e| e.0).collect(), &children).expect("grown trees are well formed")
}

/// Sample the shape of an unconditioned `T(root)`, failing beyond
/// `max_vertices`.
pub fn sample_shape(off: &Offspring, root: u8, max_vertices: usize, rng: &mut Rng) -> Result<TreeShape> {
    check_root(off, root)?;
    let mut list = Vec::new();
    match grow(off, root, [1, 1, 1, 1], max_vertices, rng, Some(&mut list)) {
        Grown::Done(_) => Ok(shape_from_parents(&list)),
        Grown::TooBig => Err(Error::SizeBudgetExceeded(max_vertices)),
    }
}

fn check_root(off: &Offspring, root: u8) -> Result<()> {
    if !(1..=4).contains(&root) {
        return Err(Error::TypeMismatch(format!("no vertex type {root}")));
    }
    if off.y() == 0.0 && (root == 2 || root == 4) {
        return Err(Error::TypeMismatch("types 2 and 4 do not occur for bipartite weights".into()));
    }
    Ok(())
}

/// Lower bound of a bridge step between vertex types `a` and `b`, in
/// half-units: -1 between two type-1 vertices, 0 between type-2 vertices
/// and -1/2 otherwise.
#[inline]
fn step_floor(a: u8, b: u8) -> i64 {
    match (a, b) {
        (1, 1) => -2,
        (2, 2) => 0,
        _ => -1,
    }
}

/// Uniform bridge of a type-3 or type-4 vertex whose children have the
/// given types, as label increments (half-units) along parent, children,
/// parent.
pub fn sample_bridge(ty: u8, kids: &[u8], rng: &mut Rng) -> Vec<i64> {
    let p = if ty == 3 { 1 } else { 2 };
    let d = kids.len();
    let cyc = |i: usize| if i == 0 || i == d + 1 { p } else { kids[i - 1] };
    let floors: Vec<i64> = (0..=d).map(|i| step_floor(cyc(i), cyc(i + 1))).collect();
    let s = (-floors.iter().sum::<i64>() / 2) as usize;
    // uniform weak composition of s into d + 1 parts via stars and bars
    let mut bars = rand::seq::index::sample(rng, s + d, d).into_vec();
    bars.sort_unstable();
    let mut parts = Vec::with_capacity(d + 1);
    let mut prev: i64 = -1;
    for &b in &bars {
        parts.push(b as i64 - prev - 1);
        prev = b as i64;
    }
    parts.push((s + d) as i64 - prev - 1);
    parts.iter().zip(floors.iter()).map(|(&b, &f)| 2 * b + f).collect()
}

/// Number of bridges for a type-3/4 vertex with children of these types.
pub fn bridge_count(ty: u8, kids: &[u8]) -> f64 {
    let p = if ty == 3 { 1 } else { 2 };
    let d = kids.len();
    let cyc = |i: usize| if i == 0 || i == d + 1 { p } else { kids[i - 1] };
    let s: i64 = -(0..=d).map(|i| step_floor(cyc(i), cyc(i + 1))).sum::<i64>() / 2;
    crate::weights::binom(s as usize + d, d)
}

/// All bridges for a type-3/4 vertex with children of these types.
pub fn all_bridges(ty: u8, kids: &[u8]) -> Vec<Vec<i64>> {
    let p = if ty == 3 { 1 } else { 2 };
    let d = kids.len();
    let cyc = |i: usize| if i == 0 || i == d + 1 { p } else { kids[i - 1] };
    let floors: Vec<i64> = (0..=d).map(|i| step_floor(cyc(i), cyc(i + 1))).collect();
    let s = -floors.iter().sum::<i64>() / 2;
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(left: i64, parts: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for b in 0..=left {
            cur.push(b);
            rec(left - b, parts - 1, cur, out);
            cur.pop();
        }
    }
    rec(s, d + 1, &mut cur, &mut out);
    out.into_iter().map(|parts| parts.iter().zip(floors.iter()).map(|(&b, &f)| 2 * b + f).collect()).collect()
}

/// A mobile: a tree shape with labels (half-units) and an optional mark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mobile {
    pub shape: TreeShape,
    pub labels: Vec<i64>,
    pub mark: Option<u32>,
}

/// Label in half-units, printed as an integer or a half-integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HalfLabel(pub i64);

impl fmt::Display for HalfLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad label {s:?}"));
        match s.strip_suffix("/2") {
            Some(num) => {
                let v: i64 = num.parse().map_err(|_| bad())?;
                if v % 2 == 0 {
                    return Err(bad());
                }
                Ok(HalfLabel(v))
            }
            None => Ok(HalfLabel(2 * s.parse::<i64>().map_err(|_| bad())?)),
        }
    }
}

impl Mobile {
    /// Labels from bridges given for every type-3/4 vertex with children
    /// (indexed by vertex), starting from the root label.
    pub fn assign_labels(shape: TreeShape, bridges: &[Option<Vec<i64>>], root_label: i64) -> Result<Mobile> {
        let n = shape.len();
        let mut labels = vec![0i64; n];
        labels[0] = root_label;
        for v in shape.preorder() {
            let kids = shape.children(v);
            match shape.ty(v) {
                1 | 2 => {
                    for &c in kids {
                        labels[c as usize] = labels[v];
                    }
                }
                _ => {
                    if kids.is_empty() {
                        continue;
                    }
                    let b = bridges
                        .get(v)
                        .and_then(|b| b.as_ref())
                        .ok_or_else(|| Error::MalformedMobile(format!("missing bridge at vertex {v}")))?;
                    if b.len() != kids.len() + 1 {
                        return Err(Error::MalformedMobile(format!("bridge at vertex {v} has wrong length")));
                    }
                    let mut l = labels[v];
                    for (i, &c) in kids.iter().enumerate() {
                        l += b[i];
                        labels[c as usize] = l;
                    }
                }
            }
        }
        let m = Mobile { shape, labels, mark: None };
        m.validate()?;
        Ok(m)
    }

    /// Randomise child order at type-3/4 vertices and draw uniform bridges.
    pub fn decorate(mut shape: TreeShape, rng: &mut Rng) -> Mobile {
        let n = shape.len();
        let mut bridges: Vec<Option<Vec<i64>>> = vec![None; n];
        for v in 0..n {
            let t = shape.ty[v];
            if (t == 3 || t == 4) && shape.degree(v) > 0 {
                let (a, b) = (shape.start[v] as usize, shape.start[v + 1] as usize);
                shape.kids[a..b].shuffle(rng);
                for i in a..b {
                    shape.pos[shape.kids[i] as usize] = (i - a) as u32;
                }
                let kt: Vec<u8> = shape.kids[a..b].iter().map(|&c| shape.ty[c as usize]).collect();
                bridges[v] = Some(sample_bridge(t, &kt, rng));
            }
        }
        let root_label = if shape.ty[0] == 2 { 1 } else { 0 };
        Mobile::assign_labels(shape, &bridges, root_label).expect("sampled bridges are valid")
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }
    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }
    pub fn ty(&self, v: usize) -> u8 {
        self.shape.ty(v)
    }
    pub fn label(&self, v: usize) -> HalfLabel {
        HalfLabel(self.labels[v])
    }
    pub fn root_type(&self) -> u8 {
        self.shape.ty[0]
    }

    /// Label increments around a type-3/4 vertex with children.
    pub fn bridge(&self, v: usize) -> Option<Vec<i64>> {
        let t = self.ty(v);
        let kids = self.shape.children(v);
        if !(t == 3 || t == 4) || kids.is_empty() {
            return None;
        }
        let mut out = Vec::with_capacity(kids.len() + 1);
        let mut prev = self.labels[v];
        for &c in kids {
            out.push(self.labels[c as usize] - prev);
            prev = self.labels[c as usize];
        }
        out.push(self.labels[v] - prev);
        Some(out)
    }

    /// Check types, label parities and bridge constraints.
    pub fn validate(&self) -> Result<()> {
        let s = &self.shape;
        let bad = |m: String| Err(Error::MalformedMobile(m));
        if s.is_empty() {
            return bad("empty tree".into());
        }
        let rt = s.ty(0);
        if rt != 1 && rt != 2 {
            return bad(format!("root has type {rt}"));
        }
        for v in 0..s.len() {
            let t = s.ty(v);
            if !(1..=4).contains(&t) {
                return bad(format!("vertex {v} has type {t}"));
            }
            let kids = s.children(v);
            let ok = match t {
                1 => kids.iter().all(|&c| s.ty(c as usize) == 3),
                2 => {
                    let limit = if v == 0 { 2 } else { 1 };
                    (1..=limit).contains(&kids.len()) && kids.iter().all(|&c| s.ty(c as usize) == 4)
                }
                _ => kids.iter().all(|&c| matches!(s.ty(c as usize), 1 | 2)),
            };
            if !ok {
                return bad(format!("vertex {v} of type {t} has children of the wrong types"));
            }
            let l = self.labels[v];
            match t {
                1 if l.rem_euclid(2) != 0 => return bad(format!("type-1 vertex {v} has a half-integer label")),
                2 if l.rem_euclid(2) != 1 => return bad(format!("type-2 vertex {v} has an integer label")),
                3 | 4 => {
                    if let Some(p) = s.parent(v) {
                        if self.labels[p] != l {
                            return bad(format!("vertex {v} does not carry its parent's label"));
                        }
                    }
                    if let Some(b) = self.bridge(v) {
                        let p = if t == 3 { 1 } else { 2 };
                        let mut cyc = vec![p];
                        cyc.extend(kids.iter().map(|&c| s.ty(c as usize)));
                        cyc.push(p);
                        for (i, &a) in b.iter().enumerate() {
                            if a < step_floor(cyc[i], cyc[i + 1]) {
                                return bad(format!("bridge at vertex {v} steps down too far"));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(m) = self.mark {
            if m as usize >= s.len() {
                return bad(format!("mark {m} out of range"));
            }
        }
        Ok(())
    }

    /// Subtree of the ancestor `k` generations above `v`, with `v` marked,
    /// or `None` if `v` has fewer than `k` ancestors.
    pub fn fringe(&self, v: usize, k: usize) -> Option<Mobile> {
        let mut a = v;
        for _ in 0..k {
            a = self.shape.parent(a)?;
        }
        let mut order = vec![a];
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            order.extend(self.shape.children(u).iter().map(|&c| c as usize));
        }
        let index: std::collections::HashMap<usize, u32> =
            order.iter().enumerate().map(|(i, &u)| (u, i as u32)).collect();
        let ty = order.iter().map(|&u| self.ty(u)).collect();
        let children: Vec<Vec<u32>> =
            order.iter().map(|&u| self.shape.children(u).iter().map(|c| index[&(*c as usize)]).collect()).collect();
        let shape = TreeShape::from_children(ty, &children).ok()?;
        Some(Mobile { shape, labels: order.iter().map(|&u| self.labels[u]).collect(), mark: Some(index[&v]) })
    }

    /// Nested text form: `type:label` with children in parentheses and `*`
    /// after the marked vertex, e.g. `1:0(3:0(1:-1 2:-1/2))`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut stack: Vec<(usize, bool)> = vec![(0, false)];
        while let Some((v, closing)) = stack.pop() {
            if closing {
                out.push(')');
                continue;
            }
            if !out.is_empty() && !out.ends_with('(') {
                out.push(' ');
            }
            out.push_str(&format!("{}:{}", self.ty(v), self.label(v)));
            if self.mark == Some(v as u32) {
                out.push('*');
            }
            let kids = self.shape.children(v);
            if !kids.is_empty() {
                out.push('(');
                stack.push((v, true));
                for &c in kids.iter().rev() {
                    stack.push((c as usize, false));
                }
            }
        }
        out
    }

    pub fn parse(s: &str) -> Result<Mobile> {
        let bytes = s.trim().as_bytes();
        let mut pos = 0;
        let mut ty = Vec::new();
        let mut labels = Vec::new();
        let mut children: Vec<Vec<u32>> = Vec::new();
        let mut mark = None;
        let mut stack: Vec<u32> = Vec::new();
        let err = |m: &str, p: usize| Error::Parse(format!("{m} at byte {p}"));
        loop {
            // one vertex token
            let start = pos;
            while pos < bytes.len() && !matches!(bytes[pos], b'(' | b')' | b' ' | b'*') {
                pos += 1;
            }
            let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("bad utf-8", start))?;
            let (t, l) = tok.split_once(':').ok_or_else(|| err("expected type:label", start))?;
            let t: u8 = t.parse().map_err(|_| err("bad type", start))?;
            let l: HalfLabel = l.parse()?;
            let id = ty.len() as u32;
            ty.push(t);
            labels.push(l.0);
            children.push(Vec::new());
            if let Some(&p) = stack.last() {
                children[p as usize].push(id);
            } else if id != 0 {
                return Err(err("several roots", start));
            }
            if pos < bytes.len() && bytes[pos] == b'*' {
                if mark.is_some() {
                    return Err(err("several marks", pos));
                }
                mark = Some(id);
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'(' {
                stack.push(id);
                pos += 1;
                continue;
            }
            while pos < bytes.len() && bytes[pos] == b')' {
                if stack.pop().is_none() {
                    return Err(err("unbalanced ')'", pos));
                }
                pos += 1;
            }
            if pos >= bytes.len() {
                break;
            }
            if bytes[pos] != b' ' || stack.is_empty() {
                return Err(err("unexpected character", pos));
            }
            pos += 1;
        }
        if !stack.is_empty() {
            return Err(err("unclosed '('", pos));
        }
        let shape = TreeShape::from_children(ty, &children)?;
        let m = Mobile { shape, labels, mark };
        m.validate()?;
        Ok(m)
    }
}

impl fmt::Display for Mobile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Sampler of unconditioned and size-conditioned mobiles.
#[derive(Debug, Clone)]
pub struct TreeSampler {
    pub offspring: Offspring,
    pub max_attempts: u64,
    pub max_vertices: usize,
}

impl TreeSampler {
    pub fn new(model: &WeightModel) -> Result<Self> {
        Ok(TreeSampler { offspring: Offspring::new(model)?, max_attempts: 1 << 40, max_vertices: 50_000_000 })
    }

    pub fn model(&self) -> &WeightModel {
        self.offspring.model()
    }

    /// Unconditioned labelled `T(root)`.
    pub fn sample_tree(&self, root: u8, rng: &mut Rng) -> Result<Mobile> {
        let shape = sample_shape(&self.offspring, root, self.max_vertices, rng)?;
        Ok(Mobile::decorate(shape, rng))
    }

    /// Exact distribution of `|T(root)|_γ` up to `n`.
    pub fn size_distribution(&self, root: u8, gamma: [u32; 4], n: usize) -> Result<Vec<f64>> {
        size_distribution(self.model(), root, gamma, n)
    }

    /// Reject the empty event before sampling.
    pub fn check_support(&self, root: u8, gamma: [u32; 4], n: usize) -> Result<f64> {
        check_root(&self.offspring, root)?;
        let probe = n.min(256);
        let p = self.size_distribution(root, gamma, probe)?;
        let ok = if n <= probe {
            p[n] > 0.0
        } else {
            Lattice::from_distribution(&p).is_some_and(|l| l.contains(n))
        };
        if !ok {
            return Err(Error::EmptyEvent(format!("T({root}) never has γ-size {n}")));
        }
        Ok(if n <= probe { p[n] } else { 0.0 })
    }

    /// Shape of `T(root)` conditioned on `|T|_γ = n`, by rejection with
    /// early abort. Attempts are first run without storing the tree and
    /// replayed from the saved generator state once accepted.
    pub fn sample_shape_conditioned(&self, root: u8, gamma: [u32; 4], n: usize, rng: &mut Rng) -> Result<TreeShape> {
        let mut list = Vec::new();
        for _ in 0..self.max_attempts {
            let saved = rng.clone();
            if let Grown::Done(m) = grow(&self.offspring, root, gamma, n, rng, None) {
                if m == n {
                    let mut replay = saved;
                    grow(&self.offspring, root, gamma, n, &mut replay, Some(&mut list));
                    return Ok(shape_from_parents(&list));
                }
            }
        }
        Err(Error::Timeout { attempts: self.max_attempts, expected_acceptance: 0.0 })
    }

    /// Labelled `T(root)` conditioned on `|T|_γ = n`.
    pub fn sample_conditioned(&self, root: u8, gamma: [u32; 4], n: usize, rng: &mut Rng) -> Result<Mobile> {
        self.check_support(root, gamma, n)?;
        let shape = self.sample_shape_conditioned(root, gamma, n, rng)?;
        Ok(Mobile::decorate(shape, rng))
    }

    /// `(|T_1|_γ, |T_2|_γ)`-conditioned pair attempt used for glued trees:
    /// the pair is accepted when the sizes sum to `n`.
    pub fn try_pair(&self, root: u8, gamma: [u32; 4], n: usize, rng: &mut Rng) -> Option<(TreeShape, TreeShape)> {
        let saved = rng.clone();
        let Grown::Done(a) = grow(&self.offspring, root, gamma, n, rng, None) else { return None };
        let Grown::Done(b) = grow(&self.offspring, root, gamma, n - a, rng, None) else { return None };
        if a + b != n {
            return None;
        }
        let mut replay = saved;
        let mut la = Vec::new();
        let mut lb = Vec::new();
        grow(&self.offspring, root, gamma, n, &mut replay, Some(&mut la));
        grow(&self.offspring, root, gamma, n - a, &mut replay, Some(&mut lb));
        Some((shape_from_parents(&la), shape_from_parents(&lb)))
    }

    /// γ-size of an unconditioned `T(root)`, or `None` once it exceeds `cap`.
    pub fn sample_size(&self, root: u8, gamma: [u32; 4], cap: usize, rng: &mut Rng) -> Option<usize> {
        match grow(&self.offspring, root, gamma, cap, rng, None) {
            Grown::Done(m) => Some(m),
            Grown::TooBig => None,
        }
    }

    /// One attempt at a single tree of γ-size exactly `n`.
    pub fn try_single(&self, root: u8, gamma: [u32; 4], n: usize, rng: &mut Rng) -> Option<TreeShape> {
        let saved = rng.clone();
        match grow(&self.offspring, root, gamma, n, rng, None) {
            Grown::Done(m) if m == n => {
                let mut replay = saved;
                let mut list = Vec::new();
                grow(&self.offspring, root, gamma, n, &mut replay, Some(&mut list));
                Some(shape_from_parents(&list))
            }
            _ => None,
        }
    }
}
