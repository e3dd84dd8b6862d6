//! The infinite mobile with a backwards-growing spine and balls of the
//! limiting map.
//!
//! A size-biased block is a killed tree `T^κ` (non-root vertices of type
//! `κ` get no offspring) with a marked vertex, drawn with probability
//! proportional to `P(T^κ = T)` per marked vertex. It is sampled top-down:
//! `h_i` is the expected number of markable vertices below a non-root
//! vertex of type `i`; a spine vertex of type `i` is the mark with
//! probability `[i = τ] / h_i`, otherwise its offspring are tilted by the
//! sum of `h` over its children and the spine continues into a child
//! chosen proportionally to `h`.
//!
//! The infinite tree stacks such blocks: the first one is marked at a
//! vertex of type `η`, every further block is marked at a type-1 vertex
//! identified with the root of the block below. Off-spine subtrees are
//! plain Galton–Watson trees, generated only when the exploration reaches
//! them, so every ball is computed exactly.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::map::{PlanarMap, RootKind};
use crate::mobile::{
    child_types, mean_matrix, perron_left, sample_bridge, FaceSide, Mobile, Offspring, PairTable, TreeShape,
};
use crate::rng::Rng;
use crate::topology::{ball_code, BallCode};
use crate::weights::WeightModel;

/// Expected numbers of markable vertices below each type, and the tilted
/// offspring tables they induce.
#[derive(Debug, Clone)]
pub struct Tilt {
    pub kappa: u8,
    pub tau: u8,
    pub h: [f64; 4],
    /// Expected number of markable vertices below the block root.
    pub root_mean: f64,
    t3: Option<PairTable>,
    t4: Option<PairTable>,
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

impl Tilt {
    pub fn new(model: &WeightModel, kappa: u8, tau: u8) -> Result<Self> {
        if !(1..=4).contains(&kappa) || !(1..=4).contains(&tau) {
            return Err(Error::TypeMismatch(format!("types κ={kappa}, τ={tau}")));
        }
        let m = mean_matrix(model);
        let k = kappa as usize - 1;
        let others: Vec<usize> = (0..4).filter(|&i| i != k).collect();
        let hk = if kappa == tau { 1.0 } else { 0.0 };
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for (r, &i) in others.iter().enumerate() {
            for (c, &j) in others.iter().enumerate() {
                a[r][c] = if i == j { 1.0 } else { 0.0 } - m[i][j];
            }
            b[r] = if i + 1 == tau as usize { 1.0 } else { 0.0 } + m[i][k] * hk;
        }
        let sol = solve3(a, b).ok_or_else(|| Error::NotCritical("singular tilt system".into()))?;
        let mut h = [0.0; 4];
        h[k] = hk;
        for (r, &i) in others.iter().enumerate() {
            h[i] = sol[r];
        }
        if h.iter().any(|v| !v.is_finite() || *v < -1e-12) {
            return Err(Error::NotCritical(format!("marked-vertex means {h:?} are not finite")));
        }
        let h = h.map(|v| v.max(0.0));
        let root_mean: f64 = (0..4).map(|j| m[k][j] * h[j]).sum();
        if !(root_mean > 0.0 && root_mean.is_finite()) {
            return Err(Error::NotCritical(format!("block normaliser {root_mean}")));
        }
        let v = model.at_solution();
        let (x, y) = (model.x(), model.y());
        let t3 = {
            let total = h[0] * x * v.fb_x + h[1] * y * v.fb_y;
            (total > 0.0).then(|| PairTable::new(model, FaceSide::Bullet, Some((h[0], h[1])), total)).transpose()?
        };
        let t4 = {
            let total = h[0] * x * v.fd_x + h[1] * y * v.fd_y;
            (y > 0.0 && total > 0.0)
                .then(|| PairTable::new(model, FaceSide::Diamond, Some((h[0], h[1])), total))
                .transpose()?
        };
        Ok(Tilt { kappa, tau, h, root_mean, t3, t4 })
    }
}

/// One vertex of a sampled spine path: its type, its children's types and
/// which child continues the spine (`None` at the marked vertex).
#[derive(Debug, Clone)]
pub struct PathVertex {
    pub ty: u8,
    pub kids: Vec<u8>,
    pub spine: Option<usize>,
}

/// Solved model plus everything needed to grow limit trees.
#[derive(Debug, Clone)]
pub struct LimitModel {
    pub offspring: Offspring,
    pub perron: [f64; 4],
    geo: Geometric,
    spine: Tilt,
}

impl LimitModel {
    pub fn new(model: &WeightModel) -> Result<Self> {
        if !model.solution.status.is_critical() {
            return Err(Error::NotCritical(format!("status {}", model.solution.status.as_str())));
        }
        let offspring = Offspring::new(model)?;
        let spine = Tilt::new(model, 1, 1)?;
        if (spine.root_mean - 1.0).abs() > 1e-6 {
            return Err(Error::NotCritical(format!("E[#1 T^1] = {} instead of 2", 1.0 + spine.root_mean)));
        }
        let geo = Geometric::new(1.0 / model.x()).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(LimitModel { offspring, perron: perron_left(model), geo, spine })
    }

    pub fn model(&self) -> &WeightModel {
        self.offspring.model()
    }

    /// Law of the type of the marked vertex: proportional to `γ_i c_i`.
    pub fn eta_law(&self, gamma: [u32; 4]) -> [f64; 4] {
        let w: Vec<f64> = (0..4).map(|i| gamma[i] as f64 * self.perron[i]).collect();
        let s: f64 = w.iter().sum();
        [w[0] / s, w[1] / s, w[2] / s, w[3] / s]
    }

    pub fn sample_eta(&self, gamma: [u32; 4], rng: &mut Rng) -> u8 {
        let p = self.eta_law(gamma);
        let mut u: f64 = rng.random();
        for (i, &pi) in p.iter().enumerate() {
            if u < pi {
                return i as u8 + 1;
            }
            u -= pi;
        }
        (0..4).rev().find(|&i| p[i] > 0.0).unwrap() as u8 + 1
    }

    /// Children of a spine vertex of type `ty` (not killed), tilted by `h`,
    /// with the spine child chosen proportionally to `h`.
    fn tilted_children(&self, t: &Tilt, ty: u8, rng: &mut Rng) -> (Vec<u8>, usize) {
        match ty {
            1 => {
                let k = 1 + self.geo.sample(rng) + self.geo.sample(rng);
                (vec![3; k as usize], rng.random_range(0..k as usize))
            }
            2 => (vec![4], 0),
            _ => {
                let table = if ty == 3 { t.t3.as_ref() } else { t.t4.as_ref() };
                let (k, kp) = table.expect("spine reaches this type only with positive tilt").sample(rng);
                let mut kids: Vec<u8> = std::iter::repeat_n(1u8, k as usize).chain(std::iter::repeat_n(2u8, kp as usize)).collect();
                kids.shuffle(rng);
                let w1 = k as f64 * t.h[0];
                let w2 = kp as f64 * t.h[1];
                let want = if rng.random::<f64>() * (w1 + w2) < w1 { 1 } else { 2 };
                let n_want = if want == 1 { k } else { kp } as usize;
                let pick = rng.random_range(0..n_want);
                let idx = kids.iter().enumerate().filter(|(_, &c)| c == want).nth(pick).unwrap().0;
                (kids, idx)
            }
        }
    }

    /// Spine path of a size-biased block from its root to the marked vertex.
    pub fn sample_path(&self, t: &Tilt, rng: &mut Rng) -> Vec<PathVertex> {
        let mut out = Vec::new();
        let mut ty = t.kappa;
        let mut root = true;
        loop {
            if !root {
                let i = ty as usize - 1;
                if ty == t.kappa {
                    out.push(PathVertex { ty, kids: Vec::new(), spine: None });
                    return out;
                }
                if ty == t.tau && rng.random::<f64>() * t.h[i] < 1.0 {
                    out.push(PathVertex { ty, kids: Vec::new(), spine: None });
                    return out;
                }
            }
            root = false;
            let (kids, s) = self.tilted_children(t, ty, rng);
            let next = kids[s];
            out.push(PathVertex { ty, kids, spine: Some(s) });
            ty = next;
        }
    }

    /// A size-biased block `T̂^κ` (marked at type `κ`) or `T̂^{κ,τ}`, with
    /// all off-spine subtrees grown as killed trees.
    pub fn sample_biased_block(&self, kappa: u8, tau: u8, max_vertices: usize, rng: &mut Rng) -> Result<Mobile> {
        let t = if kappa == 1 && tau == 1 { self.spine.clone() } else { Tilt::new(self.model(), kappa, tau)? };
        if kappa == tau && (t.root_mean - 1.0).abs() > 1e-6 {
            return Err(Error::NotCritical(format!("E[#κ T^κ] = {}", 1.0 + t.root_mean)));
        }
        let path = self.sample_path(&t, rng);
        let mut list: Vec<(u8, u32)> = vec![(path[0].ty, u32::MAX)];
        let mut pending: VecDeque<u32> = VecDeque::new();
        let mut cur = 0u32;
        let mut mark = 0u32;
        for pv in &path {
            match pv.spine {
                None => {
                    mark = cur;
                    // the marked vertex keeps its own killed subtree unless it is a killed leaf
                    if pv.ty != kappa {
                        pending.push_back(cur);
                    }
                }
                Some(s) => {
                    let base = list.len() as u32;
                    for &c in &pv.kids {
                        list.push((c, cur));
                    }
                    for i in 0..pv.kids.len() {
                        if i != s {
                            pending.push_back(base + i as u32);
                        }
                    }
                    cur = base + s as u32;
                }
            }
        }
        while let Some(v) = pending.pop_front() {
            let ty = list[v as usize].0;
            if ty == kappa {
                continue;
            }
            let (a, b) = self.offspring.sample_counts(ty, rng);
            let (ta, tb) = child_types(ty);
            for (ct, cnt) in [(ta, a), (tb, b)] {
                for _ in 0..cnt {
                    pending.push_back(list.len() as u32);
                    list.push((ct, v));
                }
            }
            if list.len() > max_vertices {
                return Err(Error::SizeBudgetExceeded(max_vertices));
            }
        }
        let n = list.len();
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, &(_, p)) in list.iter().enumerate().skip(1) {
            children[p as usize].push(i as u32);
        }
        let shape = TreeShape::from_children(list.iter().map(|e| e.0).collect(), &children)?;
        let mut m = Mobile::decorate(shape, rng);
        m.mark = Some(mark);
        Ok(m)
    }
}

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Node {
    ty: u8,
    parent: u32,
    pos: u32,
    kids: Option<Vec<u32>>,
    label: i64,
}

/// Infinite mobile grown lazily around a backwards spine.
pub struct SpineMobile<'a> {
    lm: &'a LimitModel,
    nodes: Vec<Node>,
    top: u32,
    /// Roots of the blocks, bottom to top.
    spine_roots: Vec<u32>,
    marked: u32,
    rng: Rng,
    work: u64,
    budget: u64,
}

impl<'a> SpineMobile<'a> {
    /// Start with the first block, marked at a vertex of type `eta`.
    pub fn new(lm: &'a LimitModel, eta: u8, rng: Rng, budget: u64) -> Result<Self> {
        let mut s = SpineMobile {
            lm,
            nodes: Vec::new(),
            top: NONE,
            spine_roots: Vec::new(),
            marked: NONE,
            rng,
            work: 0,
            budget,
        };
        let tilt = if eta == 1 { lm.spine.clone() } else { Tilt::new(lm.model(), 1, eta)? };
        let path = lm.sample_path(&tilt, &mut s.rng);
        let target = if matches!(eta, 2 | 4) { 1 } else { 0 };
        s.place_block(&path, None, target);
        Ok(s)
    }

    /// Materialise a block path. The bottom vertex is `join` if given,
    /// otherwise a fresh lazily-expanded vertex whose label is set to
    /// `bottom_label`; the block labels are shifted accordingly.
    fn place_block(&mut self, path: &[PathVertex], join: Option<u32>, bottom_label: i64) {
        let first_new = self.nodes.len();
        let root = self.nodes.len() as u32;
        self.nodes.push(Node { ty: path[0].ty, parent: NONE, pos: 0, kids: None, label: 0 });
        let mut cur = root;
        let last = path.len() - 1;
        for (step, pv) in path.iter().enumerate().take(last) {
            let s = pv.spine.expect("inner path vertices continue the spine");
            let parent_label = self.nodes[cur as usize].label;
            let labels: Vec<i64> = if matches!(pv.ty, 3 | 4) {
                let b = sample_bridge(pv.ty, &pv.kids, &mut self.rng);
                let mut l = parent_label;
                b[..pv.kids.len()]
                    .iter()
                    .map(|d| {
                        l += d;
                        l
                    })
                    .collect()
            } else {
                vec![parent_label; pv.kids.len()]
            };
            let mut ids = Vec::with_capacity(pv.kids.len());
            for (i, &c) in pv.kids.iter().enumerate() {
                match join {
                    Some(j) if i == s && step + 1 == last => {
                        self.nodes[j as usize].parent = cur;
                        self.nodes[j as usize].pos = i as u32;
                        ids.push(j);
                    }
                    _ => {
                        ids.push(self.nodes.len() as u32);
                        self.nodes.push(Node { ty: c, parent: cur, pos: i as u32, kids: None, label: labels[i] });
                    }
                }
            }
            self.nodes[cur as usize].kids = Some(ids.clone());
            if step + 1 == last {
                let shift = match join {
                    Some(j) => self.nodes[j as usize].label - labels[s],
                    None => bottom_label - labels[s],
                };
                for n in &mut self.nodes[first_new..] {
                    n.label += shift;
                }
                if join.is_none() {
                    self.marked = ids[s];
                }
            }
            cur = ids[s];
        }
        if last == 0 {
            // the block root is itself the mark
            self.nodes[root as usize].label = bottom_label;
            self.marked = root;
        }
        self.top = root;
        self.spine_roots.push(root);
    }

    /// Append one block above the current top of the spine and return the
    /// label step between the old and new block roots (half-units).
    pub fn extend_spine(&mut self) -> i64 {
        let path = self.lm.sample_path(&self.lm.spine, &mut self.rng);
        let old = self.top;
        self.place_block(&path, Some(old), 0);
        self.work += path.len() as u64;
        self.nodes[self.top as usize].label - self.nodes[old as usize].label
    }

    /// Work units spent so far (vertex expansions and contour steps).
    pub fn work(&self) -> u64 {
        self.work
    }
    pub fn generated(&self) -> usize {
        self.nodes.len()
    }

    pub fn marked(&self) -> u32 {
        self.marked
    }
    pub fn marked_type(&self) -> u8 {
        self.nodes[self.marked as usize].ty
    }
    /// Labels of the block roots from the bottom up.
    pub fn spine_labels(&self) -> Vec<i64> {
        self.spine_roots.iter().map(|&v| self.nodes[v as usize].label).collect()
    }
    /// Labels (half-units) of the labelled ancestors of the marked vertex,
    /// nearest first.
    pub fn ancestor_labels(&self) -> Vec<i64> {
        let mut out = Vec::new();
        let mut v = self.nodes[self.marked as usize].parent;
        while v != NONE {
            let n = &self.nodes[v as usize];
            if n.ty <= 2 {
                out.push(n.label);
            }
            v = n.parent;
        }
        out
    }
    pub fn block_count(&self) -> usize {
        self.spine_roots.len()
    }
    /// Number of ancestors of the marked vertex generated so far.
    pub fn marked_depth(&self) -> usize {
        let mut d = 0;
        let mut v = self.marked;
        while self.nodes[v as usize].parent != NONE {
            v = self.nodes[v as usize].parent;
            d += 1;
        }
        d
    }

    fn tick(&mut self) -> Result<()> {
        self.work += 1;
        if self.work > self.budget {
            return Err(Error::ExplorationBudget(self.budget));
        }
        Ok(())
    }

    fn expand(&mut self, v: u32) -> Result<()> {
        if self.nodes[v as usize].kids.is_some() {
            return Ok(());
        }
        self.tick()?;
        let ty = self.nodes[v as usize].ty;
        let label = self.nodes[v as usize].label;
        let (a, b) = self.lm.offspring.sample_counts(ty, &mut self.rng);
        let (ta, tb) = child_types(ty);
        let mut kids: Vec<u8> = std::iter::repeat_n(ta, a as usize).chain(std::iter::repeat_n(tb, b as usize)).collect();
        let labels: Vec<i64> = if matches!(ty, 3 | 4) && !kids.is_empty() {
            kids.shuffle(&mut self.rng);
            let br = sample_bridge(ty, &kids, &mut self.rng);
            let mut l = label;
            br[..kids.len()].iter().map(|d| {
                l += d;
                l
            }).collect()
        } else {
            vec![label; kids.len()]
        };
        let mut ids = Vec::with_capacity(kids.len());
        for (i, &c) in kids.iter().enumerate() {
            ids.push(self.nodes.len() as u32);
            self.nodes.push(Node { ty: c, parent: v, pos: i as u32, kids: None, label: labels[i] });
        }
        self.nodes[v as usize].kids = Some(ids);
        Ok(())
    }

    fn kid(&mut self, v: u32, i: usize) -> Result<u32> {
        self.expand(v)?;
        Ok(self.nodes[v as usize].kids.as_ref().unwrap()[i])
    }

    fn degree(&mut self, v: u32) -> Result<usize> {
        self.expand(v)?;
        Ok(self.nodes[v as usize].kids.as_ref().unwrap().len())
    }

    fn parent(&mut self, v: u32) -> Result<u32> {
        while self.nodes[v as usize].parent == NONE {
            self.tick()?;
            self.extend_spine();
        }
        Ok(self.nodes[v as usize].parent)
    }

    /// Next corner in contour order.
    fn next(&mut self, (v, c): (u32, u32)) -> Result<(u32, u32)> {
        self.tick()?;
        let d = self.degree(v)? as u32;
        if c < d {
            let w = self.kid(v, c as usize)?;
            if self.degree(w)? > 0 {
                return Ok((self.kid(w, 0)?, 0));
            }
            return Ok((v, c + 1));
        }
        let w = self.parent(v)?;
        let i = self.nodes[v as usize].pos as usize;
        if i + 1 < self.degree(w)? {
            return Ok((self.kid(w, i + 1)?, 0));
        }
        let p = self.parent(w)?;
        Ok((p, self.nodes[w as usize].pos + 1))
    }

    /// Previous corner in contour order.
    fn prev(&mut self, (v, c): (u32, u32)) -> Result<(u32, u32)> {
        self.tick()?;
        if c > 0 {
            let w = self.kid(v, c as usize - 1)?;
            let dw = self.degree(w)?;
            if dw > 0 {
                let last = self.kid(w, dw - 1)?;
                return Ok((last, self.degree(last)? as u32));
            }
            return Ok((v, c - 1));
        }
        let w = self.parent(v)?;
        let i = self.nodes[v as usize].pos as usize;
        if i > 0 {
            let s = self.kid(w, i - 1)?;
            return Ok((s, self.degree(s)? as u32));
        }
        let p = self.parent(w)?;
        Ok((p, self.nodes[w as usize].pos))
    }

    fn label(&self, v: u32) -> i64 {
        self.nodes[v as usize].label
    }
    fn ty(&self, v: u32) -> u8 {
        self.nodes[v as usize].ty
    }
}

/// Dart of the limiting map: `(vertex, corner, end)` where end `0` is the
/// outgoing end of the arc from a type-1 corner and end `1` the incoming
/// end of the arc from any corner.
type Dart = (u32, u32, u8);

/// Breadth-first exploration of the limiting map.
pub struct Explorer<'a> {
    pub spine: SpineMobile<'a>,
    succ: HashMap<(u32, u32), (u32, u32)>,
    desc: HashMap<u32, Vec<Dart>>,
}

impl<'a> Explorer<'a> {
    pub fn new(spine: SpineMobile<'a>) -> Self {
        Explorer { spine, succ: HashMap::new(), desc: HashMap::new() }
    }

    fn successor(&mut self, c: (u32, u32)) -> Result<(u32, u32)> {
        if let Some(&s) = self.succ.get(&c) {
            return Ok(s);
        }
        let l = self.spine.label(c.0);
        let thr = l - if self.spine.ty(c.0) == 1 { 2 } else { 1 };
        let mut cur = c;
        loop {
            cur = self.spine.next(cur)?;
            if self.spine.label(cur.0) <= thr {
                self.succ.insert(c, cur);
                return Ok(cur);
            }
        }
    }

    /// Sources of arcs ending at corner `c` of a type-1 vertex, closest
    /// first.
    fn incoming(&mut self, c: (u32, u32)) -> Result<Vec<(u32, u32)>> {
        let l = self.spine.label(c.0);
        let mut out = Vec::new();
        let mut cur = c;
        loop {
            cur = self.spine.prev(cur)?;
            let lc = self.spine.label(cur.0);
            if lc <= l {
                return Ok(out);
            }
            let t = self.spine.ty(cur.0);
            if (t == 1 && lc == l + 2) || (t == 2 && lc == l + 1) {
                self.succ.insert(cur, c);
                out.push(cur);
            }
        }
    }

    fn origin(&mut self, d: Dart) -> Result<u32> {
        if d.2 == 0 {
            Ok(d.0)
        } else {
            Ok(self.successor((d.0, d.1))?.0)
        }
    }

    fn alpha(&self, d: Dart) -> Dart {
        if self.spine.ty(d.0) == 1 {
            (d.0, d.1, 1 - d.2)
        } else {
            (d.0, 1 - d.1, 1)
        }
    }

    /// Darts leaving the type-1 vertex `u`, counterclockwise.
    fn describe(&mut self, u: u32) -> Result<Vec<Dart>> {
        if let Some(d) = self.desc.get(&u) {
            return Ok(d.clone());
        }
        let deg = self.spine.degree(u)? as u32;
        let mut out = Vec::new();
        for c in 0..=deg {
            for s in self.incoming((u, c))? {
                out.push((s.0, s.1, 1));
            }
            out.push((u, c, 0));
        }
        self.desc.insert(u, out.clone());
        Ok(out)
    }

    fn sigma(&mut self, d: Dart) -> Result<Dart> {
        let o = self.origin(d)?;
        let list = self.describe(o)?;
        let i = list.iter().position(|&e| e == d).expect("dart is listed at its origin");
        Ok(list[(i + 1) % list.len()])
    }

    /// Root dart and root vertex set for the mark, per kind.
    fn root(&mut self, kind: RootKind, coin: bool) -> Result<(Option<Dart>, Vec<u32>)> {
        let w = self.spine.marked();
        match kind {
            RootKind::Vertex => {
                if self.spine.ty(w) != 1 {
                    return Err(Error::TypeMismatch("vertex marks need a type-1 vertex".into()));
                }
                let d = self.describe(w)?[0];
                Ok((Some(d), vec![w]))
            }
            RootKind::HalfEdge => {
                let d = match self.spine.ty(w) {
                    1 => (w, 0, 0),
                    3 => {
                        let p = self.spine.parent(w)?;
                        (p, self.spine.nodes[w as usize].pos + 1, 0)
                    }
                    4 => {
                        let z = self.spine.parent(w)?;
                        (z, 0, 1)
                    }
                    _ => return Err(Error::TypeMismatch("half-edge marks need type 1, 3 or 4".into())),
                };
                let d = if coin { self.alpha(d) } else { d };
                let a = self.origin(d)?;
                let b = self.origin(self.alpha(d))?;
                Ok((Some(d), vec![a, b]))
            }
            RootKind::Face => {
                if !matches!(self.spine.ty(w), 3 | 4) {
                    return Err(Error::TypeMismatch("face marks need type 3 or 4".into()));
                }
                let p = self.spine.parent(w)?;
                let start: Dart = (p, self.spine.nodes[w as usize].pos, 1);
                // walk the face on the right of `start`
                let mut verts = Vec::new();
                let mut d = start;
                loop {
                    verts.push(self.origin(d)?);
                    d = self.sigma(self.alpha(d))?;
                    if d == start {
                        break;
                    }
                }
                Ok((Some(self.alpha(start)), verts))
            }
        }
    }

    /// Canonical code of the radius-`k` ball around the mark.
    pub fn ball(&mut self, kind: RootKind, k: usize, coin: bool) -> Result<BallCode> {
        if k == 0 && kind == RootKind::Vertex {
            return Ok(ball_code(&PlanarMap::vertex_map(), kind, 0));
        }
        let (root, roots) = self.root(kind, coin)?;
        let root = root.unwrap();
        let mut dist: HashMap<u32, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for &v in &roots {
            if dist.insert(v, 0).is_none() {
                queue.push_back(v);
            }
        }
        let mut kept: Vec<Dart> = Vec::new();
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            let darts = self.describe(v)?;
            if dv + 1 > k {
                continue;
            }
            for d in darts {
                let a = self.alpha(d);
                kept.push(d);
                kept.push(a);
                let w = self.origin(a)?;
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        if k == 0 {
            kept.push(root);
            kept.push(self.alpha(root));
            if kind == RootKind::Face {
                let mut d = self.alpha(root);
                loop {
                    kept.push(d);
                    kept.push(self.alpha(d));
                    d = self.sigma(self.alpha(d))?;
                    if d == self.alpha(root) {
                        break;
                    }
                }
            }
        }
        kept.sort_unstable();
        kept.dedup();
        let index: HashMap<Dart, usize> = kept.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let mut alpha = Vec::with_capacity(kept.len());
        let mut sigma = Vec::with_capacity(kept.len());
        for &d in &kept {
            alpha.push(index[&self.alpha(d)]);
            let o = self.origin(d)?;
            let list = self.describe(o)?;
            let i = list.iter().position(|&e| e == d).unwrap();
            let mut j = (i + 1) % list.len();
            while !index.contains_key(&list[j]) {
                j = (j + 1) % list.len();
            }
            sigma.push(index[&list[j]]);
        }
        let map = PlanarMap::new(alpha, sigma, Some(index[&root]), None)?;
        Ok(ball_code(&map, kind, k))
    }
}

/// γ-vector whose marked types correspond to a root kind.
pub fn kind_gamma(kind: RootKind) -> [u32; 4] {
    match kind {
        RootKind::Vertex => [1, 0, 0, 0],
        RootKind::HalfEdge => [1, 0, 1, 1],
        RootKind::Face => [0, 0, 1, 1],
    }
}

/// Sample the radius-`k` ball of the limiting map around a mark of `kind`.
pub fn limit_ball(lm: &LimitModel, kind: RootKind, k: usize, budget: u64, mut rng: Rng) -> Result<BallCode> {
    let eta = lm.sample_eta(kind_gamma(kind), &mut rng);
    let coin = rng.random::<bool>();
    let spine = SpineMobile::new(lm, eta, rng, budget)?;
    Explorer::new(spine).ball(kind, k, coin)
}
