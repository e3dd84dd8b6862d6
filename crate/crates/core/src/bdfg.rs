//! The BDFG bijection from labelled mobiles to pointed rooted maps.
//!
//! Corners of type-1 and type-2 vertices are listed in contour order. A
//! type-1 corner with label `l` is joined by an arc to the first later
//! corner (cyclically) with label `l - 1`, a type-2 corner with label `l`
//! to the first later corner with label `l - 1/2`; corners without such a
//! successor are joined to an extra vertex. The two arcs of a type-2 vertex
//! merge into one edge. The map's vertices are the type-1 vertices plus the
//! extra vertex, which becomes the marked vertex.

use std::collections::HashMap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::map::PlanarMap;
use crate::mobile::{Conditioning, Mobile, TreeSampler, TreeShape};
use crate::rng::Rng;
use crate::weights::WeightModel;

/// Position of a type-1/2 corner: vertex and corner index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Corner {
    pub vertex: u32,
    pub index: u32,
}

/// Corners of type-1/2 vertices in contour order. A non-root vertex with
/// `d` children has corners `0..=d`, corner `i` preceding child `i`; the
/// root has corners `0..d`.
pub fn contour_corners(m: &Mobile) -> Vec<Corner> {
    let s = &m.shape;
    let mut out = Vec::with_capacity(s.len());
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        let kids = s.children(v);
        if i < kids.len() {
            top.1 += 1;
            if v == 0 {
                out.push(Corner { vertex: 0, index: i as u32 });
            }
            let c = kids[i] as usize;
            if matches!(s.ty(c), 1 | 2) {
                out.push(Corner { vertex: c as u32, index: 0 });
            }
            stack.push((c, 0));
        } else {
            stack.pop();
            if matches!(s.ty(v), 3 | 4) {
                let p = s.parent(v).unwrap();
                if p != 0 {
                    out.push(Corner { vertex: p as u32, index: s.position(v) as u32 + 1 });
                }
            }
        }
    }
    out
}

/// Map produced by [`psi`] with the correspondences used by marks.
#[derive(Debug, Clone)]
pub struct PsiOutput {
    pub map: PlanarMap,
    /// Per tree vertex: for type 1 a dart leaving the map vertex; for type
    /// 3/4 a dart whose right face is the face of the vertex.
    pub dart: Vec<Option<u32>>,
    /// Per tree vertex of type 1, 3 or 4: a dart of the associated edge.
    pub edge_dart: Vec<Option<u32>>,
    /// Successor of each contour corner (`None` for the extra vertex).
    pub successor: Vec<Option<usize>>,
    pub corners: Vec<Corner>,
}

/// Apply the bijection and return the pointed rooted map.
pub fn psi(m: &Mobile) -> Result<PlanarMap> {
    Ok(psi_full(m)?.map)
}

/// Apply the bijection, keeping the vertex/face/edge correspondences.
pub fn psi_full(m: &Mobile) -> Result<PsiOutput> {
    m.validate()?;
    let s = &m.shape;
    match (s.ty(0), s.degree(0)) {
        (1, 0) => return Err(Error::MalformedMobile("a lone type-1 vertex encodes no rooted map".into())),
        (1, _) | (2, 2) => {}
        (2, _) => return Err(Error::MalformedMobile("a type-2 root must have two type-4 children".into())),
        (t, _) => return Err(Error::MalformedMobile(format!("root of type {t}"))),
    }
    let corners = contour_corners(m);
    let p = corners.len();
    let lab: Vec<i64> = corners.iter().map(|c| m.labels[c.vertex as usize]).collect();
    // the first corner at or below the threshold carries it exactly, so the
    // successor is the next occurrence of the threshold label
    let mut succ = vec![None; p];
    let mut next_at: HashMap<i64, usize> = HashMap::new();
    for j in (0..2 * p).rev() {
        if j < p {
            let c = corners[j];
            let thr = lab[j] - if s.ty(c.vertex as usize) == 1 { 2 } else { 1 };
            if let Some(&pos) = next_at.get(&thr) {
                if pos < j + p {
                    succ[j] = Some(pos % p);
                }
            }
        }
        next_at.insert(lab[j % p], j);
    }
    // map vertices: type-1 tree vertices, then the extra vertex
    let mut vid = vec![u32::MAX; s.len()];
    let mut nv = 0u32;
    for v in 0..s.len() {
        if s.ty(v) == 1 {
            vid[v] = nv;
            nv += 1;
        }
    }
    let extra = nv;
    let mut corner_pos: HashMap<Corner, usize> = HashMap::with_capacity(p);
    for (i, &c) in corners.iter().enumerate() {
        corner_pos.insert(c, i);
    }
    // darts: (map vertex, sort key, dart id)
    let mut at: Vec<Vec<((i64, i64, i64), u32)>> = vec![Vec::new(); nv as usize + 1];
    let mut alpha: Vec<usize> = Vec::new();
    let mut edge_of_corner = vec![usize::MAX; p];
    // in-dart of the edge leaving each corner
    let mut in_dart = vec![u32::MAX; p];
    let place = |at: &mut Vec<Vec<((i64, i64, i64), u32)>>, from: usize, to: Option<usize>, dart: u32| match to {
        Some(j) => {
            let c = corners[j];
            let rank = ((j + p - from) % p) as i64;
            at[vid[c.vertex as usize] as usize].push(((c.index as i64, 0, rank), dart));
        }
        None => at[extra as usize].push(((-(from as i64), 0, 0), dart)),
    };
    for i in 0..p {
        let c = corners[i];
        let v = c.vertex as usize;
        match s.ty(v) {
            1 => {
                let e = alpha.len() / 2;
                let (out, inn) = (2 * e as u32, 2 * e as u32 + 1);
                alpha.push(inn as usize);
                alpha.push(out as usize);
                at[vid[v] as usize].push(((c.index as i64, 1, 0), out));
                place(&mut at, i, succ[i], inn);
                edge_of_corner[i] = e;
                in_dart[i] = inn;
            }
            _ => {
                if c.index != 0 {
                    continue;
                }
                let b = corner_pos[&Corner { vertex: c.vertex, index: 1 }];
                let e = alpha.len() / 2;
                let (da, db) = (2 * e as u32, 2 * e as u32 + 1);
                alpha.push(db as usize);
                alpha.push(da as usize);
                place(&mut at, i, succ[i], da);
                place(&mut at, b, succ[b], db);
                edge_of_corner[i] = e;
                edge_of_corner[b] = e;
                in_dart[i] = da;
                in_dart[b] = db;
            }
        }
    }
    let mut sigma = vec![0usize; alpha.len()];
    for list in at.iter_mut() {
        list.sort_unstable();
        for k in 0..list.len() {
            sigma[list[k].1 as usize] = list[(k + 1) % list.len()].1 as usize;
        }
    }
    let root = in_dart[0];
    let mark = at[extra as usize].first().map(|d| d.1 as usize);
    let map = PlanarMap::new(alpha, sigma, Some(root as usize), mark)?;
    // correspondences
    let n = s.len();
    let mut dart = vec![None; n];
    let mut edge_dart = vec![None; n];
    for v in 0..n {
        match s.ty(v) {
            1 => {
                let i = corner_pos[&Corner { vertex: v as u32, index: 0 }];
                dart[v] = Some(2 * edge_of_corner[i] as u32);
                edge_dart[v] = dart[v];
            }
            3 | 4 => {
                let par = s.parent(v).unwrap();
                let i = corner_pos[&Corner { vertex: par as u32, index: s.position(v) as u32 }];
                dart[v] = Some(in_dart[i]);
                if s.ty(v) == 4 {
                    edge_dart[v] = Some(2 * edge_of_corner[i] as u32);
                } else {
                    let d = s.degree(par) as u32;
                    let next = s.position(v) as u32 + 1;
                    let idx = if par == 0 { next % d } else { next };
                    let j = corner_pos[&Corner { vertex: par as u32, index: idx }];
                    edge_dart[v] = Some(2 * edge_of_corner[j] as u32);
                }
            }
            _ => {}
        }
    }
    Ok(PsiOutput { map, dart, edge_dart, successor: succ, corners })
}

/// Glue two `T(2)` trees at their roots into a mobile with a type-2 root
/// of degree two.
pub fn assemble_t0(a: &Mobile, b: &Mobile) -> Result<Mobile> {
    for t in [a, b] {
        if t.root_type() != 2 || t.shape.degree(0) != 1 {
            return Err(Error::TypeMismatch("both trees must be T(2) with a single type-4 child".into()));
        }
    }
    let mut ty = vec![2u8];
    let mut labels = vec![1i64];
    let mut children: Vec<Vec<u32>> = vec![Vec::new()];
    for t in [a, b] {
        let shift = 1 - t.labels[0];
        let base = ty.len() as u32 - 1;
        // copy all but the root; vertex v of t becomes base + v
        for v in 1..t.len() {
            ty.push(t.ty(v));
            labels.push(t.labels[v] + shift);
            children.push(t.shape.children(v).iter().map(|&c| c + base).collect());
        }
        children[0].push(t.shape.children(0)[0] + base);
    }
    let shape = TreeShape::from_children(ty, &children)?;
    let m = Mobile { shape, labels, mark: None };
    m.validate()?;
    Ok(m)
}

/// The three classes of pointed rooted maps by the orientation of the
/// root edge relative to the marked vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapClass {
    Plus,
    Zero,
    Minus,
}

/// A sampled map together with its mobile.
#[derive(Debug, Clone)]
pub struct SampledMap {
    pub map: PlanarMap,
    pub mobile: Mobile,
    pub class: MapClass,
}

/// Sampler of size-conditioned Boltzmann maps.
#[derive(Debug, Clone)]
pub struct MapSampler {
    pub trees: TreeSampler,
    pub conditioning: Conditioning,
    prior: [f64; 3],
}

impl MapSampler {
    pub fn new(model: &WeightModel, conditioning: Conditioning) -> Result<Self> {
        let trees = TreeSampler::new(model)?;
        let (x, y) = (model.x(), model.y());
        let z = 2.0 * x + y * y;
        Ok(MapSampler { trees, conditioning, prior: [x / z, y * y / z, x / z] })
    }

    /// Class probabilities before conditioning.
    pub fn prior(&self) -> [f64; 3] {
        self.prior
    }

    fn support(&self, m: usize) -> Result<()> {
        let g = self.conditioning.gamma();
        let plus = self.trees.check_support(1, g, m);
        if plus.is_ok() || self.prior[1] == 0.0 {
            return plus.map(|_| ());
        }
        // a glued tree of size m needs sizes a + b = m of two T(2) trees
        let probe = m.min(256);
        let p2 = self.trees.size_distribution(2, g, probe)?;
        let conv = crate::series::mul(&p2, &p2);
        let ok = if m <= probe {
            conv[m] > 0.0
        } else {
            crate::series::Lattice::from_distribution(&conv).is_some_and(|l| l.contains(m))
        };
        if ok {
            Ok(())
        } else {
            Err(Error::EmptyEvent(format!("no map with {m} in the tree size lattice")))
        }
    }

    /// Shape and class of a mobile of γ-size `m`, by joint rejection over
    /// class and tree.
    fn sample_shape(&self, m: usize, rng: &mut Rng) -> Result<(TreeShape, Option<TreeShape>, MapClass)> {
        let g = self.conditioning.gamma();
        for _ in 0..self.trees.max_attempts {
            let u: f64 = rng.random();
            if u < self.prior[1] {
                if let Some((a, b)) = self.trees.try_pair(2, g, m, rng) {
                    return Ok((a, Some(b), MapClass::Zero));
                }
            } else {
                let class = if u < self.prior[1] + self.prior[0] { MapClass::Plus } else { MapClass::Minus };
                // a lone root would be the vertex map, which has no root edge
                if let Some(t) = self.trees.try_single(1, g, m, rng).filter(|t| t.degree(0) > 0) {
                    return Ok((t, None, class));
                }
            }
        }
        Err(Error::Timeout { attempts: self.trees.max_attempts, expected_acceptance: 0.0 })
    }

    /// Boltzmann map with exactly `n` of the conditioned objects.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<SampledMap> {
        let m = self
            .conditioning
            .tree_target(n)
            .ok_or_else(|| Error::EmptyEvent(format!("no map with {n} {:?}", self.conditioning)))?;
        self.support(m)?;
        let (a, b, class) = self.sample_shape(m, rng)?;
        let mobile = match b {
            Some(b) => assemble_t0(&Mobile::decorate(a, rng), &Mobile::decorate(b, rng))?,
            None => Mobile::decorate(a, rng),
        };
        let mut map = psi(&mobile)?;
        if class == MapClass::Minus {
            map = map.reversed_root();
        }
        Ok(SampledMap { map, mobile, class })
    }
}

/// Unconditioned Boltzmann map (bounded by `max_vertices` tree vertices).
pub fn sample_boltzmann_unconditioned(sampler: &MapSampler, rng: &mut Rng) -> Result<SampledMap> {
    let u: f64 = rng.random();
    let p = sampler.prior();
    if u < p[1] {
        let a = sampler.trees.sample_tree(2, rng)?;
        let b = sampler.trees.sample_tree(2, rng)?;
        let mobile = assemble_t0(&a, &b)?;
        return Ok(SampledMap { map: psi(&mobile)?, mobile, class: MapClass::Zero });
    }
    loop {
        let mobile = sampler.trees.sample_tree(1, rng)?;
        if mobile.shape.degree(0) == 0 {
            continue;
        }
        let mut map = psi(&mobile)?;
        let class = if u < p[1] + p[0] { MapClass::Plus } else { MapClass::Minus };
        if class == MapClass::Minus {
            map = map.reversed_root();
        }
        return Ok(SampledMap { map, mobile, class });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::RootKind;
    use crate::rng::stream;
    use crate::weights::WeightSeq;

    #[test]
    fn single_edge_from_smallest_mobile() {
        // root with one type-3 child carrying a type-1 leaf one lower
        let m = Mobile::parse("1:0(3:0(1:-1))").unwrap();
        let out = psi_full(&m).unwrap();
        assert_eq!(out.map.edge_count(), 2);
        assert_eq!(out.map.vertex_count(), 3);
        assert_eq!(out.map.face_count(), 1);
    }

    #[test]
    fn counts_match_type_counts() {
        let model = WeightModel::new(&WeightSeq::CriticalGeometric { t: 1.0 }).unwrap();
        let ts = TreeSampler::new(&model).unwrap();
        let mut rng = stream(3, "psi", 0);
        let mut done = 0;
        while done < 300 {
            let t = ts.sample_tree(1, &mut rng).unwrap();
            if t.shape.degree(0) == 0 || t.len() > 400 {
                continue;
            }
            let c = t.shape.type_counts();
            let map = psi(&t).unwrap();
            assert_eq!(map.vertex_count(), 1 + c[0]);
            assert_eq!(map.edge_count(), c[0] + c[2] + c[3] - 1);
            assert_eq!(map.face_count(), c[2] + c[3]);
            // distances from the extra vertex are the shifted labels
            let d = map.with_root(map.marked_vertex().unwrap()).unwrap().distances(RootKind::Vertex);
            let min = t.labels.iter().enumerate().filter(|(v, _)| t.ty(*v) == 1).map(|(_, &l)| l).min().unwrap();
            let out = psi_full(&t).unwrap();
            for v in 0..t.len() {
                if t.ty(v) == 1 {
                    let mv = map.vertex_of(out.dart[v].unwrap() as usize);
                    assert_eq!(d[&mv] as i64, (t.labels[v] - min) / 2 + 1);
                }
            }
            done += 1;
        }
    }
}
