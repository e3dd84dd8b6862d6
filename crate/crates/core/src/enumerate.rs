//! Exhaustive enumeration of small maps and mobiles.
//!
//! Maps are enumerated as all rotation systems on a fixed edge pairing and
//! deduplicated by canonical code; mobiles are enumerated shape by shape
//! with every arrangement and bridge. Both are exponential and meant for
//! a handful of edges.

use std::collections::BTreeSet;

use crate::bdfg::{assemble_t0, psi};
use crate::error::Result;
use crate::map::{PlanarMap, RootKind};
use crate::mobile::{all_bridges, Mobile, TreeShape};
use crate::topology::canonical_code;
use crate::weights::WeightSeq;

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Every planar rotation system with `e` edges on the pairing
/// `alpha = (0 1)(2 3)...`, rooted at dart 0.
pub fn rotation_systems(e: usize) -> Vec<PlanarMap> {
    if e == 0 {
        return vec![PlanarMap::vertex_map()];
    }
    let n = 2 * e;
    let alpha: Vec<usize> = (0..n).map(|d| d ^ 1).collect();
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        if let Ok(m) = PlanarMap::new(alpha.clone(), sigma.clone(), Some(0), None) {
            out.push(m);
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    out
}

/// Canonical codes of all rooted planar maps with `e` edges.
pub fn rooted_map_codes(e: usize) -> BTreeSet<Vec<u32>> {
    let mut codes = BTreeSet::new();
    for m in rotation_systems(e) {
        for r in 0..m.dart_count().max(1) {
            let mr = if m.dart_count() == 0 { m.clone() } else { m.with_root(r).unwrap() };
            codes.insert(canonical_code(&mr, RootKind::HalfEdge));
        }
    }
    codes
}

/// Canonical codes of all pointed rooted planar maps with `e` edges whose
/// face degrees all carry positive weight.
pub fn pointed_map_codes(e: usize, weights: &WeightSeq) -> BTreeSet<Vec<u32>> {
    let mut codes = BTreeSet::new();
    for m in rotation_systems(e) {
        if m.face_degrees().iter().any(|&d| weights.q(d) <= 0.0) {
            continue;
        }
        for r in 0..m.dart_count() {
            let mr = m.with_root(r).unwrap();
            for v in mr.vertices() {
                codes.insert(canonical_code(&mr.with_mark(Some(v)).unwrap(), RootKind::HalfEdge));
            }
        }
    }
    codes
}

#[derive(Debug, Clone)]
struct Rose {
    ty: u8,
    kids: Vec<Rose>,
}

const GAMMA_EDGES: [u32; 4] = [1, 0, 1, 1];

/// All trees rooted at `ty` with γ-size at most `max`.
fn trees(ty: u8, max: usize, w: &WeightSeq, gamma: [u32; 4]) -> Vec<(Rose, usize)> {
    let own = gamma[ty as usize - 1] as usize;
    if own > max {
        return Vec::new();
    }
    let allowed: &[u8] = match ty {
        1 => &[3],
        2 => &[4],
        _ => &[1, 2],
    };
    let mut out = Vec::new();
    for (kids, size) in forests(allowed, max - own, w, gamma) {
        let ok = match ty {
            1 => true,
            2 => kids.len() == 1,
            _ => {
                let k = kids.iter().filter(|c| c.ty == 1).count();
                let kp = kids.len() - k;
                let n = if ty == 3 { 2 + 2 * k + kp } else { 1 + 2 * k + kp };
                w.q(n) > 0.0
            }
        };
        if ok {
            out.push((Rose { ty, kids }, own + size));
        }
    }
    out
}

fn forests(allowed: &[u8], max: usize, w: &WeightSeq, gamma: [u32; 4]) -> Vec<(Vec<Rose>, usize)> {
    let mut out = vec![(Vec::new(), 0)];
    for &t in allowed {
        for (first, s) in trees(t, max, w, gamma) {
            for (rest, r) in forests(allowed, max - s, w, gamma) {
                let mut v = vec![first.clone()];
                v.extend(rest);
                out.push((v, s + r));
            }
        }
    }
    out
}

fn flatten(r: &Rose) -> (Vec<u8>, Vec<Vec<u32>>) {
    let mut ty = Vec::new();
    let mut children: Vec<Vec<u32>> = Vec::new();
    let mut stack = vec![(r, u32::MAX)];
    while let Some((node, parent)) = stack.pop() {
        let id = ty.len() as u32;
        ty.push(node.ty);
        children.push(Vec::new());
        if parent != u32::MAX {
            children[parent as usize].push(id);
        }
        for k in node.kids.iter().rev() {
            stack.push((k, id));
        }
    }
    (ty, children)
}

/// Every tree shape rooted at `root` with γ-size exactly `size` whose
/// type-3/4 vertices have a face degree of positive weight. Types 1, 3
/// and 4 must have positive γ-weight, otherwise the set can be infinite.
pub fn shapes_of_size(root: u8, gamma: [u32; 4], size: usize, w: &WeightSeq) -> Vec<TreeShape> {
    assert!(gamma[0] > 0 && gamma[2] > 0 && gamma[3] > 0, "enumeration needs positive weights on types 1, 3, 4");
    trees(root, size, w, gamma)
        .into_iter()
        .filter(|(_, s)| *s == size)
        .map(|(r, _)| {
            let (ty, ch) = flatten(&r);
            TreeShape::from_children(ty, &ch).expect("enumerated trees are valid")
        })
        .collect()
}

/// All labelled decorations of a shape.
pub fn decorations(shape: &TreeShape) -> Vec<Mobile> {
    let sites: Vec<usize> = (0..shape.len()).filter(|&v| matches!(shape.ty(v), 3 | 4) && shape.degree(v) > 0).collect();
    let options: Vec<Vec<Vec<i64>>> = sites
        .iter()
        .map(|&v| {
            let kt: Vec<u8> = shape.children(v).iter().map(|&c| shape.ty(c as usize)).collect();
            all_bridges(shape.ty(v), &kt)
        })
        .collect();
    let root_label = if shape.ty(0) == 2 { 1 } else { 0 };
    let mut out = Vec::new();
    let mut idx = vec![0usize; sites.len()];
    loop {
        let mut bridges = vec![None; shape.len()];
        for (s, &v) in sites.iter().enumerate() {
            bridges[v] = Some(options[s][idx[s]].clone());
        }
        out.push(Mobile::assign_labels(shape.clone(), &bridges, root_label).expect("enumerated bridges are valid"));
        let mut s = 0;
        loop {
            if s == sites.len() {
                return out;
            }
            idx[s] += 1;
            if idx[s] < options[s].len() {
                break;
            }
            idx[s] = 0;
            s += 1;
        }
    }
}

/// Mobiles encoding maps with exactly `e` edges: rooted at type 1, or two
/// glued `T(2)` trees.
pub fn mobiles_with_edges(e: usize, w: &WeightSeq) -> (Vec<Mobile>, Vec<Mobile>) {
    let target = e + 1;
    let mut plus = Vec::new();
    for (r, s) in trees(1, target, w, GAMMA_EDGES) {
        if s == target && !r.kids.is_empty() {
            let (ty, ch) = flatten(&r);
            plus.extend(decorations(&TreeShape::from_children(ty, &ch).unwrap()));
        }
    }
    let mut zero = Vec::new();
    let halves: Vec<(Rose, usize)> = trees(2, target, w, GAMMA_EDGES);
    for (a, sa) in &halves {
        for (b, sb) in &halves {
            if sa + sb != target {
                continue;
            }
            let (ta, ca) = flatten(a);
            let (tb, cb) = flatten(b);
            let da = decorations(&TreeShape::from_children(ta, &ca).unwrap());
            let db = decorations(&TreeShape::from_children(tb, &cb).unwrap());
            for x in &da {
                for y in &db {
                    zero.push(assemble_t0(x, y).unwrap());
                }
            }
        }
    }
    (plus, zero)
}

/// Result of checking the bijection on all maps with `e` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BijectionCheck {
    pub edges: usize,
    pub mobiles: usize,
    pub encoded_maps: usize,
    pub distinct_images: usize,
    pub pointed_rooted_maps: usize,
}

impl BijectionCheck {
    pub fn ok(&self) -> bool {
        self.encoded_maps == self.distinct_images && self.distinct_images == self.pointed_rooted_maps
    }
}

/// Compare the images of all mobiles with brute-force enumeration.
pub fn check_bijection(e: usize, w: &WeightSeq) -> Result<BijectionCheck> {
    let w = w.normalize()?;
    let (plus, zero) = mobiles_with_edges(e, &w);
    let brute = pointed_map_codes(e, &w);
    let mut images = BTreeSet::new();
    let mut encoded = 0;
    let mut all_inside = true;
    for m in &plus {
        let map = psi(m)?;
        for mm in [map.clone(), map.reversed_root()] {
            let c = canonical_code(&mm, RootKind::HalfEdge);
            all_inside &= brute.contains(&c);
            images.insert(c);
            encoded += 1;
        }
    }
    for m in &zero {
        let c = canonical_code(&psi(m)?, RootKind::HalfEdge);
        all_inside &= brute.contains(&c);
        images.insert(c);
        encoded += 1;
    }
    Ok(BijectionCheck {
        edges: e,
        mobiles: plus.len() + zero.len(),
        encoded_maps: encoded,
        distinct_images: if all_inside { images.len() } else { usize::MAX },
        pointed_rooted_maps: brute.len(),
    })
}

/// Weights with every face degree allowed, for counting general maps.
pub fn all_degrees() -> WeightSeq {
    WeightSeq::Geometric { t: 1.0, lambda: 0.1 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rooted_map_counts() {
        let counts: Vec<usize> = (0..=3).map(|e| rooted_map_codes(e).len()).collect();
        assert_eq!(counts, vec![1, 2, 9, 54]);
    }

    #[test]
    fn bijection_small() {
        for e in 1..=3 {
            let c = check_bijection(e, &all_degrees()).unwrap();
            assert!(c.ok(), "{c:?}");
        }
    }
}
