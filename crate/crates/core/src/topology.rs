//! Balls around the root, canonical codes and the local distance.
//!
//! The ball `U_k` keeps every edge that has an endpoint at distance at most
//! `k - 1` from the root set, with the rotation restricted to the kept
//! darts. `U_0` is the vertex map for vertex roots, the root edge for
//! half-edge roots and the boundary of the root face for face roots.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{PlanarMap, RootKind};

/// Restrict `map` to the darts in `kept` (closed under `alpha`), rooted at
/// `root`. Darts are renumbered in increasing order of their old index.
pub fn restrict(map: &PlanarMap, kept: &mut Vec<usize>, root: usize) -> PlanarMap {
    kept.sort_unstable();
    kept.dedup();
    let index: HashMap<usize, usize> = kept.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let mut alpha = Vec::with_capacity(kept.len());
    let mut sigma = Vec::with_capacity(kept.len());
    for &d in kept.iter() {
        alpha.push(index[&map.alpha(d)]);
        let mut s = map.sigma(d);
        while !index.contains_key(&s) {
            s = map.sigma(s);
        }
        sigma.push(index[&s]);
    }
    PlanarMap::new(alpha, sigma, Some(index[&root]), None).expect("a ball of a planar map is a planar map")
}

/// The ball of radius `k` around the root set of `kind`. Marks are dropped.
pub fn ball(map: &PlanarMap, kind: RootKind, k: usize) -> PlanarMap {
    let Some(root) = map.root_dart() else { return PlanarMap::vertex_map() };
    if k == 0 {
        let mut kept = match kind {
            RootKind::Vertex => return PlanarMap::vertex_map(),
            RootKind::HalfEdge => vec![root, map.alpha(root)],
            RootKind::Face => {
                let f = map.left_face(root);
                let mut v = Vec::new();
                for d in map.face_darts(f) {
                    v.push(d);
                    v.push(map.alpha(d));
                }
                v
            }
        };
        return restrict(map, &mut kept, root);
    }
    let mut kept = Vec::new();
    for (v, dv) in map.bounded_distances(kind, k) {
        if dv < k {
            for d in map.darts_at(v) {
                kept.push(d);
                kept.push(map.alpha(d));
            }
        }
    }
    restrict(map, &mut kept, root)
}

/// Code of `map` explored from `start`: breadth-first over darts, emitting
/// the labels of `alpha(d)` and `sigma(d)` for every dart in label order.
/// Two rooted maps are isomorphic iff their codes from the roots agree.
pub fn code_from(map: &PlanarMap, start: usize) -> Vec<u32> {
    let n = map.dart_count();
    let mut label = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(n as u32);
    label[start] = 0;
    order.push(start);
    let mut head = 0;
    while head < order.len() {
        let d = order[head];
        head += 1;
        for e in [map.alpha(d), map.sigma(d)] {
            if label[e] == u32::MAX {
                label[e] = order.len() as u32;
                order.push(e);
            }
            out.push(label[e]);
        }
    }
    out
}

/// Labels the BFS of [`code_from`] assigns, indexed by dart.
fn labels_from(map: &PlanarMap, start: usize) -> Vec<u32> {
    let n = map.dart_count();
    let mut label = vec![u32::MAX; n];
    let mut order = vec![start];
    label[start] = 0;
    let mut head = 0;
    while head < order.len() {
        let d = order[head];
        head += 1;
        for e in [map.alpha(d), map.sigma(d)] {
            if label[e] == u32::MAX {
                label[e] = order.len() as u32;
                order.push(e);
            }
        }
    }
    label
}

/// Candidate starting darts for the canonical code of `kind`.
fn candidates(map: &PlanarMap, kind: RootKind) -> Vec<usize> {
    let r = map.root_dart().expect("non-empty map");
    match kind {
        RootKind::HalfEdge => vec![r],
        RootKind::Vertex => map.darts_at(map.vertex_of(r)),
        RootKind::Face => map.face_darts(map.left_face(r)).into_iter().map(|d| map.alpha(d)).collect(),
    }
}

/// Canonical code of a map up to root-preserving isomorphism of the given
/// kind. A marked vertex, if any, is part of the code.
pub fn canonical_code(map: &PlanarMap, kind: RootKind) -> Vec<u32> {
    if map.dart_count() == 0 {
        return vec![0, u32::from(map.marked_vertex().is_some())];
    }
    let mut best: Option<Vec<u32>> = None;
    for s in candidates(map, kind) {
        let mut c = code_from(map, s);
        if let Some(m) = map.marked_vertex() {
            let lab = labels_from(map, s);
            c.push(map.darts_at(m).iter().map(|&d| lab[d]).min().unwrap());
        }
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
    }
    best.unwrap()
}

fn push_varint(out: &mut Vec<u8>, mut x: u32) {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn read_varint(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    let mut x: u32 = 0;
    let mut shift = 0;
    loop {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        x |= ((b & 0x7f) as u32) << shift;
        if b & 0x80 == 0 {
            return Some(x);
        }
        shift += 7;
        if shift > 28 {
            return None;
        }
    }
}

/// Canonical identity of a root ball.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallCode {
    pub kind: RootKind,
    pub radius: u32,
    pub code: Vec<u8>,
}

impl BallCode {
    pub fn new(kind: RootKind, radius: u32, words: &[u32]) -> Self {
        let mut code = Vec::with_capacity(words.len());
        for &w in words {
            push_varint(&mut code, w);
        }
        BallCode { kind, radius, code }
    }

    /// Lowercase hex of `[kind][radius varint][code]`.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![self.kind.tag()];
        push_varint(&mut bytes, self.radius);
        bytes.extend_from_slice(&self.code);
        hex::encode(bytes)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
        let kind = match bytes.first() {
            Some(0) => RootKind::Vertex,
            Some(1) => RootKind::HalfEdge,
            Some(2) => RootKind::Face,
            _ => return Err(Error::Parse("bad ball code kind".into())),
        };
        let mut pos = 1;
        let radius = read_varint(&bytes, &mut pos).ok_or_else(|| Error::Parse("bad ball code radius".into()))?;
        Ok(BallCode { kind, radius, code: bytes[pos..].to_vec() })
    }

    /// Decode the code words.
    pub fn words(&self) -> Vec<u32> {
        let mut pos = 0;
        let mut out = Vec::new();
        while let Some(w) = read_varint(&self.code, &mut pos) {
            out.push(w);
        }
        out
    }

    /// Rebuild a representative map rooted at its first dart.
    pub fn to_map(&self) -> Result<PlanarMap> {
        let w = self.words();
        let n = *w.first().ok_or_else(|| Error::Parse("empty code".into()))? as usize;
        if n == 0 {
            return Ok(PlanarMap::vertex_map());
        }
        if w.len() < 1 + 2 * n {
            return Err(Error::Parse("truncated code".into()));
        }
        let alpha = (0..n).map(|i| w[1 + 2 * i] as usize).collect();
        let sigma = (0..n).map(|i| w[2 + 2 * i] as usize).collect();
        PlanarMap::new(alpha, sigma, Some(0), None)
    }
}

impl fmt::Display for BallCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Canonical code of `U_k` of `map`.
pub fn ball_code(map: &PlanarMap, kind: RootKind, k: usize) -> BallCode {
    let b = ball(map, kind, k);
    BallCode::new(kind, k as u32, &canonical_code(&b, kind))
}

/// Local distance `1 / (1 + sup{k : U_k agree})`, with `0` for equal maps
/// and `2` when even the radius-0 balls differ. Marks are ignored.
pub fn d_loc(a: &PlanarMap, b: &PlanarMap, kind: RootKind) -> f64 {
    let bare = |m: &PlanarMap| {
        if m.dart_count() == 0 {
            vec![0, 0]
        } else {
            canonical_code(&m.with_mark(None).unwrap(), kind)
        }
    };
    if bare(a) == bare(b) {
        return 0.0;
    }
    let limit = a.dart_count().max(b.dart_count()) + 2;
    for k in 0..=limit {
        let ca = canonical_code(&ball(a, kind, k), kind);
        let cb = canonical_code(&ball(b, kind, k), kind);
        if ca != cb {
            return if k == 0 { 2.0 } else { 1.0 / k as f64 };
        }
    }
    unreachable!("distinct finite maps have distinct large balls")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> PlanarMap {
        PlanarMap::new(vec![1, 0], vec![0, 1], Some(0), None).unwrap()
    }
    fn lp() -> PlanarMap {
        PlanarMap::new(vec![1, 0], vec![1, 0], Some(0), None).unwrap()
    }

    #[test]
    fn loop_versus_edge() {
        assert_eq!(d_loc(&edge(), &lp(), RootKind::Vertex), 1.0);
        assert_eq!(d_loc(&edge(), &lp(), RootKind::HalfEdge), 2.0);
        assert_eq!(d_loc(&edge(), &edge(), RootKind::Vertex), 0.0);
    }

    #[test]
    fn hex_round_trip() {
        let c = ball_code(&lp(), RootKind::Face, 3);
        assert_eq!(BallCode::from_hex(&c.to_hex()).unwrap(), c);
        assert_eq!(c.to_hex(), c.to_hex().to_lowercase());
        let m = c.to_map().unwrap();
        assert_eq!(canonical_code(&m, RootKind::HalfEdge), canonical_code(&lp(), RootKind::HalfEdge));
    }

    #[test]
    fn large_ball_is_whole_map() {
        let m = PlanarMap::new(vec![1, 0, 3, 2], vec![0, 2, 1, 3], Some(0), None).unwrap();
        let b = ball(&m, RootKind::Vertex, 10);
        assert_eq!(canonical_code(&b, RootKind::Vertex), canonical_code(&m, RootKind::Vertex));
        assert_eq!(ball(&m, RootKind::Vertex, 1).edge_count(), 1);
        assert_eq!(ball(&m, RootKind::Vertex, 0).dart_count(), 0);
    }
}
