//! Planar maps as rotation systems.
//!
//! Darts are `0..2e`. `alpha` pairs the two darts of an edge and `sigma`
//! sends a dart to the next dart counterclockwise around its origin. Faces
//! are the orbits of `phi = sigma . alpha`; the orbit of `d` is the face on
//! the right of `d`, so the face on the left of `d` is the orbit of
//! `alpha(d)`. A vertex is named by the smallest dart in its `sigma` orbit.
//!
//! The map with one vertex and no edge is allowed; it is the only map with
//! no root dart.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How a map is rooted for neighbourhood purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// Rooted at the origin of the root dart.
    Vertex,
    /// Rooted at the oriented root edge.
    HalfEdge,
    /// Rooted at the face on the left of the root dart.
    Face,
}

impl RootKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RootKind::Vertex => "vertex",
            RootKind::HalfEdge => "half_edge",
            RootKind::Face => "face",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            RootKind::Vertex => 0,
            RootKind::HalfEdge => 1,
            RootKind::Face => 2,
        }
    }
}

impl FromStr for RootKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertex" => Ok(RootKind::Vertex),
            "half_edge" | "half-edge" | "edge" => Ok(RootKind::HalfEdge),
            "face" => Ok(RootKind::Face),
            _ => Err(Error::Parse(format!("unknown root kind {s:?}"))),
        }
    }
}

impl fmt::Display for RootKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const NONE: u32 = u32::MAX;

/// A connected planar map, optionally rooted and pointed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarMap {
    alpha: Vec<u32>,
    sigma: Vec<u32>,
    root: u32,
    marked: u32,
    vertex: Vec<u32>,
    face: Vec<u32>,
    n_vertices: usize,
    n_faces: usize,
}

fn orbit_labels(n: usize, step: impl Fn(usize) -> usize) -> (Vec<u32>, usize) {
    let mut label = vec![NONE; n];
    let mut count = 0;
    for d in 0..n {
        if label[d] != NONE {
            continue;
        }
        count += 1;
        let mut e = d;
        loop {
            label[e] = d as u32;
            e = step(e);
            if e == d {
                break;
            }
        }
    }
    (label, count)
}

fn check_permutation(p: &[usize], what: &'static str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return Err(Error::NotPermutation(what));
        }
        seen[x] = true;
    }
    Ok(())
}

impl PlanarMap {
    /// The map with a single vertex and no edges.
    pub fn vertex_map() -> Self {
        PlanarMap {
            alpha: Vec::new(),
            sigma: Vec::new(),
            root: NONE,
            marked: NONE,
            vertex: Vec::new(),
            face: Vec::new(),
            n_vertices: 1,
            n_faces: 1,
        }
    }

    /// Validate a rotation system and build the map.
    ///
    /// `marked` names a vertex by any dart incident to it; it is normalised
    /// to the vertex id. On the vertex map the only valid mark is `0`.
    pub fn new(alpha: Vec<usize>, sigma: Vec<usize>, root: Option<usize>, marked: Option<usize>) -> Result<Self> {
        let n = alpha.len();
        if sigma.len() != n {
            return Err(Error::Parse(format!("alpha has {} entries but sigma has {}", n, sigma.len())));
        }
        if n % 2 != 0 {
            return Err(Error::Parse(format!("odd dart count {n}")));
        }
        if n == 0 {
            if let Some(r) = root {
                return Err(Error::BadRoot(r));
            }
            let mut m = Self::vertex_map();
            match marked {
                None => {}
                Some(0) => m.marked = 0,
                Some(v) => return Err(Error::BadMark(v)),
            }
            return Ok(m);
        }
        check_permutation(&alpha, "alpha")?;
        check_permutation(&sigma, "sigma")?;
        for (d, &a) in alpha.iter().enumerate() {
            if a == d || alpha[a] != d {
                return Err(Error::NotInvolution(d));
            }
        }
        let root = match root {
            Some(r) if r < n => r as u32,
            Some(r) => return Err(Error::BadRoot(r)),
            None => return Err(Error::BadRoot(usize::MAX)),
        };
        // connectivity over the group generated by alpha and sigma
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(d) = stack.pop() {
            for e in [alpha[d], sigma[d]] {
                if !seen[e] {
                    seen[e] = true;
                    reached += 1;
                    stack.push(e);
                }
            }
        }
        if reached != n {
            return Err(Error::Disconnected);
        }
        let (vertex, n_vertices) = orbit_labels(n, |d| sigma[d]);
        let (face, n_faces) = orbit_labels(n, |d| sigma[alpha[d]]);
        let chi = n_vertices as i64 - (n / 2) as i64 + n_faces as i64;
        if chi != 2 {
            return Err(Error::NonPlanar(chi));
        }
        let marked = match marked {
            None => NONE,
            Some(d) if d < n => vertex[d],
            Some(d) => return Err(Error::BadMark(d)),
        };
        Ok(PlanarMap {
            alpha: alpha.into_iter().map(|x| x as u32).collect(),
            sigma: sigma.into_iter().map(|x| x as u32).collect(),
            root,
            marked,
            vertex,
            face,
            n_vertices,
            n_faces,
        })
    }

    pub fn dart_count(&self) -> usize {
        self.alpha.len()
    }
    pub fn edge_count(&self) -> usize {
        self.alpha.len() / 2
    }
    pub fn vertex_count(&self) -> usize {
        self.n_vertices
    }
    pub fn face_count(&self) -> usize {
        self.n_faces
    }
    #[inline]
    pub fn alpha(&self, d: usize) -> usize {
        self.alpha[d] as usize
    }
    #[inline]
    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d] as usize
    }
    #[inline]
    pub fn phi(&self, d: usize) -> usize {
        self.sigma(self.alpha(d))
    }
    pub fn root_dart(&self) -> Option<usize> {
        (self.root != NONE).then_some(self.root as usize)
    }
    pub fn marked_vertex(&self) -> Option<usize> {
        (self.marked != NONE).then_some(self.marked as usize)
    }
    /// Vertex id (smallest dart of the orbit) of the origin of `d`.
    #[inline]
    pub fn vertex_of(&self, d: usize) -> usize {
        self.vertex[d] as usize
    }
    /// Face id of the face on the right of `d`.
    #[inline]
    pub fn face_of(&self, d: usize) -> usize {
        self.face[d] as usize
    }
    /// Face id of the face on the left of `d`.
    pub fn left_face(&self, d: usize) -> usize {
        self.face_of(self.alpha(d))
    }
    /// Root vertex id; `0` on the vertex map.
    pub fn root_vertex(&self) -> usize {
        self.root_dart().map_or(0, |r| self.vertex_of(r))
    }
    /// Face on the left of the root dart.
    pub fn root_face(&self) -> Option<usize> {
        self.root_dart().map(|r| self.left_face(r))
    }

    pub fn vertices(&self) -> Vec<usize> {
        if self.alpha.is_empty() {
            return vec![0];
        }
        (0..self.dart_count()).filter(|&d| self.vertex_of(d) == d).collect()
    }

    pub fn faces(&self) -> Vec<usize> {
        (0..self.dart_count()).filter(|&d| self.face_of(d) == d).collect()
    }

    /// Darts with origin `v`, in counterclockwise order starting at `v`.
    pub fn darts_at(&self, v: usize) -> Vec<usize> {
        if self.alpha.is_empty() {
            return Vec::new();
        }
        let mut out = vec![v];
        let mut d = self.sigma(v);
        while d != v {
            out.push(d);
            d = self.sigma(d);
        }
        out
    }

    /// Darts on the right boundary walk of face `f`.
    pub fn face_darts(&self, f: usize) -> Vec<usize> {
        if self.alpha.is_empty() {
            return Vec::new();
        }
        let mut out = vec![f];
        let mut d = self.phi(f);
        while d != f {
            out.push(d);
            d = self.phi(d);
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.darts_at(v).len()
    }

    /// Sorted vertex degrees.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.vertices().iter().map(|&v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }

    /// Sorted face degrees.
    pub fn face_degrees(&self) -> Vec<usize> {
        if self.alpha.is_empty() {
            return vec![0];
        }
        let mut d: Vec<usize> = self.faces().iter().map(|&f| self.face_darts(f).len()).collect();
        d.sort_unstable();
        d
    }

    /// Same map rooted at the opposite dart of the root edge.
    pub fn reversed_root(&self) -> Self {
        let mut m = self.clone();
        if m.root != NONE {
            m.root = m.alpha[m.root as usize];
        }
        m
    }

    pub fn with_root(&self, d: usize) -> Result<Self> {
        if d >= self.dart_count() {
            return Err(Error::BadRoot(d));
        }
        let mut m = self.clone();
        m.root = d as u32;
        Ok(m)
    }

    pub fn with_mark(&self, v: Option<usize>) -> Result<Self> {
        let mut m = self.clone();
        m.marked = match v {
            None => NONE,
            Some(0) if self.alpha.is_empty() => 0,
            Some(d) if d < self.dart_count() => self.vertex[d],
            Some(d) => return Err(Error::BadMark(d)),
        };
        Ok(m)
    }

    /// Vertices of the root set for `kind`.
    pub fn root_vertices(&self, kind: RootKind) -> Vec<usize> {
        let Some(r) = self.root_dart() else { return vec![0] };
        let mut out = match kind {
            RootKind::Vertex => vec![self.vertex_of(r)],
            RootKind::HalfEdge => vec![self.vertex_of(r), self.vertex_of(self.alpha(r))],
            RootKind::Face => {
                let f = self.left_face(r);
                self.face_darts(f).into_iter().map(|d| self.vertex_of(d)).collect()
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Graph distance of every vertex to the root set of `kind`.
    pub fn distances(&self, kind: RootKind) -> BTreeMap<usize, usize> {
        let dist = self.bounded_distances(kind, usize::MAX);
        dist.into_iter().collect()
    }

    /// Breadth-first distances from the root set, not exploring beyond
    /// `max`. Returns `(vertex, distance)` pairs in discovery order.
    pub fn bounded_distances(&self, kind: RootKind, max: usize) -> Vec<(usize, usize)> {
        let roots = self.root_vertices(kind);
        if self.alpha.is_empty() {
            return vec![(0, 0)];
        }
        let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for v in roots {
            dist.insert(v, 0);
            order.push((v, 0));
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            if dv >= max {
                continue;
            }
            for d in self.darts_at(v) {
                let w = self.vertex_of(self.alpha(d));
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dv + 1);
                    order.push((w, dv + 1));
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Raw permutations, for serialisation and tests.
    pub fn alpha_slice(&self) -> &[u32] {
        &self.alpha
    }
    pub fn sigma_slice(&self) -> &[u32] {
        &self.sigma
    }

    /// Text form `e=<n>; alpha=<..>; sigma=<..>; root=<d|none>; mark=<v|none>`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }
}

fn join(v: &[u32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |x: u32| if x == NONE { "none".to_string() } else { x.to_string() };
        write!(
            f,
            "e={}; alpha={}; sigma={}; root={}; mark={}",
            self.edge_count(),
            join(&self.alpha),
            join(&self.sigma),
            opt(self.root),
            opt(self.marked)
        )
    }
}

impl FromStr for PlanarMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for part in s.trim().split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::Parse(format!("duplicate field {k:?}")));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Parse(format!("missing field {k:?}")));
        let list = |v: &str| -> Result<Vec<usize>> {
            v.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad dart {t:?}"))))
                .collect()
        };
        let opt = |v: &str| -> Result<Option<usize>> {
            if v == "none" {
                Ok(None)
            } else {
                v.parse::<usize>().map(Some).map_err(|_| Error::Parse(format!("bad value {v:?}")))
            }
        };
        let e: usize = get("e")?.parse().map_err(|_| Error::Parse("bad edge count".into()))?;
        let alpha = list(get("alpha")?)?;
        let sigma = list(get("sigma")?)?;
        if alpha.len() != 2 * e {
            return Err(Error::Parse(format!("e={e} but alpha has {} darts", alpha.len())));
        }
        let root = opt(get("root")?)?;
        let mark = opt(fields.get("mark").copied().unwrap_or("none"))?;
        PlanarMap::new(alpha, sigma, root, mark)
    }
}
