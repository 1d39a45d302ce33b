//! Triangulations stored as combinatorial maps.
//!
//! Internal arcs are labelled `1..=n`, boundary segments `n+1..=n+m` (in
//! order along the boundary components of the surface spec).  Every arc has two
//! sides; a side is a half-edge, and side `(a, 0)` runs opposite to
//! `(a, 1)`.  Boundary segments only have side 0.  A triangle is a triple of
//! sides listed counterclockwise, so side `h_k` runs from the corner `v_k` to
//! `v_{k+1}`.
//!
//! Punctures are interior vertices.  Their identity is kept by an anchor: a
//! side whose origin is that puncture.  Flips move anchors along when needed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::surface::{SurfaceError, SurfaceSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("arc {0} is not flippable")]
    NotFlippable(usize),
    #[error("arc {0} is not a self-folded edge")]
    NotSelfFolded(usize),
    #[error("arc {0} is a self-folded edge around a vortex")]
    VortexLFlip(usize),
    #[error("arc {0} is not the internal enclosing edge of a self-folded triangle")]
    NotEnclosing(usize),
    #[error("no arc labelled {0}")]
    UnknownArc(usize),
    #[error("invalid triangulation: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Side {
    pub arc: usize,
    pub side: u8,
}

impl Side {
    pub fn new(arc: usize, side: u8) -> Self {
        Side { arc, side }
    }

    pub fn twin(self) -> Side {
        Side {
            arc: self.arc,
            side: 1 - self.side,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Boundary,
    SelfFolded,
    Ordinary,
}

/// A self-folded triangle: `folded` has both sides in it, `enclosing` is the
/// remaining side and `puncture` indexes the enclosed puncture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelfFolded {
    pub triangle: usize,
    pub folded: usize,
    pub enclosing: Side,
    pub puncture: usize,
}

/// Vertex data recomputed from the gluing.
#[derive(Clone, Debug)]
pub struct Vertices {
    /// Vertex id of the origin of every side, indexed by [`Triangulation::hid`].
    pub origin: Vec<usize>,
    pub interior: Vec<bool>,
    /// Puncture index (spec order) of each vertex, if interior.
    pub puncture: Vec<Option<usize>>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangulation {
    spec: Arc<SurfaceSpec>,
    n: usize,
    m: usize,
    triangles: Vec<[Side; 3]>,
    anchors: Vec<Side>,
}

/// Result of canonical relabelling.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub key: Vec<u8>,
    /// New side of `(a, 0)` for each old internal arc `a` (index 0 unused).
    pub relabel: Vec<Side>,
    pub triangulation: Triangulation,
}

impl Triangulation {
    /// Builds and validates a triangulation.
    pub fn from_parts(
        spec: SurfaceSpec,
        triangles: Vec<[Side; 3]>,
        anchors: Vec<Side>,
    ) -> Result<Self, TriError> {
        spec.ensure_valid()?;
        let n = spec.rank_open_arcs()?;
        let m = spec.m();
        let t = Triangulation {
            spec: Arc::new(spec),
            n,
            m,
            triangles,
            anchors,
        };
        t.check()?;
        Ok(t)
    }

    /// Deterministic admissible triangulation: cut a polygon model of the
    /// surface into ears, each puncture getting its own self-folded triangle.
    pub fn initial(spec: &SurfaceSpec) -> Result<Self, TriError> {
        spec.ensure_valid()?;
        let n = spec.rank_open_arcs()?;
        let m = spec.m();
        let mut next = 1usize;
        let mut fresh = || {
            let a = next;
            next += 1;
            a
        };
        let mut seg = n + 1;
        let mut segments = |count: usize| {
            let v: Vec<Side> = (seg..seg + count).map(|s| Side::new(s, 0)).collect();
            seg += count;
            v
        };
        let mut poly: Vec<Side> = segments(spec.boundaries[0]);
        for _ in 0..spec.genus {
            let a = fresh();
            let b = fresh();
            poly.extend([Side::new(a, 0), Side::new(b, 0), Side::new(a, 1), Side::new(b, 1)]);
        }
        for &mj in &spec.boundaries[1..] {
            let c = fresh();
            poly.push(Side::new(c, 0));
            poly.extend(segments(mj));
            poly.push(Side::new(c, 1));
        }
        let mut anchors = Vec::new();
        let mut spokes = Vec::new();
        for _ in 0..spec.p() {
            let d = fresh();
            poly.extend([Side::new(d, 0), Side::new(d, 1)]);
            anchors.push(Side::new(d, 1));
            spokes.push(d);
        }
        let mut triangles = Vec::new();
        for d in spokes {
            if poly.len() <= 3 {
                break;
            }
            let pos = poly.iter().position(|&s| s == Side::new(d, 0)).unwrap();
            let e = fresh();
            triangles.push([Side::new(d, 0), Side::new(d, 1), Side::new(e, 1)]);
            poly.splice(pos..pos + 2, [Side::new(e, 0)]);
        }
        while poly.len() > 3 {
            let e = fresh();
            triangles.push([poly[0], poly[1], Side::new(e, 1)]);
            poly.splice(0..2, [Side::new(e, 0)]);
        }
        triangles.push([poly[0], poly[1], poly[2]]);
        debug_assert_eq!(next - 1, n);
        let t = Triangulation {
            spec: Arc::new(spec.clone()),
            n,
            m,
            triangles,
            anchors,
        };
        t.check()?;
        Ok(t.canonical().triangulation)
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn triangles(&self) -> &[[Side; 3]] {
        &self.triangles
    }

    pub fn anchors(&self) -> &[Side] {
        &self.anchors
    }

    pub fn is_internal(&self, arc: usize) -> bool {
        arc >= 1 && arc <= self.n
    }

    /// Dense index of a side.
    pub fn hid(s: Side) -> usize {
        (s.arc - 1) * 2 + s.side as usize
    }

    fn slots(&self) -> usize {
        2 * (self.n + self.m)
    }

    /// Triangle index and position of every side.
    pub fn locate(&self) -> Vec<Option<(usize, usize)>> {
        let mut loc = vec![None; self.slots()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for (p, &s) in tri.iter().enumerate() {
                loc[Self::hid(s)] = Some((t, p));
            }
        }
        loc
    }

    fn twin_of(&self, s: Side) -> Option<Side> {
        self.is_internal(s.arc).then(|| s.twin())
    }

    fn prev_in(&self, loc: &[Option<(usize, usize)>], s: Side) -> Side {
        let (t, p) = loc[Self::hid(s)].expect("side present");
        self.triangles[t][(p + 2) % 3]
    }

    fn next_in(&self, loc: &[Option<(usize, usize)>], s: Side) -> Side {
        let (t, p) = loc[Self::hid(s)].expect("side present");
        self.triangles[t][(p + 1) % 3]
    }

    /// Counterclockwise rotation around the origin of `s`.
    fn sigma(&self, loc: &[Option<(usize, usize)>], s: Side) -> Option<Side> {
        self.twin_of(self.prev_in(loc, s))
    }

    fn all_sides(&self) -> Vec<Side> {
        let mut v = Vec::with_capacity(self.slots());
        for a in 1..=self.n {
            v.push(Side::new(a, 0));
            v.push(Side::new(a, 1));
        }
        for a in self.n + 1..=self.n + self.m {
            v.push(Side::new(a, 0));
        }
        v
    }

    fn compute_vertices(&self, loc: &[Option<(usize, usize)>]) -> Vertices {
        const NONE: usize = usize::MAX;
        let mut origin = vec![NONE; self.slots()];
        let mut interior = Vec::new();
        for b in self.n + 1..=self.n + self.m {
            let id = interior.len();
            interior.push(false);
            let mut s = Side::new(b, 0);
            loop {
                origin[Self::hid(s)] = id;
                match self.sigma(loc, s) {
                    Some(t) => s = t,
                    None => break,
                }
            }
        }
        for s in self.all_sides() {
            if origin[Self::hid(s)] != NONE {
                continue;
            }
            let id = interior.len();
            interior.push(true);
            let mut cur = s;
            while origin[Self::hid(cur)] == NONE {
                origin[Self::hid(cur)] = id;
                cur = self.sigma(loc, cur).expect("interior orbit is a cycle");
            }
        }
        let mut puncture = vec![None; interior.len()];
        for (k, a) in self.anchors.iter().enumerate() {
            if a.arc >= 1 && a.arc <= self.n + self.m {
                let v = origin[Self::hid(*a)];
                if v != NONE && interior[v] {
                    puncture[v] = Some(k);
                }
            }
        }
        Vertices {
            origin,
            count: interior.len(),
            interior,
            puncture,
        }
    }

    pub fn vertices(&self) -> Vertices {
        self.compute_vertices(&self.locate())
    }

    /// Checks the gluing against the surface spec: side counts, connectivity,
    /// boundary cycles, interior vertices and anchors.
    pub fn check(&self) -> Result<(), TriError> {
        let bad = |s: String| Err(TriError::Invalid(s));
        let aleph = self.spec.triangle_count()?;
        if self.triangles.len() != aleph {
            return bad(format!("{} triangles, expected {aleph}", self.triangles.len()));
        }
        let mut seen = vec![0u8; self.slots()];
        for tri in &self.triangles {
            for s in tri {
                if s.arc == 0 || s.arc > self.n + self.m || s.side > 1 {
                    return bad(format!("side ({}, {}) out of range", s.arc, s.side));
                }
                if s.arc > self.n && s.side != 0 {
                    return bad(format!("boundary segment {} used with side 1", s.arc));
                }
                seen[Self::hid(*s)] += 1;
            }
        }
        for s in self.all_sides() {
            if seen[Self::hid(s)] != 1 {
                return bad(format!("side ({}, {}) used {} times", s.arc, s.side, seen[Self::hid(s)]));
            }
        }
        let loc = self.locate();
        // connectivity through internal arcs
        let mut reached = vec![false; self.triangles.len()];
        let mut stack = vec![0usize];
        reached[0] = true;
        while let Some(t) = stack.pop() {
            for s in self.triangles[t] {
                if let Some(w) = self.twin_of(s) {
                    let (u, _) = loc[Self::hid(w)].unwrap();
                    if !reached[u] {
                        reached[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return bad("gluing is disconnected".into());
        }
        let v = self.compute_vertices(&loc);
        // boundary cycles in surface spec order
        let mut start = self.n + 1;
        for &mj in &self.spec.boundaries {
            for k in 0..mj {
                let s = Side::new(start + k, 0);
                let follower = Side::new(start + (k + 1) % mj, 0);
                let dest = v.origin[Self::hid(self.next_in(&loc, s))];
                if dest != v.origin[Self::hid(follower)] {
                    return bad(format!("boundary segment {} is not followed by {}", s.arc, follower.arc));
                }
            }
            start += mj;
        }
        let inner = v.interior.iter().filter(|&&i| i).count();
        if inner != self.spec.p() {
            return bad(format!("{inner} interior vertices, expected {}", self.spec.p()));
        }
        let euler = v.count as i64 - (self.n + self.m) as i64 + self.triangles.len() as i64;
        let expected = 2 - 2 * self.spec.genus as i64 - self.spec.b() as i64;
        if euler != expected {
            return bad(format!("euler characteristic {euler}, expected {expected}"));
        }
        if self.anchors.len() != self.spec.p() {
            return bad("wrong number of puncture anchors".into());
        }
        let mut used = BTreeSet::new();
        for (k, a) in self.anchors.iter().enumerate() {
            if a.arc == 0 || a.arc > self.n || a.side > 1 {
                return bad(format!("anchor of puncture {k} is not an internal side"));
            }
            let vert = v.origin[Self::hid(*a)];
            if !v.interior[vert] || !used.insert(vert) {
                return bad(format!("anchor of puncture {k} does not pick a distinct puncture"));
            }
        }
        Ok(())
    }

    pub fn self_folded(&self) -> Vec<SelfFolded> {
        let v = self.vertices();
        let mut out = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                if self.is_internal(a.arc) && b == a.twin() {
                    out.push(SelfFolded {
                        triangle: t,
                        folded: a.arc,
                        enclosing: tri[(k + 2) % 3],
                        puncture: v.puncture[v.origin[Self::hid(b)]].expect("enclosed vertex is a puncture"),
                    });
                }
            }
        }
        out
    }

    pub fn arc_kind(&self, arc: usize) -> Result<ArcKind, TriError> {
        if arc == 0 || arc > self.n + self.m {
            return Err(TriError::UnknownArc(arc));
        }
        if arc > self.n {
            return Ok(ArcKind::Boundary);
        }
        if self.self_folded().iter().any(|f| f.folded == arc) {
            Ok(ArcKind::SelfFolded)
        } else {
            Ok(ArcKind::Ordinary)
        }
    }

    pub fn is_self_folded(&self, arc: usize) -> bool {
        matches!(self.arc_kind(arc), Ok(ArcKind::SelfFolded))
    }

    /// Self-folded edges, sorted.
    pub fn self_folded_edges(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.self_folded().iter().map(|f| f.folded).collect();
        v.sort();
        v
    }

    /// Punctures enclosed in self-folded triangles.
    pub fn isolated_punctures(&self) -> BTreeSet<String> {
        let labels = self.spec.puncture_labels();
        self.self_folded()
            .iter()
            .map(|f| labels[f.puncture].clone())
            .collect()
    }

    pub fn is_admissible(&self) -> bool {
        self.isolated_punctures().len() == self.spec.p()
    }

    /// Sides leaving puncture `k`, in counterclockwise order starting at its anchor.
    pub fn around_puncture(&self, k: usize) -> Vec<Side> {
        let loc = self.locate();
        let start = self.anchors[k];
        let mut out = vec![start];
        let mut cur = self.sigma(&loc, start).unwrap();
        while cur != start {
            out.push(cur);
            cur = self.sigma(&loc, cur).unwrap();
        }
        out
    }

    /// Triangle holding a side.
    pub fn face_of(&self, s: Side) -> usize {
        self.locate()[Self::hid(s)].expect("side present").0
    }

    /// True when the quadrilateral around `arc` has identified sides, the
    /// situation in which the flip follows the side-sequence rule without
    /// a closer geometric check.
    pub fn flip_is_degenerate(&self, arc: usize) -> bool {
        let loc = self.locate();
        let h = Side::new(arc, 0);
        let g = h.twin();
        let quad = [
            self.next_in(&loc, h),
            self.prev_in(&loc, h),
            self.next_in(&loc, g),
            self.prev_in(&loc, g),
        ];
        let arcs: BTreeSet<usize> = quad.iter().map(|s| s.arc).collect();
        arcs.len() < 4
    }

    /// Diagonal exchange at an internal arc that is not a self-folded edge.
    /// The new diagonal keeps the label `arc`.
    pub fn flip(&self, arc: usize) -> Result<Triangulation, TriError> {
        if arc == 0 || arc > self.n + self.m {
            return Err(TriError::UnknownArc(arc));
        }
        if arc > self.n {
            return Err(TriError::NotFlippable(arc));
        }
        let loc = self.locate();
        let h = Side::new(arc, 0);
        let g = h.twin();
        let (t1, p1) = loc[Self::hid(h)].unwrap();
        let (t2, p2) = loc[Self::hid(g)].unwrap();
        if t1 == t2 {
            return Err(TriError::NotFlippable(arc));
        }
        let a1 = self.triangles[t1][(p1 + 1) % 3];
        let a2 = self.triangles[t1][(p1 + 2) % 3];
        let b1 = self.triangles[t2][(p2 + 1) % 3];
        let b2 = self.triangles[t2][(p2 + 2) % 3];
        let mut anchors = self.anchors.clone();
        for a in anchors.iter_mut() {
            if a.arc == arc {
                let mut cur = self.sigma(&loc, *a).unwrap();
                while cur.arc == arc {
                    cur = self.sigma(&loc, cur).unwrap();
                    if cur == *a {
                        return Err(TriError::NotFlippable(arc));
                    }
                }
                *a = cur;
            }
        }
        let mut triangles = self.triangles.clone();
        triangles[t1] = [h, a2, b1];
        triangles[t2] = [g, b2, a1];
        let out = Triangulation {
            spec: self.spec.clone(),
            n: self.n,
            m: self.m,
            triangles,
            anchors,
        };
        debug_assert!(out.check().is_ok(), "flip produced {:?}", out.check());
        Ok(out)
    }

    /// L-flip at a self-folded edge: a loop, so the triangulation is unchanged.
    pub fn lflip(&self, arc: usize) -> Result<Triangulation, TriError> {
        if self.is_self_folded(arc) {
            Ok(self.clone())
        } else {
            Err(TriError::NotSelfFolded(arc))
        }
    }

    /// Applies a relabelling of internal arcs: `map[a]` is the new side of `(a, 0)`.
    pub fn relabeled(&self, map: &[Side]) -> Result<Triangulation, TriError> {
        let image: BTreeSet<usize> = map[1..].iter().map(|s| s.arc).collect();
        if map.len() != self.n + 1 || image != (1..=self.n).collect() {
            return Err(TriError::Invalid("relabelling is not a bijection".into()));
        }
        let f = |s: Side| -> Side {
            if s.arc > self.n {
                s
            } else {
                let t = map[s.arc];
                Side::new(t.arc, t.side ^ s.side)
            }
        };
        let triangles = self.triangles.iter().map(|tri| tri.map(f)).collect();
        let anchors = self.anchors.iter().map(|&a| f(a)).collect();
        Ok(Triangulation {
            spec: self.spec.clone(),
            n: self.n,
            m: self.m,
            triangles,
            anchors,
        })
    }

    /// Relabels arcs by a breadth-first walk that starts at the first
    /// boundary segment.  Two triangulations with the same boundary and
    /// puncture labels get equal keys exactly when an arc relabelling maps
    /// one onto the other.
    pub fn canonical(&self) -> Canonical {
        let loc = self.locate();
        let mut label: Vec<Option<Side>> = vec![None; self.slots()];
        for b in self.n + 1..=self.n + self.m {
            label[Self::hid(Side::new(b, 0))] = Some(Side::new(b, 0));
        }
        let mut next = 1usize;
        let mut seen = vec![false; self.triangles.len()];
        let mut queue = VecDeque::from([Side::new(self.n + 1, 0)]);
        let mut faces = Vec::with_capacity(self.triangles.len());
        while let Some(e) = queue.pop_front() {
            let (t, p) = loc[Self::hid(e)].unwrap();
            if seen[t] {
                continue;
            }
            seen[t] = true;
            let mut face = [Side::new(0, 0); 3];
            for k in 0..3 {
                let h = self.triangles[t][(p + k) % 3];
                if label[Self::hid(h)].is_none() {
                    label[Self::hid(h)] = Some(Side::new(next, 0));
                    label[Self::hid(h.twin())] = Some(Side::new(next, 1));
                    next += 1;
                }
                face[k] = label[Self::hid(h)].unwrap();
                if let Some(w) = self.twin_of(h) {
                    queue.push_back(w);
                }
            }
            faces.push(face);
        }
        let v = self.compute_vertices(&loc);
        let mut anchors = Vec::with_capacity(self.anchors.len());
        for a in &self.anchors {
            let vert = v.origin[Self::hid(*a)];
            let best = self
                .all_sides()
                .into_iter()
                .filter(|&s| v.origin[Self::hid(s)] == vert)
                .map(|s| label[Self::hid(s)].unwrap())
                .min()
                .unwrap();
            anchors.push(best);
        }
        let mut key = Vec::with_capacity(12 * faces.len() + 4 * anchors.len() + 4);
        let mut put = |s: Side| key.extend_from_slice(&((s.arc * 2 + s.side as usize) as u32).to_le_bytes());
        for f in &faces {
            for &s in f {
                put(s);
            }
        }
        for &a in &anchors {
            put(a);
        }
        let mut relabel = vec![Side::new(0, 0); self.n + 1];
        for (a, slot) in relabel.iter_mut().enumerate().skip(1) {
            *slot = label[Self::hid(Side::new(a, 0))].unwrap();
        }
        Canonical {
            key,
            relabel,
            triangulation: Triangulation {
                spec: self.spec.clone(),
                n: self.n,
                m: self.m,
                triangles: faces,
                anchors,
            },
        }
    }

    pub fn canonical_form(&self) -> Vec<u8> {
        self.canonical().key
    }

    pub fn to_json(&self) -> Value {
        let mut arcs = Vec::new();
        for a in 1..=self.n + self.m {
            let kind = if a <= self.n { "internal" } else { "boundary" };
            arcs.push(json!({"label": a, "kind": kind}));
        }
        let labels = self.spec.puncture_labels();
        let mut punct = serde_json::Map::new();
        for (k, a) in self.anchors.iter().enumerate() {
            punct.insert(labels[k].clone(), json!(a));
        }
        json!({
            "surface": self.spec.to_json_value(),
            "arcs": arcs,
            "triangles": self.triangles,
            "punctures": punct,
        })
    }

    pub fn from_json(v: &Value) -> Result<Triangulation, TriError> {
        let obj = v
            .as_object()
            .ok_or_else(|| TriError::Invalid("expected an object".into()))?;
        for k in obj.keys() {
            if !["surface", "arcs", "triangles", "punctures", "signs"].contains(&k.as_str()) {
                return Err(TriError::Invalid(format!("unknown key {k}")));
            }
        }
        let spec = SurfaceSpec::from_json_value(
            obj.get("surface")
                .ok_or_else(|| TriError::Invalid("missing surface".into()))?,
        )?;
        let triangles: Vec<[Side; 3]> = serde_json::from_value(
            obj.get("triangles")
                .cloned()
                .ok_or_else(|| TriError::Invalid("missing triangles".into()))?,
        )
        .map_err(|e| TriError::Invalid(e.to_string()))?;
        if let Some(arcs) = obj.get("arcs") {
            let n = spec.rank_open_arcs()?;
            let arcs = arcs
                .as_array()
                .ok_or_else(|| TriError::Invalid("arcs must be an array".into()))?;
            if arcs.len() != n + spec.m() {
                return Err(TriError::Invalid("arc list has the wrong length".into()));
            }
            for a in arcs {
                let label = a["label"].as_u64().unwrap_or(0) as usize;
                let want = if label >= 1 && label <= n { "internal" } else { "boundary" };
                if a["kind"].as_str() != Some(want) || label == 0 || label > n + spec.m() {
                    return Err(TriError::Invalid(format!("bad arc entry {a}")));
                }
            }
        }
        let labels = spec.puncture_labels();
        let anchors = match obj.get("punctures") {
            Some(p) => {
                let map: BTreeMap<String, Side> =
                    serde_json::from_value(p.clone()).map_err(|e| TriError::Invalid(e.to_string()))?;
                if map.len() != labels.len() {
                    return Err(TriError::Invalid("puncture anchors do not match the surface".into()));
                }
                labels
                    .iter()
                    .map(|l| {
                        map.get(l)
                            .copied()
                            .ok_or_else(|| TriError::Invalid(format!("no anchor for puncture {l}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
            None if labels.len() <= 1 => {
                // a lone puncture is the unique interior vertex
                let probe = Triangulation {
                    n: spec.rank_open_arcs()?,
                    m: spec.m(),
                    spec: Arc::new(spec.clone()),
                    triangles: triangles.clone(),
                    anchors: vec![],
                };
                let v = probe.vertices();
                probe
                    .all_sides()
                    .into_iter()
                    .filter(|s| v.interior[v.origin[Self::hid(*s)]])
                    .take(labels.len())
                    .collect()
            }
            None => return Err(TriError::Invalid("punctures key required with several punctures".into())),
        };
        Triangulation::from_parts(spec, triangles, anchors)
    }
}

/// Triangulation with a sign on each vortex, kept in normal form: enclosed
/// vortices carry `+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedTriangulation {
    pub base: Triangulation,
    pub signs: BTreeMap<String, i8>,
}

impl SignedTriangulation {
    pub fn new(base: Triangulation, signs: BTreeMap<String, i8>) -> Result<Self, TriError> {
        let expected: BTreeSet<&String> = base.spec().vortex.iter().collect();
        let given: BTreeSet<&String> = signs.keys().collect();
        if expected != given || signs.values().any(|&s| s != 1 && s != -1) {
            return Err(TriError::Invalid("signs must be +1/-1 on exactly the vortices".into()));
        }
        let mut st = SignedTriangulation { base, signs };
        st.normalize();
        Ok(st)
    }

    /// All vortices signed `+1`.
    pub fn plus(base: Triangulation) -> Self {
        let signs = base.spec().vortex.iter().map(|v| (v.clone(), 1)).collect();
        SignedTriangulation { base, signs }
    }

    pub fn initial(spec: &SurfaceSpec) -> Result<Self, TriError> {
        Ok(Self::plus(Triangulation::initial(spec)?))
    }

    /// Vortices enclosed in self-folded triangles.
    pub fn enclosed_vortices(&self) -> BTreeSet<String> {
        let spec = self.base.spec();
        self.base
            .isolated_punctures()
            .into_iter()
            .filter(|p| spec.is_vortex(p))
            .collect()
    }

    pub fn normalize(&mut self) {
        for v in self.enclosed_vortices() {
            self.signs.insert(v, 1);
        }
    }

    /// Flip at an ordinary arc, or the L-flip loop at a self-folded edge
    /// around a plain puncture.
    pub fn signed_flip(&self, arc: usize) -> Result<SignedTriangulation, TriError> {
        let spec = self.base.spec();
        let labels = spec.puncture_labels();
        if let Some(f) = self.base.self_folded().iter().find(|f| f.folded == arc) {
            if spec.is_vortex(&labels[f.puncture]) {
                return Err(TriError::VortexLFlip(arc));
            }
            return Ok(self.clone());
        }
        let base = self.base.flip(arc)?;
        let mut out = SignedTriangulation {
            base,
            signs: self.signs.clone(),
        };
        out.normalize();
        Ok(out)
    }

    /// Flip twice at an enclosing edge: through the digon configuration to
    /// the other self-folded triangle around the same puncture.
    pub fn diamond_flip(&self, enclosing: usize) -> Result<SignedTriangulation, TriError> {
        let sf = self
            .base
            .self_folded()
            .into_iter()
            .find(|f| f.enclosing.arc == enclosing && self.base.is_internal(enclosing))
            .ok_or(TriError::NotEnclosing(enclosing))?;
        let mid = self.signed_flip(enclosing)?;
        let out = mid.signed_flip(sf.folded)?;
        debug_assert!(out
            .base
            .self_folded()
            .iter()
            .any(|g| g.puncture == sf.puncture && g.folded == enclosing));
        Ok(out)
    }

    pub fn canonical(&self) -> Canonical {
        let mut c = self.base.canonical();
        for (_, &s) in &self.signs {
            c.key.push(if s > 0 { 1 } else { 2 });
        }
        c
    }

    pub fn canonical_form(&self) -> Vec<u8> {
        self.canonical().key
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.base.to_json();
        v["signs"] = json!(self.signs);
        v
    }

    pub fn from_json(v: &Value) -> Result<Self, TriError> {
        let base = Triangulation::from_json(v)?;
        let signs: BTreeMap<String, i8> = match v.get("signs") {
            Some(s) => serde_json::from_value(s.clone()).map_err(|e| TriError::Invalid(e.to_string()))?,
            None => base.spec().vortex.iter().map(|l| (l.clone(), 1)).collect(),
        };
        SignedTriangulation::new(base, signs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digon() -> Triangulation {
        Triangulation::initial(&SurfaceSpec::with_plain(0, &[2], 1)).unwrap()
    }

    #[test]
    fn initial_shapes() {
        let sq = Triangulation::initial(&SurfaceSpec::disk(4)).unwrap();
        assert_eq!(sq.triangles().len(), 2);
        assert_eq!(sq.n(), 1);

        let mono = Triangulation::initial(&SurfaceSpec::with_plain(0, &[1], 1)).unwrap();
        assert_eq!(mono.triangles().len(), 1);
        assert_eq!(mono.self_folded_edges(), vec![1]);
        assert_eq!(mono.self_folded()[0].enclosing, Side::new(2, 0));

        let tri = Triangulation::initial(&SurfaceSpec::with_plain(0, &[3], 1)).unwrap();
        assert_eq!(tri.n(), 3);
        assert_eq!(tri.triangles().len(), 3);
        assert_eq!(tri.self_folded().len(), 1);
        assert!(tri.is_admissible());

        for spec in [
            SurfaceSpec::with_plain(1, &[1], 0),
            SurfaceSpec::with_plain(1, &[2, 1], 2),
            SurfaceSpec::with_plain(2, &[1], 1),
            SurfaceSpec::new(0, &[1, 1], &[], &[]),
            SurfaceSpec::new(0, &[3, 2, 1], &["A"], &["B"]),
        ] {
            let t = Triangulation::initial(&spec).unwrap();
            t.check().unwrap();
            assert!(t.is_admissible(), "{spec}");
        }
    }

    #[test]
    fn digon_labels_and_flips() {
        let tl = digon();
        assert_eq!(tl.self_folded_edges(), vec![2]);
        assert_eq!(tl.self_folded()[0].enclosing.arc, 1);
        assert_eq!(tl.isolated_punctures().len(), 1);

        let tm = tl.flip(1).unwrap();
        assert!(tm.isolated_punctures().is_empty());
        assert!(tm.self_folded().is_empty());
        let tr = tm.flip(2).unwrap();
        assert_eq!(tr.self_folded_edges(), vec![1]);
        assert_eq!(tr.self_folded()[0].enclosing.arc, 2);
        assert_ne!(tr.canonical_form(), tl.canonical_form());
        assert_eq!(tm.flip(1).unwrap().canonical_form(), tl.canonical_form());

        assert_eq!(tl.flip(2), Err(TriError::NotFlippable(2)));
        assert_eq!(tl.flip(3), Err(TriError::NotFlippable(3)));
        assert_eq!(tl.lflip(2).unwrap(), tl);
        assert_eq!(tl.lflip(1), Err(TriError::NotSelfFolded(1)));
    }

    #[test]
    fn square_has_two_distinct_forms() {
        let a = Triangulation::initial(&SurfaceSpec::disk(4)).unwrap();
        let b = a.flip(1).unwrap();
        assert_ne!(a.canonical_form(), b.canonical_form());
        assert_eq!(b.flip(1).unwrap().canonical_form(), a.canonical_form());
    }

    #[test]
    fn relabel_invariance() {
        let t = Triangulation::initial(&SurfaceSpec::with_plain(0, &[3], 2)).unwrap();
        let n = t.n();
        let mut map = vec![Side::new(0, 0)];
        for a in 1..=n {
            map.push(Side::new(n + 1 - a, (a % 2) as u8));
        }
        let r = t.relabeled(&map).unwrap();
        r.check().unwrap();
        assert_eq!(r.canonical_form(), t.canonical_form());
        let c = r.canonical();
        assert_eq!(c.triangulation.canonical_form(), c.key);
    }

    #[test]
    fn signed_flips() {
        let spec = SurfaceSpec::new(0, &[2], &[], &["V"]);
        let tl = SignedTriangulation::initial(&spec).unwrap();
        assert_eq!(tl.signed_flip(2), Err(TriError::VortexLFlip(2)));
        let mut tm = tl.signed_flip(1).unwrap();
        tm.signs.insert("V".into(), -1);
        let back = tm.signed_flip(1).unwrap();
        assert_eq!(back.signs["V"], 1);
        let tr = tl.diamond_flip(1).unwrap();
        assert_eq!(tr.base.self_folded_edges(), vec![1]);
        let again = tr.diamond_flip(2).unwrap();
        assert_eq!(again.canonical_form(), tl.canonical_form());

        let mono = SignedTriangulation::initial(&SurfaceSpec::with_plain(0, &[1], 1)).unwrap();
        assert_eq!(mono.diamond_flip(2), Err(TriError::NotEnclosing(2)));
    }

    #[test]
    fn json_round_trip() {
        let spec = SurfaceSpec::new(0, &[3], &["A"], &["B"]);
        let st = SignedTriangulation::initial(&spec).unwrap();
        let back = SignedTriangulation::from_json(&st.to_json()).unwrap();
        assert_eq!(back, st);
        let mut broken = st.to_json();
        broken["triangles"][0][0]["arc"] = json!(1);
        broken["triangles"][0][1]["arc"] = json!(1);
        assert!(SignedTriangulation::from_json(&broken).is_err());
    }
}
