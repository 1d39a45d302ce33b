//! Flip graphs by breadth-first search over canonical forms, and endpoint
//! checks for the local relations among flips.
//!
//! Vertices are canonical triangulations.  Internal arc labels therefore
//! change from vertex to vertex; every edge stores `relabel`, mapping arc
//! labels of the flipped representative of its source to those of its target.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::quiver::qp_from_triangulation;
use crate::surface::SurfaceSpec;
use crate::triangulation::{ArcKind, SignedTriangulation, TriError, Triangulation};

pub const DEFAULT_MAX_VERTICES: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error("flip graph is incomplete (truncated at {0} vertices)")]
    IncompleteGraph(usize),
    #[error("max_vertices must be at least 1")]
    ZeroLimit,
    #[error("bad flip graph document: {0}")]
    Import(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Undecorated,
    Signed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Flip,
    Lflip,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Flip => "flip",
            EdgeKind::Lflip => "lflip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub arc: usize,
    pub kind: EdgeKind,
    /// Sign given to a vortex that the flip releases from its self-folded triangle.
    pub branch: Option<i8>,
    /// `relabel[a]` is the target label of source arc `a` (index 0 unused).
    pub relabel: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub key: Vec<u8>,
    pub rep: SignedTriangulation,
}

#[derive(Clone, Debug)]
pub struct FlipGraph {
    pub spec: SurfaceSpec,
    pub mode: Mode,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub complete: bool,
    index: HashMap<Vec<u8>, usize>,
    out: Vec<Vec<usize>>,
}

struct Step {
    arc: usize,
    kind: EdgeKind,
    branch: Option<i8>,
    key: Vec<u8>,
    relabel: Vec<usize>,
    rep: SignedTriangulation,
}

/// All outgoing moves of a canonical representative.
fn moves(st: &SignedTriangulation) -> Vec<Step> {
    let t = &st.base;
    let spec = t.spec();
    let labels = spec.puncture_labels();
    let folds = t.self_folded();
    let mut out = Vec::new();
    for arc in 1..=t.n() {
        if let Some(f) = folds.iter().find(|f| f.folded == arc) {
            if spec.is_vortex(&labels[f.puncture]) {
                continue;
            }
            out.push(Step {
                arc,
                kind: EdgeKind::Lflip,
                branch: None,
                key: st.canonical_form(),
                relabel: (0..=t.n()).collect(),
                rep: st.clone(),
            });
            continue;
        }
        let flipped = st.signed_flip(arc).expect("ordinary arc flips");
        let before = st.enclosed_vortices();
        let after = flipped.enclosed_vortices();
        let released: Vec<&String> = before.difference(&after).collect();
        let branches: Vec<Option<i8>> = if released.is_empty() { vec![None] } else { vec![Some(1), Some(-1)] };
        for br in branches {
            let mut next = flipped.clone();
            if let Some(s) = br {
                next.signs.insert(released[0].clone(), s);
            }
            let c = next.canonical();
            let mut rep = SignedTriangulation {
                base: c.triangulation,
                signs: next.signs.clone(),
            };
            rep.normalize();
            out.push(Step {
                arc,
                kind: EdgeKind::Flip,
                branch: br,
                key: c.key,
                relabel: c.relabel.iter().map(|s| s.arc).collect(),
                rep,
            });
        }
    }
    out
}

fn thread_count() -> Option<usize> {
    std::env::var("SFL_THREADS").ok()?.parse().ok().filter(|&k| k > 0)
}

impl FlipGraph {
    /// Breadth-first enumeration from the initial triangulation.  Thread
    /// count comes from `SFL_THREADS` when set.
    pub fn build(spec: &SurfaceSpec, mode: Mode, max_vertices: usize) -> Result<FlipGraph, GraphError> {
        Self::build_with_threads(spec, mode, max_vertices, thread_count())
    }

    pub fn build_with_threads(
        spec: &SurfaceSpec,
        mode: Mode,
        max_vertices: usize,
        threads: Option<usize>,
    ) -> Result<FlipGraph, GraphError> {
        if max_vertices == 0 {
            return Err(GraphError::ZeroLimit);
        }
        let work = match mode {
            Mode::Undecorated => spec.forget_vortices(),
            Mode::Signed => spec.clone(),
        };
        work.ensure_valid().map_err(TriError::from)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| GraphError::Import(e.to_string()))?;
        let start = SignedTriangulation::initial(&work)?;
        let mut g = FlipGraph {
            spec: work,
            mode,
            vertices: vec![],
            edges: vec![],
            complete: true,
            index: HashMap::new(),
            out: vec![],
        };
        g.add_vertex(start.canonical_form(), start);
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let reps: Vec<&SignedTriangulation> = frontier.iter().map(|&v| &g.vertices[v].rep).collect();
            let found: Vec<Vec<Step>> = pool.install(|| reps.par_iter().map(|st| moves(st)).collect());
            let mut next = Vec::new();
            for (&v, steps) in frontier.iter().zip(found) {
                for s in steps {
                    let target = match g.index.get(&s.key) {
                        Some(&t) => t,
                        None if g.vertices.len() < max_vertices => {
                            let t = g.add_vertex(s.key.clone(), s.rep);
                            next.push(t);
                            t
                        }
                        None => {
                            g.complete = false;
                            continue;
                        }
                    };
                    g.push_edge(Edge {
                        source: v,
                        target,
                        arc: s.arc,
                        kind: s.kind,
                        branch: s.branch,
                        relabel: s.relabel,
                    });
                }
            }
            frontier = next;
        }
        Ok(g)
    }

    fn add_vertex(&mut self, key: Vec<u8>, rep: SignedTriangulation) -> usize {
        let id = self.vertices.len();
        self.index.insert(key.clone(), id);
        self.vertices.push(Vertex { key, rep });
        self.out.push(vec![]);
        id
    }

    fn push_edge(&mut self, e: Edge) {
        self.out[e.source].push(self.edges.len());
        self.edges.push(e);
    }

    pub fn n(&self) -> usize {
        self.vertices[0].rep.base.n()
    }

    pub fn vertex_of(&self, key: &[u8]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> {
        self.out[v].iter().map(move |&e| &self.edges[e])
    }

    fn require_complete(&self) -> Result<(), GraphError> {
        if self.complete {
            Ok(())
        } else {
            Err(GraphError::IncompleteGraph(self.vertices.len()))
        }
    }

    /// Vertices whose in- or out-degree differs from `n`, and vertex pairs
    /// with unequal edge counts in the two directions.
    pub fn regularity_violations(&self) -> Vec<String> {
        let n = self.n();
        let mut indeg = vec![0usize; self.vertices.len()];
        let mut pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            indeg[e.target] += 1;
            *pair.entry((e.source, e.target)).or_default() += 1;
        }
        let mut bad = Vec::new();
        for v in 0..self.vertices.len() {
            let outd = self.out[v].len();
            if outd != n || indeg[v] != n {
                bad.push(format!("vertex {v}: out {outd}, in {}, n {n}", indeg[v]));
            }
        }
        for (&(u, v), &c) in &pair {
            if u != v && pair.get(&(v, u)).copied().unwrap_or(0) != c {
                bad.push(format!("edges {u}->{v} not matched by {v}->{u}"));
            }
        }
        bad
    }

    /// Number of L-flip loops at `v`.
    pub fn lflip_loops(&self, v: usize) -> usize {
        self.out_edges(v).filter(|e| e.kind == EdgeKind::Lflip).count()
    }

    /// Flip edges from a vertex to itself; they appear when a flip lands on a
    /// triangulation equal to the source up to relabelling.
    pub fn flip_self_edges(&self, v: usize) -> usize {
        self.out_edges(v).filter(|e| e.kind == EdgeKind::Flip && e.target == v).count()
    }

    /// Self-folded edges around plain punctures (all of them when undecorated).
    pub fn expected_loops(&self, v: usize) -> usize {
        let t = &self.vertices[v].rep.base;
        let labels = t.spec().puncture_labels();
        t.self_folded()
            .iter()
            .filter(|f| !self.spec.is_vortex(&labels[f.puncture]))
            .count()
    }

    /// For each vertex: the number of raw sign assignments on its base
    /// triangulation that normalise to it, and `2^(enclosed vortices)`.
    pub fn sign_fibers(&self) -> Vec<(usize, usize)> {
        let vortices: Vec<String> = self.spec.vortex.iter().cloned().collect();
        self.vertices
            .iter()
            .map(|vx| {
                let mut hits = 0;
                for mask in 0..(1usize << vortices.len()) {
                    let signs = vortices
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l.clone(), if mask >> i & 1 == 1 { -1 } else { 1 }))
                        .collect();
                    let st = SignedTriangulation::new(vx.rep.base.clone(), signs).unwrap();
                    if st.canonical_form() == vx.key {
                        hits += 1;
                    }
                }
                (hits, 1usize << vx.rep.enclosed_vortices().len())
            })
            .collect()
    }

    /// Loops dropped, each 2-cycle kept once; flip self-edges stay as
    /// unoriented self-edges.
    pub fn to_unoriented(&self) -> Result<UnorientedGraph, GraphError> {
        self.require_complete()?;
        let mut edges = BTreeMap::new();
        for e in &self.edges {
            if e.kind == EdgeKind::Lflip {
                continue;
            }
            if e.source <= e.target {
                let k = (self.vertices[e.source].key.clone(), self.vertices[e.target].key.clone());
                *edges.entry(k).or_insert(0) += 1;
            }
        }
        Ok(UnorientedGraph {
            vertices: self.vertices.iter().map(|v| v.key.clone()).collect(),
            edges,
        })
    }

    /// Follows a path of arc labels given in the labelling of `start`.
    pub fn walk(&self, start: usize, perm: &[usize], path: &[(usize, EdgeKind)]) -> Option<(usize, Vec<usize>)> {
        let mut v = start;
        let mut perm = perm.to_vec();
        for &(label, kind) in path {
            let arc = perm[label];
            let e = self
                .out_edges(v)
                .filter(|e| e.arc == arc && e.kind == kind)
                .min_by_key(|e| e.branch.map(|b| -b))?;
            for p in perm.iter_mut().skip(1) {
                *p = e.relabel[*p];
            }
            v = e.target;
        }
        Some((v, perm))
    }

    pub fn verify_relations(&self) -> Result<RelationReport, GraphError> {
        self.require_complete()?;
        let mut rep = RelationReport::default();
        let id: Vec<usize> = (0..=self.n()).collect();
        let fl = EdgeKind::Flip;
        for v in 0..self.vertices.len() {
            let t = &self.vertices[v].rep.base;
            let q = qp_from_triangulation(t);
            let involved: Vec<bool> = (0..=t.n())
                .map(|a| a > 0 && t.self_folded().iter().any(|f| f.folded == a || f.enclosing.arc == a))
                .collect();
            for i in 1..=t.n() {
                for j in i + 1..=t.n() {
                    if involved[i] || involved[j] {
                        continue;
                    }
                    let (p, r) = (q.count(i, j), q.count(j, i));
                    let tag = format!("vertex {v} arcs {i},{j}");
                    if p + r == 0 {
                        let path = [(i, fl), (j, fl), (i, fl), (j, fl)];
                        if !self.path_clean(v, &path) {
                            continue;
                        }
                        let end = self.walk(v, &id, &path);
                        rep.square.record(end == Some((v, id.clone())), tag);
                    } else if p + r == 1 {
                        let path = [(i, fl), (j, fl), (i, fl), (j, fl), (i, fl)];
                        if !self.path_clean(v, &path) {
                            continue;
                        }
                        let mut swapped = id.clone();
                        swapped.swap(i, j);
                        let end = self.walk(v, &id, &path);
                        rep.pentagon.record(end == Some((v, swapped)), tag);
                    } else if (p >= 2 && r == 0) || (r >= 2 && p == 0) {
                        let (x, y) = if p >= 2 { (i, j) } else { (j, i) };
                        let a = self.walk(v, &id, &[(x, fl), (x, fl), (y, fl)]);
                        let b = self.walk(v, &id, &[(y, fl), (x, fl), (x, fl)]);
                        rep.fat_db.record(a.is_some() && a == b, tag);
                    }
                }
            }
            for cfg in self.digon_configs(v) {
                let Digon { e, f, tr, tm } = cfg;
                let (s, u, vv, r) = ((f, EdgeKind::Lflip), (e, fl), (f, fl), (e, EdgeKind::Lflip));
                let tag = format!("vertex {v} enclosing {e} folded {f}");
                let a = self.walk(v, &id, &[s, u, vv]);
                let b = self.walk(v, &id, &[u, vv, r]);
                let c = self.walk(tr.0, &tr.1, &[vv, u, s]);
                let d = self.walk(tr.0, &tr.1, &[r, vv, u]);
                rep.thin_db
                    .record(a.is_some() && a == b && c.is_some() && c == d, tag.clone());
                let x = self.walk(tm.0, &tm.1, &[u, s, u]);
                let y = self.walk(tm.0, &tm.1, &[vv, r, vv]);
                rep.sym_hex.record(x.is_some() && x == y, tag);
            }
        }
        Ok(rep)
    }

    /// True when every step of `path` from `v` is a flip at an arc not
    /// involved in a self-folded triangle.
    fn path_clean(&self, v: usize, path: &[(usize, EdgeKind)]) -> bool {
        let mut cur = v;
        let mut perm: Vec<usize> = (0..=self.n()).collect();
        for k in 0..path.len() {
            let t = &self.vertices[cur].rep.base;
            let arc = perm[path[k].0];
            if t
                .self_folded()
                .iter()
                .any(|f| f.folded == arc || f.enclosing.arc == arc)
            {
                return false;
            }
            match self.walk(cur, &perm, &path[k..k + 1]) {
                Some((w, p)) => {
                    cur = w;
                    perm = p;
                }
                None => return false,
            }
        }
        true
    }

    /// Self-folded triangles at `v` around plain punctures whose enclosing
    /// edge is internal, with the middle and right vertices of the digon.
    fn digon_configs(&self, v: usize) -> Vec<Digon> {
        let t = &self.vertices[v].rep.base;
        let labels = t.spec().puncture_labels();
        let id: Vec<usize> = (0..=t.n()).collect();
        let mut out = Vec::new();
        for f in t.self_folded() {
            if self.spec.is_vortex(&labels[f.puncture]) || !t.is_internal(f.enclosing.arc) {
                continue;
            }
            let (e, fo) = (f.enclosing.arc, f.folded);
            let Some(tm) = self.walk(v, &id, &[(e, EdgeKind::Flip)]) else { continue };
            let Some(tr) = self.walk(tm.0, &tm.1, &[(fo, EdgeKind::Flip)]) else { continue };
            out.push(Digon { e, f: fo, tm, tr });
        }
        out
    }

    /// Checks the six-step loops `suusuu` and `uusuus` and every rewrite in
    /// the chain between them, at each digon configuration.
    pub fn verify_br4_assembly(&self) -> Result<RelationReport, GraphError> {
        self.require_complete()?;
        let mut rep = RelationReport::default();
        let id: Vec<usize> = (0..=self.n()).collect();
        for v in 0..self.vertices.len() {
            for Digon { e, f, .. } in self.digon_configs(v) {
                use Letter::*;
                let letter = |c: Letter| match c {
                    S => (f, EdgeKind::Lflip),
                    U => (e, EdgeKind::Flip),
                    V => (f, EdgeKind::Flip),
                    R => (e, EdgeKind::Lflip),
                };
                let word = |w: &[Letter]| w.iter().map(|&c| letter(c)).collect::<Vec<_>>();
                // expressions of the chain and the rewrites between them
                let chain: [&[Letter]; 7] = [
                    &[S, U, U, S, U, U],
                    &[S, U, V, V, U, S, U, U],
                    &[U, V, R, V, V, R, V, U],
                    &[U, V, R, R, V, U],
                    &[U, V, R, V, V, R, V, U],
                    &[U, U, S, U, V, V, U, S],
                    &[U, U, S, U, U, S],
                ];
                let rewrites: [(usize, &[(usize, &[Letter], &[Letter])]); 6] = [
                    (0, &[(2, &[], &[V, V])]),
                    (1, &[(0, &[S, U, V], &[U, V, R]), (4, &[U, S, U], &[V, R, V])]),
                    (2, &[(3, &[V, V], &[])]),
                    (3, &[(3, &[], &[V, V])]),
                    (4, &[(1, &[V, R, V], &[U, S, U]), (5, &[R, V, U], &[V, U, S])]),
                    (5, &[(4, &[V, V], &[])]),
                ];
                let tag = format!("vertex {v} enclosing {e} folded {f}");
                let mut ok = chain
                    .iter()
                    .all(|w| self.walk(v, &id, &word(w)) == Some((v, id.clone())));
                for (from, subs) in rewrites {
                    for &(pos, old, new) in subs {
                        let prefix = word(&chain[from][..pos]);
                        let Some((w0, p0)) = self.walk(v, &id, &prefix) else {
                            ok = false;
                            continue;
                        };
                        let a = self.walk(w0, &p0, &word(old));
                        let b = self.walk(w0, &p0, &word(new));
                        ok &= a.is_some() && a == b;
                    }
                }
                rep.br4.record(ok, tag);
            }
        }
        Ok(rep)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph FG {\n");
        for (i, _) in self.vertices.iter().enumerate() {
            s.push_str(&format!("  v{i} [label=\"{i}\"];\n"));
        }
        for e in &self.edges {
            let label = match e.branch {
                Some(b) => format!("{}:{}:{}", e.arc, e.kind.as_str(), if b > 0 { "+" } else { "-" }),
                None => format!("{}:{}", e.arc, e.kind.as_str()),
            };
            s.push_str(&format!("  v{} -> v{} [label=\"{label}\"];\n", e.source, e.target));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Value {
        let vertices: Vec<Value> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| json!({"id": i, "key": hex(&v.key), "triangulation": v.rep.to_json()}))
            .collect();
        json!({
            "surface": self.spec.to_json_value(),
            "mode": self.mode,
            "complete": self.complete,
            "vertices": vertices,
            "edges": self.edges,
        })
    }

    pub fn from_json(v: &Value) -> Result<FlipGraph, GraphError> {
        let bad = |m: &str| GraphError::Import(m.to_string());
        let spec = SurfaceSpec::from_json_value(&v["surface"]).map_err(TriError::from)?;
        let mode: Mode = serde_json::from_value(v["mode"].clone()).map_err(|e| bad(&e.to_string()))?;
        let complete = v["complete"].as_bool().ok_or_else(|| bad("missing complete flag"))?;
        let mut g = FlipGraph {
            spec,
            mode,
            vertices: vec![],
            edges: vec![],
            complete,
            index: HashMap::new(),
            out: vec![],
        };
        for (i, vx) in v["vertices"].as_array().ok_or_else(|| bad("missing vertices"))?.iter().enumerate() {
            if vx["id"].as_u64() != Some(i as u64) {
                return Err(bad("vertex ids must be 0..k in order"));
            }
            let rep = SignedTriangulation::from_json(&vx["triangulation"])?;
            let key = rep.canonical_form();
            if vx["key"].as_str() != Some(hex(&key).as_str()) {
                return Err(bad("vertex key does not match its triangulation"));
            }
            g.add_vertex(key, rep);
        }
        let edges: Vec<Edge> = serde_json::from_value(v["edges"].clone()).map_err(|e| bad(&e.to_string()))?;
        for e in edges {
            if e.source >= g.vertices.len() || e.target >= g.vertices.len() {
                return Err(bad("edge endpoint out of range"));
            }
            g.push_edge(e);
        }
        Ok(g)
    }
}

#[derive(Clone, Copy)]
enum Letter {
    S,
    U,
    V,
    R,
}

struct Digon {
    e: usize,
    f: usize,
    tm: (usize, Vec<usize>),
    tr: (usize, Vec<usize>),
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Unoriented exchange graph on canonical keys; edge multiplicities count
/// distinct 2-cycles between the same pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnorientedGraph {
    pub vertices: Vec<Vec<u8>>,
    pub edges: BTreeMap<(Vec<u8>, Vec<u8>), usize>,
}

impl UnorientedGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.values().sum()
    }
}

/// Unoriented exchange graph built directly, without the oriented graph.
pub fn build_unoriented(spec: &SurfaceSpec, mode: Mode, max_vertices: usize) -> Result<UnorientedGraph, GraphError> {
    let work = match mode {
        Mode::Undecorated => spec.forget_vortices(),
        Mode::Signed => spec.clone(),
    };
    let start = SignedTriangulation::initial(&work)?;
    let mut seen: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut order = vec![start.canonical_form()];
    seen.insert(order[0].clone(), 0);
    let mut queue = std::collections::VecDeque::from([start]);
    let mut edges: BTreeMap<(Vec<u8>, Vec<u8>), usize> = BTreeMap::new();
    while let Some(st) = queue.pop_front() {
        let here = st.canonical_form();
        let hi = seen[&here];
        for arc in 1..=st.base.n() {
            if st.base.arc_kind(arc)? == ArcKind::SelfFolded {
                continue;
            }
            let flipped = st.signed_flip(arc)?;
            let released: Vec<String> = st
                .enclosed_vortices()
                .difference(&flipped.enclosed_vortices())
                .cloned()
                .collect();
            let mut targets = vec![flipped.clone()];
            if let Some(vx) = released.first() {
                let mut other = flipped.clone();
                other.signs.insert(vx.clone(), -1);
                targets.push(other);
            }
            for tgt in targets {
                let key = tgt.canonical_form();
                let ti = match seen.get(&key) {
                    Some(&i) => i,
                    None => {
                        if seen.len() >= max_vertices {
                            return Err(GraphError::IncompleteGraph(seen.len()));
                        }
                        let i = order.len();
                        seen.insert(key.clone(), i);
                        order.push(key.clone());
                        queue.push_back(tgt);
                        i
                    }
                };
                if hi <= ti {
                    *edges.entry((here.clone(), key)).or_insert(0) += 1;
                }
            }
        }
    }
    Ok(UnorientedGraph {
        vertices: order,
        edges,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationStat {
    pub found: usize,
    pub verified: usize,
    pub counterexamples: Vec<String>,
}

impl RelationStat {
    fn record(&mut self, ok: bool, what: String) {
        self.found += 1;
        if ok {
            self.verified += 1;
        } else {
            self.counterexamples.push(what);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub square: RelationStat,
    pub pentagon: RelationStat,
    pub fat_db: RelationStat,
    pub thin_db: RelationStat,
    pub sym_hex: RelationStat,
    pub br4: RelationStat,
}

impl RelationReport {
    pub fn stats(&self) -> [(&'static str, &RelationStat); 6] {
        [
            ("square", &self.square),
            ("pentagon", &self.pentagon),
            ("fat-db", &self.fat_db),
            ("thin-db", &self.thin_db),
            ("sym-hex", &self.sym_hex),
            ("br4", &self.br4),
        ]
    }

    pub fn ok(&self) -> bool {
        self.stats().iter().all(|(_, s)| s.counterexamples.is_empty())
    }
}

/// Used by the unoriented BFS and tests: the base triangulation of a vertex.
pub fn base_of(g: &FlipGraph, v: usize) -> &Triangulation {
    &g.vertices[v].rep.base
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(spec: SurfaceSpec, mode: Mode) -> FlipGraph {
        FlipGraph::build(&spec, mode, DEFAULT_MAX_VERTICES).unwrap()
    }

    #[test]
    fn disks() {
        for (m, count) in [(4, 2), (5, 5), (6, 14), (7, 42)] {
            let g = graph(SurfaceSpec::disk(m), Mode::Undecorated);
            assert_eq!(g.vertices.len(), count);
            assert!(g.regularity_violations().is_empty());
        }
        let g = graph(SurfaceSpec::disk(4), Mode::Undecorated);
        let u = g.to_unoriented().unwrap();
        assert_eq!((u.vertices.len(), u.edge_count()), (2, 1));
    }

    #[test]
    fn monogon_and_digon() {
        let g = graph(SurfaceSpec::with_plain(0, &[1], 1), Mode::Undecorated);
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].kind, EdgeKind::Lflip);

        let g = graph(SurfaceSpec::with_plain(0, &[2], 1), Mode::Undecorated);
        assert_eq!(g.vertices.len(), 3);
        assert!(g.regularity_violations().is_empty());
        let r = g.verify_relations().unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.thin_db.found, 2);
        let b = g.verify_br4_assembly().unwrap();
        assert_eq!((b.br4.found, b.br4.verified), (2, 2));
    }

    #[test]
    fn signed_digon() {
        let g = graph(SurfaceSpec::new(0, &[2], &[], &["V"]), Mode::Signed);
        assert_eq!(g.vertices.len(), 4);
        assert!(g.regularity_violations().is_empty(), "{:?}", g.regularity_violations());
        for v in 0..g.vertices.len() {
            assert_eq!(g.lflip_loops(v), 0);
        }
        for (hits, want) in g.sign_fibers() {
            assert_eq!(hits, want);
        }
    }

    #[test]
    fn truncation_and_threads() {
        let g = FlipGraph::build(&SurfaceSpec::with_plain(0, &[2], 1), Mode::Undecorated, 1).unwrap();
        assert!(!g.complete);
        assert!(g.verify_relations().is_err());
        let spec = SurfaceSpec::disk(7);
        let a = FlipGraph::build_with_threads(&spec, Mode::Undecorated, 1000, Some(1)).unwrap();
        let b = FlipGraph::build_with_threads(&spec, Mode::Undecorated, 1000, Some(4)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn exports() {
        let g = graph(SurfaceSpec::disk(4), Mode::Undecorated);
        let dot = g.to_dot();
        assert_eq!(dot.matches("->").count(), 2);
        let mono = graph(SurfaceSpec::with_plain(0, &[1], 1), Mode::Undecorated);
        assert!(mono.to_dot().contains("v0 -> v0 [label=\"1:lflip\"]"));
        let back = FlipGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back.to_json(), g.to_json());
    }
}

