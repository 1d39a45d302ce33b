//! Quivers with potential built from triangulations, with reduction and
//! mutation.
//!
//! Paths are written left to right: `ab` means `a` then `b`, so the target of
//! `a` is the source of `b`.  A potential is a sum of cyclic words, each
//! stored at its lexicographically least rotation.
//!
//! Reduction convention: for a quadratic term `c·ab` with
//! `W = c·ab + aU + bV + R`, the substitution `a -> a - c⁻¹V`,
//! `b -> b - c⁻¹U` turns `W` into `c·ab - c⁻¹·UV + R`, and the reduced
//! potential is `R - c⁻¹·UV` on the quiver without `a` and `b`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::triangulation::{SignedTriangulation, Triangulation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("quadratic term outside the reducible class: {0}")]
    NonUnitQuadraticTerm(String),
    #[error("mutation at vertex {0} is undefined (loop or 2-cycle)")]
    UndefinedMutation(usize),
    #[error("no vertex {0}")]
    UnknownVertex(usize),
    #[error("invalid quiver: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub id: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: i64,
    pub arrows: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuiverWithPotential {
    pub vertices: Vec<usize>,
    arrows: BTreeMap<usize, (usize, usize)>,
    potential: BTreeMap<Vec<usize>, i64>,
    next_id: usize,
    pub reduced: bool,
}

fn least_rotation(w: &[usize]) -> Vec<usize> {
    (0..w.len())
        .map(|r| w[r..].iter().chain(&w[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

impl QuiverWithPotential {
    pub fn new(vertices: Vec<usize>) -> Self {
        QuiverWithPotential {
            vertices,
            arrows: BTreeMap::new(),
            potential: BTreeMap::new(),
            next_id: 0,
            reduced: false,
        }
    }

    pub fn add_arrow(&mut self, source: usize, target: usize) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        self.arrows.insert(id, (source, target));
        id
    }

    /// Adds `coeff` times the cyclic word `word`, merging rotations.
    pub fn add_term(&mut self, coeff: i64, word: &[usize]) {
        if coeff == 0 || word.is_empty() {
            return;
        }
        let key = least_rotation(word);
        let c = self.potential.entry(key.clone()).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.potential.remove(&key);
        }
    }

    pub fn arrows(&self) -> Vec<Arrow> {
        self.arrows
            .iter()
            .map(|(&id, &(source, target))| Arrow { id, source, target })
            .collect()
    }

    pub fn arrow(&self, id: usize) -> Option<(usize, usize)> {
        self.arrows.get(&id).copied()
    }

    pub fn potential(&self) -> Vec<Term> {
        self.potential
            .iter()
            .map(|(w, &c)| Term {
                coeff: c,
                arrows: w.clone(),
            })
            .collect()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    /// Number of arrows from `i` to `j`.
    pub fn count(&self, i: usize, j: usize) -> usize {
        self.arrows.values().filter(|&&(s, t)| s == i && t == j).count()
    }

    pub fn loops(&self) -> usize {
        self.arrows.values().filter(|(s, t)| s == t).count()
    }

    /// Unordered pairs of distinct vertices with arrows both ways.
    pub fn two_cycles(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (x, &i) in self.vertices.iter().enumerate() {
            for &j in &self.vertices[x + 1..] {
                if self.count(i, j) > 0 && self.count(j, i) > 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Checks that every potential term is a composable cycle.
    pub fn check(&self) -> Result<(), QuiverError> {
        for (&id, &(s, t)) in &self.arrows {
            if !self.vertices.contains(&s) || !self.vertices.contains(&t) {
                return Err(QuiverError::Invalid(format!("arrow {id} leaves the vertex set")));
            }
        }
        for w in self.potential.keys() {
            for k in 0..w.len() {
                let a = self.arrow(w[k]).ok_or_else(|| {
                    QuiverError::Invalid(format!("potential uses missing arrow {}", w[k]))
                })?;
                let b = self.arrow(w[(k + 1) % w.len()]).ok_or_else(|| {
                    QuiverError::Invalid(format!("potential uses missing arrow {}", w[(k + 1) % w.len()]))
                })?;
                if a.1 != b.0 {
                    return Err(QuiverError::Invalid(format!("term {w:?} is not a cycle")));
                }
            }
        }
        Ok(())
    }

    /// Kills 2-cycles that occur as quadratic terms of the potential.
    pub fn reduce(&self) -> Result<QuiverWithPotential, QuiverError> {
        let mut q = self.clone();
        loop {
            let quad: Vec<(Vec<usize>, i64)> = q
                .potential
                .iter()
                .filter(|(w, _)| w.len() == 2)
                .map(|(w, &c)| (w.clone(), c))
                .collect();
            let Some((w, c)) = quad.first().cloned() else {
                break;
            };
            let (a, b) = (w[0], w[1]);
            if c.abs() != 1 || a == b {
                return Err(QuiverError::NonUnitQuadraticTerm(format!("{c}*{w:?}")));
            }
            if quad[1..].iter().any(|(v, _)| v.contains(&a) || v.contains(&b)) {
                return Err(QuiverError::NonUnitQuadraticTerm(format!(
                    "arrows of {w:?} occur in another quadratic term"
                )));
            }
            let mut us = Vec::new();
            let mut vs = Vec::new();
            let mut rest = BTreeMap::new();
            for (v, &d) in &q.potential {
                if *v == w {
                    continue;
                }
                let na = v.iter().filter(|&&x| x == a).count();
                let nb = v.iter().filter(|&&x| x == b).count();
                match (na, nb) {
                    (0, 0) => {
                        rest.insert(v.clone(), d);
                    }
                    (1, 0) | (0, 1) => {
                        let pivot = if na == 1 { a } else { b };
                        let p = v.iter().position(|&x| x == pivot).unwrap();
                        let tail: Vec<usize> = v[p + 1..].iter().chain(&v[..p]).copied().collect();
                        if na == 1 {
                            us.push((d, tail));
                        } else {
                            vs.push((d, tail));
                        }
                    }
                    _ => {
                        return Err(QuiverError::NonUnitQuadraticTerm(format!(
                            "term {v:?} involves both arrows of {w:?}"
                        )))
                    }
                }
            }
            q.potential = rest;
            for (du, u) in &us {
                for (dv, v) in &vs {
                    let word: Vec<usize> = u.iter().chain(v).copied().collect();
                    q.add_term(-c * du * dv, &word);
                }
            }
            q.arrows.remove(&a);
            q.arrows.remove(&b);
        }
        q.reduced = true;
        debug_assert!(q.check().is_ok());
        Ok(q)
    }

    /// Premutation at `k` followed by reduction.
    pub fn mutate(&self, k: usize) -> Result<QuiverWithPotential, QuiverError> {
        if !self.vertices.contains(&k) {
            return Err(QuiverError::UnknownVertex(k));
        }
        if self.count(k, k) > 0 || self.vertices.iter().any(|&j| j != k && self.count(k, j) > 0 && self.count(j, k) > 0) {
            return Err(QuiverError::UndefinedMutation(k));
        }
        let incoming: Vec<Arrow> = self.arrows().into_iter().filter(|a| a.target == k).collect();
        let outgoing: Vec<Arrow> = self.arrows().into_iter().filter(|a| a.source == k).collect();
        let mut q = self.clone();
        q.potential.clear();
        q.reduced = false;
        let mut composite = BTreeMap::new();
        for a in &incoming {
            for b in &outgoing {
                let id = q.add_arrow(a.source, b.target);
                composite.insert((a.id, b.id), id);
            }
        }
        let mut star = BTreeMap::new();
        for a in incoming.iter().chain(&outgoing) {
            q.arrows.remove(&a.id);
            let id = q.add_arrow(a.target, a.source);
            star.insert(a.id, id);
        }
        for (w, &c) in &self.potential {
            let start = w
                .iter()
                .position(|&x| self.arrows[&x].0 != k)
                .expect("cycle leaves k");
            let rot: Vec<usize> = w[start..].iter().chain(&w[..start]).copied().collect();
            let mut out = Vec::with_capacity(rot.len());
            let mut i = 0;
            while i < rot.len() {
                let x = rot[i];
                if self.arrows[&x].1 == k {
                    out.push(composite[&(x, rot[i + 1])]);
                    i += 2;
                } else {
                    out.push(x);
                    i += 1;
                }
            }
            q.add_term(c, &out);
        }
        for a in &incoming {
            for b in &outgoing {
                q.add_term(1, &[composite[&(a.id, b.id)], star[&b.id], star[&a.id]]);
            }
        }
        debug_assert!(q.check().is_ok());
        q.reduce()
    }

    /// Arrow count matrix indexed by positions in `vertices`.
    fn matrix(&self) -> Vec<Vec<usize>> {
        let pos: BTreeMap<usize, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut m = vec![vec![0; self.vertices.len()]; self.vertices.len()];
        for &(s, t) in self.arrows.values() {
            m[pos[&s]][pos[&t]] += 1;
        }
        m
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices,
            "arrows": self.arrows(),
            "potential": self.potential(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, QuiverError> {
        let bad = |e: serde_json::Error| QuiverError::Invalid(e.to_string());
        let vertices: Vec<usize> = serde_json::from_value(v["vertices"].clone()).map_err(bad)?;
        let arrows: Vec<Arrow> = serde_json::from_value(v["arrows"].clone()).map_err(bad)?;
        let terms: Vec<Term> = serde_json::from_value(v["potential"].clone()).map_err(bad)?;
        let mut q = QuiverWithPotential::new(vertices);
        for a in arrows {
            if q.arrows.insert(a.id, (a.source, a.target)).is_some() {
                return Err(QuiverError::Invalid(format!("duplicate arrow id {}", a.id)));
            }
            q.next_id = q.next_id.max(a.id + 1);
        }
        for t in terms {
            q.add_term(t.coeff, &t.arrows);
        }
        q.reduced = q.potential.keys().all(|w| w.len() != 2);
        q.check()?;
        Ok(q)
    }
}

/// One arrow per angle between internal sides, from `h_{k+1}` to `h_k` in a
/// counterclockwise triangle `(h0, h1, h2)`; one 3-cycle per triangle whose
/// three sides are internal.  A self-folded triangle contributes a loop at
/// its folded edge and a 2-cycle with its enclosing edge.
pub fn qp_from_triangulation(t: &Triangulation) -> QuiverWithPotential {
    let mut q = QuiverWithPotential::new((1..=t.n()).collect());
    for tri in t.triangles() {
        let mut corner = [None; 3];
        for k in 0..3 {
            let (src, tgt) = (tri[(k + 1) % 3], tri[k]);
            if t.is_internal(src.arc) && t.is_internal(tgt.arc) {
                corner[k] = Some(q.add_arrow(src.arc, tgt.arc));
            }
        }
        if let [Some(a0), Some(a1), Some(a2)] = corner {
            q.add_term(1, &[a2, a1, a0]);
        }
    }
    q
}

/// Unreduced quiver with potential of a signed triangulation, for an
/// explicit sign choice (not necessarily in normal form).
///
/// Self-folded triangles around vortices carry no arrows; their folded edge
/// becomes a twin of the enclosing edge and copies its arrows.  Each vortex
/// outside a self-folded triangle contributes minus the cycle of angles
/// around it.
pub fn qp_signed_unreduced(t: &Triangulation, signs: &BTreeMap<String, i8>) -> QuiverWithPotential {
    let spec = t.spec();
    let labels = spec.puncture_labels();
    let folds = t.self_folded();
    let vortex_fold: Vec<bool> = (0..t.triangles().len())
        .map(|ti| folds.iter().any(|f| f.triangle == ti && spec.is_vortex(&labels[f.puncture])))
        .collect();
    // enclosing arc -> (folded arc, vortex sign)
    let mut twin: BTreeMap<usize, (usize, i8)> = BTreeMap::new();
    for f in &folds {
        let label = &labels[f.puncture];
        if spec.is_vortex(label) && t.is_internal(f.enclosing.arc) {
            twin.insert(f.enclosing.arc, (f.folded, *signs.get(label).unwrap_or(&1)));
        }
    }
    let choices = |arc: usize| -> Vec<usize> {
        match twin.get(&arc) {
            Some(&(i, _)) => vec![arc, i],
            None => vec![arc],
        }
    };
    let mut q = QuiverWithPotential::new((1..=t.n()).collect());
    let mut corner: BTreeMap<(usize, usize, usize, usize), usize> = BTreeMap::new();
    for (ti, tri) in t.triangles().iter().enumerate() {
        if vortex_fold[ti] {
            continue;
        }
        for k in 0..3 {
            let (src, tgt) = (tri[(k + 1) % 3].arc, tri[k].arc);
            if !(t.is_internal(src) && t.is_internal(tgt)) {
                continue;
            }
            for s in choices(src) {
                for g in choices(tgt) {
                    let id = q.add_arrow(s, g);
                    corner.insert((ti, k, s, g), id);
                }
            }
        }
        if tri.iter().all(|s| t.is_internal(s.arc)) {
            for c0 in choices(tri[0].arc) {
                for c1 in choices(tri[1].arc) {
                    for c2 in choices(tri[2].arc) {
                        let w = [
                            corner[&(ti, 2, c0, c2)],
                            corner[&(ti, 1, c2, c1)],
                            corner[&(ti, 0, c1, c0)],
                        ];
                        q.add_term(1, &w);
                    }
                }
            }
        }
    }
    let loc = t.locate();
    let enclosed: BTreeSet<usize> = folds.iter().map(|f| f.puncture).collect();
    for (k, label) in labels.iter().enumerate() {
        if !spec.is_vortex(label) || enclosed.contains(&k) {
            continue;
        }
        let pick = |arc: usize| -> usize {
            match twin.get(&arc) {
                Some(&(i, s)) if s < 0 => i,
                _ => arc,
            }
        };
        let mut cycle = Vec::new();
        for s in t.around_puncture(k) {
            let (ti, p) = loc[Triangulation::hid(s)].unwrap();
            if vortex_fold[ti] {
                continue;
            }
            let kc = (p + 2) % 3;
            let tri = t.triangles()[ti];
            let (src, tgt) = (tri[(kc + 1) % 3].arc, tri[kc].arc);
            cycle.push(corner[&(ti, kc, pick(src), pick(tgt))]);
            // passing a plain self-folded edge: go round its loop
            if tri[(kc + 2) % 3] == tri[kc].twin() && tri[kc].arc == tgt {
                let kl = (kc + 2) % 3;
                if let Some(&id) = corner.get(&(ti, kl, tgt, tgt)) {
                    cycle.push(id);
                }
            }
        }
        q.add_term(-1, &cycle);
    }
    debug_assert!(q.check().is_ok(), "{:?}", q.check());
    q
}

/// Reduced quiver with potential of a signed triangulation.
pub fn qp_from_signed(st: &SignedTriangulation) -> Result<QuiverWithPotential, QuiverError> {
    qp_signed_unreduced(&st.base, &st.signs).reduce()
}

/// Configurations the vortex rule does not settle: a triangle meeting two
/// self-folded triangles around vortices.
pub fn signed_review_flags(st: &SignedTriangulation) -> Vec<String> {
    let t = &st.base;
    let spec = t.spec();
    let labels = spec.puncture_labels();
    let loops: BTreeSet<usize> = t
        .self_folded()
        .iter()
        .filter(|f| spec.is_vortex(&labels[f.puncture]))
        .map(|f| f.enclosing.arc)
        .collect();
    t.triangles()
        .iter()
        .enumerate()
        .filter(|(_, tri)| tri.iter().filter(|s| loops.contains(&s.arc)).count() >= 2)
        .map(|(i, _)| format!("triangle {i} meets two vortex self-folded triangles"))
        .collect()
}

/// Vertex bijection `q1 -> q2` preserving arrow multiplicities, loops included.
pub fn quiver_iso(q1: &QuiverWithPotential, q2: &QuiverWithPotential) -> Option<Vec<(usize, usize)>> {
    let n = q1.vertices.len();
    if n != q2.vertices.len() || q1.arrow_count() != q2.arrow_count() {
        return None;
    }
    let a = q1.matrix();
    let b = q2.matrix();
    let profile = |m: &Vec<Vec<usize>>, i: usize| {
        let mut outs: Vec<usize> = (0..n).filter(|&j| j != i).map(|j| m[i][j]).collect();
        let mut ins: Vec<usize> = (0..n).filter(|&j| j != i).map(|j| m[j][i]).collect();
        outs.sort();
        ins.sort();
        (m[i][i], outs, ins)
    };
    let pa: Vec<_> = (0..n).map(|i| profile(&a, i)).collect();
    let pb: Vec<_> = (0..n).map(|i| profile(&b, i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(pa[i].1.iter().sum::<usize>() + pa[i].2.iter().sum::<usize>()));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        depth: usize,
        order: &[usize],
        a: &[Vec<usize>],
        b: &[Vec<usize>],
        pa: &[(usize, Vec<usize>, Vec<usize>)],
        pb: &[(usize, Vec<usize>, Vec<usize>)],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for w in 0..b.len() {
            if used[w] || pa[v] != pb[w] {
                continue;
            }
            let ok = order[..depth]
                .iter()
                .all(|&u| a[v][u] == b[w][map[u]] && a[u][v] == b[map[u]][w]);
            if !ok {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if go(depth + 1, order, a, b, pa, pb, map, used) {
                return true;
            }
            used[w] = false;
        }
        false
    }
    if !go(0, &order, &a, &b, &pa, &pb, &mut map, &mut used) {
        return None;
    }
    Some(
        (0..n)
            .map(|i| (q1.vertices[i], q2.vertices[map[i]]))
            .collect(),
    )
}

/// Best-effort potential comparison under a vertex bijection: multisets of
/// (coefficient, vertex cycle) agree.
pub fn potentials_match(q1: &QuiverWithPotential, q2: &QuiverWithPotential, bij: &[(usize, usize)]) -> bool {
    let map: BTreeMap<usize, usize> = bij.iter().copied().collect();
    let signature = |q: &QuiverWithPotential, f: &dyn Fn(usize) -> usize| {
        let mut v: Vec<(i64, Vec<usize>)> = q
            .potential()
            .iter()
            .map(|t| {
                let cyc: Vec<usize> = t.arrows.iter().map(|&x| f(q.arrow(x).unwrap().0)).collect();
                (t.coeff, least_rotation(&cyc))
            })
            .collect();
        v.sort();
        v
    };
    signature(q1, &|x| map[&x]) == signature(q2, &|x| x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GradedArrow {
    pub source: usize,
    pub target: usize,
    pub degree: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradedQuiver {
    pub vertices: Vec<usize>,
    pub arrows: Vec<GradedArrow>,
}

/// Degree 1 arrows, a reversed degree 2 arrow for each, a degree 3 loop per vertex.
pub fn cy3_double(q: &QuiverWithPotential) -> GradedQuiver {
    let mut arrows = Vec::new();
    for a in q.arrows() {
        arrows.push(GradedArrow { source: a.source, target: a.target, degree: 1 });
    }
    for a in q.arrows() {
        arrows.push(GradedArrow { source: a.target, target: a.source, degree: 2 });
    }
    for &v in &q.vertices {
        arrows.push(GradedArrow { source: v, target: v, degree: 3 });
    }
    GradedQuiver {
        vertices: q.vertices.clone(),
        arrows,
    }
}

/// Angle arrows and self-folded edges of `t`, as a quick sanity summary:
/// `(loops, self-folded edges with a 2-cycle to their enclosing edge)`.
pub fn census(t: &Triangulation) -> (usize, usize) {
    let q = qp_from_triangulation(t);
    let mut paired = 0;
    for f in t.self_folded() {
        let l = f.enclosing.arc;
        if t.is_internal(l) && q.count(f.folded, l) > 0 && q.count(l, f.folded) > 0 {
            paired += 1;
        }
    }
    (q.loops(), paired)
}
