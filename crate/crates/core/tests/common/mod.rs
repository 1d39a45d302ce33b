//! Brute-force oracles that share no code with the library.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

/// Triangulations of a convex m-gon as sets of diagonals `(i, j)`, `i < j`.
pub fn polygon_triangulations(m: usize) -> Vec<BTreeSet<(usize, usize)>> {
    fn span(i: usize, j: usize, memo: &mut BTreeMap<(usize, usize), Vec<BTreeSet<(usize, usize)>>>) -> Vec<BTreeSet<(usize, usize)>> {
        if j - i < 2 {
            return vec![BTreeSet::new()];
        }
        if let Some(v) = memo.get(&(i, j)) {
            return v.clone();
        }
        let mut out = Vec::new();
        for k in i + 1..j {
            for left in span(i, k, memo) {
                for right in span(k, j, memo) {
                    let mut s: BTreeSet<(usize, usize)> = left.union(&right).copied().collect();
                    if k - i > 1 {
                        s.insert((i, k));
                    }
                    if j - k > 1 {
                        s.insert((k, j));
                    }
                    out.push(s);
                }
            }
        }
        memo.insert((i, j), out.clone());
        out
    }
    span(0, m - 1, &mut BTreeMap::new())
}

/// Unordered pairs of polygon triangulations differing in one diagonal.
pub fn polygon_exchange_edges(ts: &[BTreeSet<(usize, usize)>]) -> usize {
    let mut count = 0;
    for a in 0..ts.len() {
        for b in a + 1..ts.len() {
            if ts[a].difference(&ts[b]).count() == 1 {
                count += 1;
            }
        }
    }
    count
}

/// Slot `3 * tri + k` is side `k` of triangle `tri`, running from corner `k`
/// to corner `k + 1`.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    Boundary(usize),
    Glued(usize),
}

pub struct Surface {
    pub genus: usize,
    pub boundaries: Vec<usize>,
    pub punctures: Vec<String>,
}

/// One isomorphism class of triangle gluings, with the punctures enclosed by
/// a self-folded triangle.
#[derive(Debug)]
pub struct GluingClass {
    pub enclosed: BTreeSet<String>,
}

fn find(uf: &mut [usize], mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

/// Enumerates all ways to glue triangles into the surface with labelled
/// boundary segments and labelled punctures, up to isomorphism.
pub fn gluing_classes(s: &Surface) -> Vec<GluingClass> {
    let m: usize = s.boundaries.iter().sum();
    let p = s.punctures.len();
    let b = s.boundaries.len();
    let twice_n = 12 * s.genus as i64 + 6 * p as i64 + 6 * b as i64 + 2 * m as i64 - 12;
    assert!(twice_n >= 0 && (twice_n + m as i64) % 3 == 0);
    let t = ((twice_n + m as i64) / 3) as usize;
    let slots = 3 * t;
    // successor of each boundary label along its component
    let mut succ = vec![0; m];
    let mut base = 0;
    for &len in &s.boundaries {
        for k in 0..len {
            succ[base + k] = base + (k + 1) % len;
        }
        base += len;
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut assign = vec![None; slots];
    assign[0] = Some(Slot::Boundary(0));
    place_boundary(1, m, &mut assign, &mut |a| {
        let free: Vec<usize> = (0..slots).filter(|&x| a[x].is_none()).collect();
        matchings(&free, &mut a.to_vec(), &mut |full| {
            let g: Vec<Slot> = full.iter().map(|x| x.unwrap()).collect();
            if let Some(classes) = classify(&g, t, s, &succ) {
                for (key, enclosed) in classes {
                    if seen.insert(key) {
                        out.push(GluingClass { enclosed });
                    }
                }
            }
        });
    });
    out
}

fn place_boundary(next: usize, m: usize, a: &mut Vec<Option<Slot>>, f: &mut dyn FnMut(&[Option<Slot>])) {
    if next == m {
        f(a);
        return;
    }
    for x in 0..a.len() {
        if a[x].is_none() {
            a[x] = Some(Slot::Boundary(next));
            place_boundary(next + 1, m, a, f);
            a[x] = None;
        }
    }
}

fn matchings(free: &[usize], a: &mut Vec<Option<Slot>>, f: &mut dyn FnMut(&[Option<Slot>])) {
    let Some(pos) = free.iter().position(|&x| a[x].is_none()) else {
        f(a);
        return;
    };
    let x = free[pos];
    for &y in &free[pos + 1..] {
        if a[y].is_none() {
            a[x] = Some(Slot::Glued(y));
            a[y] = Some(Slot::Glued(x));
            matchings(free, a, f);
            a[x] = None;
            a[y] = None;
        }
    }
}

/// Topology check plus canonical keys for every puncture labelling.
fn classify(g: &[Slot], t: usize, s: &Surface, succ: &[usize]) -> Option<Vec<(Vec<i64>, BTreeSet<String>)>> {
    // vertices: corners identified across glued sides
    let mut uf: Vec<usize> = (0..3 * t).collect();
    for x in 0..3 * t {
        if let Slot::Glued(y) = g[x] {
            let (tx, kx) = (x / 3, x % 3);
            let (ty, ky) = (y / 3, y % 3);
            for (c, d) in [(kx, (ky + 1) % 3), ((kx + 1) % 3, ky)] {
                let a = find(&mut uf, 3 * tx + c);
                let b = find(&mut uf, 3 * ty + d);
                uf[a] = b;
            }
        }
    }
    let roots: BTreeSet<usize> = (0..3 * t).map(|c| find(&mut uf, c)).collect();
    let on_boundary: BTreeSet<usize> = (0..3 * t)
        .filter(|&x| matches!(g[x], Slot::Boundary(_)))
        .map(|x| find(&mut uf, x))
        .collect();
    let interior: Vec<usize> = roots.iter().copied().filter(|r| !on_boundary.contains(r)).collect();
    let m = succ.len();
    if on_boundary.len() != m || interior.len() != s.punctures.len() {
        return None;
    }
    // connectivity
    let mut reach = vec![false; t];
    let mut q = VecDeque::from([0usize]);
    reach[0] = true;
    while let Some(tr) = q.pop_front() {
        for k in 0..3 {
            if let Slot::Glued(y) = g[3 * tr + k] {
                if !reach[y / 3] {
                    reach[y / 3] = true;
                    q.push_back(y / 3);
                }
            }
        }
    }
    if reach.iter().any(|r| !r) {
        return None;
    }
    // Euler characteristic V - E + F = 2 - 2g - b
    let edges = (3 * t - m) / 2 + m;
    let chi = roots.len() as i64 - edges as i64 + t as i64;
    if chi != 2 - 2 * s.genus as i64 - s.boundaries.len() as i64 {
        return None;
    }
    // boundary order: the segment after x starts where x ends
    let mut label_slot = vec![0; m];
    for x in 0..3 * t {
        if let Slot::Boundary(l) = g[x] {
            label_slot[l] = x;
        }
    }
    for l in 0..m {
        let x = label_slot[l];
        let mut y = 3 * (x / 3) + (x % 3 + 1) % 3;
        loop {
            match g[y] {
                Slot::Boundary(next) => {
                    if next != succ[l] {
                        return None;
                    }
                    break;
                }
                Slot::Glued(z) => y = 3 * (z / 3) + (z % 3 + 1) % 3,
            }
        }
    }
    // self-folded triangles: two sides glued to each other
    let mut enclosed_roots = BTreeSet::new();
    for tr in 0..t {
        for k in 0..3 {
            if g[3 * tr + k] == Slot::Glued(3 * tr + (k + 1) % 3) {
                enclosed_roots.insert(find(&mut uf, 3 * tr + (k + 1) % 3));
            }
        }
    }
    let mut out = Vec::new();
    let mut labels: Vec<usize> = (0..interior.len()).collect();
    permutations(&mut labels, 0, &mut |perm| {
        let name: BTreeMap<usize, usize> = interior.iter().zip(perm).map(|(&r, &l)| (r, l)).collect();
        let enclosed = enclosed_roots.iter().map(|r| s.punctures[name[r]].clone()).collect();
        out.push((canonical(g, t, &mut uf, &name), enclosed));
    });
    Some(out)
}

fn permutations(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Breadth-first relabelling from the side carrying boundary label 0.
fn canonical(g: &[Slot], t: usize, uf: &mut [usize], name: &BTreeMap<usize, usize>) -> Vec<i64> {
    let start = (0..3 * t).find(|&x| g[x] == Slot::Boundary(0)).unwrap();
    let mut order: Vec<(usize, usize)> = vec![(start / 3, start % 3)];
    let mut index: BTreeMap<usize, usize> = BTreeMap::from([(start / 3, 0)]);
    let mut key = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let (tr, rot) = order[i];
        for j in 0..3 {
            let k = (rot + j) % 3;
            match g[3 * tr + k] {
                Slot::Boundary(l) => key.push(-(l as i64) - 1),
                Slot::Glued(y) => {
                    let ty = y / 3;
                    let id = *index.entry(ty).or_insert_with(|| {
                        order.push((ty, y % 3));
                        order.len() - 1
                    });
                    let ry = order[id].1;
                    key.push((3 * id + (y % 3 + 3 - ry) % 3) as i64);
                }
            }
            let corner = find(uf, 3 * tr + k);
            key.push(name.get(&corner).map_or(-1, |&l| l as i64));
        }
        i += 1;
    }
    key
}
