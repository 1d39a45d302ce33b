//! Words and presentations for surface braid groups and mixed twist groups,
//! the Abel-Jacobi map, decoration permutations and conjugation of flip
//! twists along flips.
//!
//! Products apply rightmost first, and `x^g` means `g^-1 x g`.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::quiver::qp_from_triangulation;
use crate::surface::{SurfaceError, SurfaceSpec};
use crate::triangulation::{Side, TriError, Triangulation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidError {
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Tri(#[from] TriError),
    #[error("need at least two decorations, have {0}")]
    TooFewDecorations(usize),
    #[error("triangulation is not admissible")]
    NotAdmissible,
    #[error("quiver has a double arrow or two-cycle between {0}; only the no-double-arrow presentation is implemented")]
    DoubleArrow(String),
    #[error("no value assigned to generator {0}")]
    UnassignedGenerator(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("twist kind does not match arc {0}")]
    KindMismatch(usize),
    #[error("unsupported flip edge: {0}")]
    UnsupportedEdgeCase(String),
    #[error("cannot parse word: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Sigma,
    Delta,
    Zeta,
    Epsilon,
    Tau,
    /// Braid twist along the dual of a non-self-folded arc.
    DualCa,
    /// L-twist along the dual of a self-folded arc.
    DualLa,
    /// Flip twist (2-cycle) at a non-self-folded arc.
    Cycle,
    /// Flip twist (loop) at a self-folded arc.
    Loop,
}

impl Family {
    fn prefix(self) -> &'static str {
        match self {
            Family::Sigma => "s",
            Family::Delta => "d",
            Family::Zeta => "z",
            Family::Epsilon => "eps",
            Family::Tau => "tau",
            Family::DualCa => "B",
            Family::DualLa => "L",
            Family::Cycle => "t",
            Family::Loop => "l",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen {
    pub family: Family,
    pub index: usize,
}

impl Gen {
    pub fn new(family: Family, index: usize) -> Self {
        Gen { family, index }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.prefix(), self.index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inv: bool,
}

impl Letter {
    fn inverse(self) -> Letter {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

/// Freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Word {
        Word(vec![])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn gen(g: Gen) -> Word {
        Word(vec![Letter { gen: g, inv: false }])
    }

    pub fn sigma(i: usize) -> Word {
        Word::gen(Gen::new(Family::Sigma, i))
    }

    pub fn delta(r: usize) -> Word {
        Word::gen(Gen::new(Family::Delta, r))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inv(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.0.iter().chain(&other.0).copied())
    }

    /// `self^g = g^-1 self g`.
    pub fn conj(&self, g: &Word) -> Word {
        g.inv().mul(self).mul(g)
    }

    pub fn product(ws: &[&Word]) -> Word {
        Word::from_letters(ws.iter().flat_map(|w| w.0.iter().copied()))
    }

    pub fn generators(&self) -> BTreeSet<Gen> {
        self.0.iter().map(|l| l.gen).collect()
    }

    /// Replaces every letter by the image of its generator.
    pub fn substitute<F>(&self, mut f: F) -> Result<Word, BraidError>
    where
        F: FnMut(Gen) -> Result<Word, BraidError>,
    {
        let mut out = Vec::new();
        for l in &self.0 {
            let img = f(l.gen)?;
            let img = if l.inv { img.inv() } else { img };
            out.extend(img.0);
        }
        Ok(Word::from_letters(out))
    }

    /// Cyclic reduction: strips inverse pairs from the two ends.
    pub fn cyclically_reduced(&self) -> Word {
        let mut v = self.0.clone();
        while v.len() >= 2 && v[0] == v[v.len() - 1].inverse() {
            v.pop();
            v.remove(0);
        }
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| if l.inv { format!("{}^-1", l.gen) } else { l.gen.to_string() })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for Word {
    type Err = BraidError;

    /// Whitespace separated tokens such as `s1`, `d2^-1`, `z1`, `tau3`, `B4`.
    fn from_str(text: &str) -> Result<Word, BraidError> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (body, inv) = match tok.strip_suffix("^-1") {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let split = body
                .find(|c: char| c.is_ascii_digit())
                .ok_or_else(|| BraidError::Parse(format!("token {tok:?} has no index")))?;
            let (head, digits) = body.split_at(split);
            let family = match head {
                "s" => Family::Sigma,
                "d" => Family::Delta,
                "z" => Family::Zeta,
                "eps" => Family::Epsilon,
                "tau" => Family::Tau,
                "B" => Family::DualCa,
                "L" => Family::DualLa,
                "t" => Family::Cycle,
                "l" => Family::Loop,
                _ => return Err(BraidError::Parse(format!("unknown generator {tok:?}"))),
            };
            let index: usize = digits
                .parse()
                .map_err(|_| BraidError::Parse(format!("bad index in {tok:?}")))?;
            if index == 0 {
                return Err(BraidError::Parse(format!("indices start at 1 in {tok:?}")));
            }
            letters.push(Letter {
                gen: Gen::new(family, index),
                inv,
            });
        }
        Ok(Word::from_letters(letters))
    }
}

impl Serialize for Gen {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub lhs: Word,
    pub rhs: Word,
    pub tag: String,
}

impl Relation {
    /// `lhs rhs^-1`.
    pub fn relator(&self) -> Word {
        self.lhs.mul(&self.rhs.inv())
    }
}

/// `(aba..., bab...)`, each of length `m`.
pub fn br_relation(a: &Word, b: &Word, m: usize) -> Relation {
    assert!(m >= 2, "braid relation needs m >= 2");
    let alt = |x: &Word, y: &Word| {
        let mut w = Word::identity();
        for k in 0..m {
            w = w.mul(if k % 2 == 0 { x } else { y });
        }
        w
    };
    let tag = match m {
        2 => "Co",
        3 => "Br",
        4 => "Sb",
        _ => "Br^m",
    };
    Relation {
        lhs: alt(a, b),
        rhs: alt(b, a),
        tag: tag.to_string(),
    }
}

fn tagged(mut r: Relation, tag: &str) -> Relation {
    r.tag = tag.to_string();
    r
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Presentation {
    pub generators: Vec<Gen>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    /// Symbols used by relations but missing from the alphabet.
    pub fn stray_symbols(&self) -> Vec<Gen> {
        let alphabet: BTreeSet<Gen> = self.generators.iter().copied().collect();
        let used: BTreeSet<Gen> = self
            .relations
            .iter()
            .flat_map(|r| r.lhs.generators().into_iter().chain(r.rhs.generators()))
            .collect();
        used.difference(&alphabet).copied().collect()
    }

    pub fn to_text(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|r| format!("  {} = {}    [{}]", r.lhs, r.rhs, r.tag))
            .collect();
        format!("< {} |\n{}\n>\n", gens.join(", "), rels.join(",\n"))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "generators": self.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "relations": self.relations,
        })
    }
}

/// Even indices up to `2g`: the second delta of each handle.
fn handle_set(genus: usize) -> BTreeSet<usize> {
    (1..=genus).map(|k| 2 * k).collect()
}

/// Surface braid group presentation with generators `s1..s_{aleph-1}` and
/// `d1..d_rk`.
pub fn sbr_presentation(spec: &SurfaceSpec) -> Result<Presentation, BraidError> {
    spec.ensure_valid()?;
    let aleph = spec.decoration_count()?;
    if aleph < 2 {
        return Err(BraidError::TooFewDecorations(aleph));
    }
    let rk = spec.sbr_rank();
    let even = handle_set(spec.genus);
    let mut generators: Vec<Gen> = (1..aleph).map(|i| Gen::new(Family::Sigma, i)).collect();
    generators.extend((1..=rk).map(|r| Gen::new(Family::Delta, r)));
    let s = Word::sigma;
    let d = Word::delta;
    let mut rels = Vec::new();
    for i in 1..aleph {
        for j in i + 1..aleph {
            if j - i == 1 {
                rels.push(tagged(br_relation(&s(i), &s(j), 3), "braid"));
            } else {
                rels.push(tagged(br_relation(&s(i), &s(j), 2), "far commutation"));
            }
        }
    }
    for r in 1..=rk {
        let x = Word::product(&[&s(1), &d(r), &s(1)]);
        rels.push(tagged(br_relation(&d(r), &x, 2), "delta commutes with s1 d s1"));
    }
    for i in 2..aleph {
        for r in 1..=rk {
            rels.push(tagged(br_relation(&s(i), &d(r), 2), "delta commutes with far sigma"));
        }
    }
    for r in 1..=rk {
        for s_ in 1..r {
            if !even.contains(&(s_ + 1)) {
                let x = d(s_).conj(&s(1));
                rels.push(tagged(br_relation(&x, &d(r), 2), "deltas commute"));
            }
        }
    }
    for &r in &even {
        if r <= rk {
            rels.push(Relation {
                lhs: Word::product(&[&s(1), &d(r), &s(1), &d(r - 1), &s(1)]),
                rhs: Word::product(&[&d(r - 1), &s(1), &d(r)]),
                tag: "handle".to_string(),
            });
        }
    }
    Ok(Presentation {
        generators,
        relations: rels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Deltas to epsilons.
    ToEpsilon,
    /// Epsilons and taus to deltas and sigmas.
    ToDelta,
}

fn epsilon_as_delta(r: usize, even: &BTreeSet<usize>) -> Word {
    let mut w = Word::identity();
    let mut k = r;
    let mut factors = Vec::new();
    while k > 0 {
        factors.push(k);
        k = if even.contains(&k) { k - 2 } else { k - 1 };
    }
    for f in factors {
        w = w.mul(&Word::delta(f));
    }
    w
}

/// Change of generators between `d_r` and `eps_r`/`tau_r`.
pub fn epsilon_tau_rewrite(word: &Word, direction: Direction, spec: &SurfaceSpec) -> Result<Word, BraidError> {
    let rk = spec.sbr_rank();
    let even = handle_set(spec.genus);
    let eps = |r: usize| Word::gen(Gen::new(Family::Epsilon, r));
    let check = |g: Gen| {
        if g.index == 0 || g.index > rk {
            Err(BraidError::IndexOutOfRange(format!("{g} with rk={rk}")))
        } else {
            Ok(())
        }
    };
    word.substitute(|g| match (direction, g.family) {
        (Direction::ToEpsilon, Family::Delta) => {
            check(g)?;
            let r = g.index;
            let back = if even.contains(&r) { r - 2 } else { r - 1 };
            Ok(if back == 0 { eps(r) } else { eps(r).mul(&eps(back).inv()) })
        }
        (Direction::ToDelta, Family::Epsilon) => {
            check(g)?;
            Ok(epsilon_as_delta(g.index, &even))
        }
        (Direction::ToDelta, Family::Tau) => {
            check(g)?;
            let e = epsilon_as_delta(g.index, &even);
            Ok(Word::sigma(1).conj(&e.inv()))
        }
        _ => Ok(Word::gen(g)),
    })
}

/// The commutator `[eps_s, eps_r] = eps_s^-1 eps_r^-1 eps_s eps_r` and the
/// braid-twist word claimed equal to it, in the `eps`, `tau`, `s` alphabet.
pub fn commutator_word(s: usize, r: usize, spec: &SurfaceSpec) -> Result<(Word, Word), BraidError> {
    let rk = spec.sbr_rank();
    if !(1 <= s && s < r && r <= rk) {
        return Err(BraidError::IndexOutOfRange(format!("need 1 <= s < r <= {rk}, got s={s} r={r}")));
    }
    let eps = |k: usize| Word::gen(Gen::new(Family::Epsilon, k));
    let tau = |k: usize| Word::gen(Gen::new(Family::Tau, k));
    let lhs = Word::product(&[&eps(s).inv(), &eps(r).inv(), &eps(s), &eps(r)]);
    let b = Word::sigma(2);
    let a = Word::sigma(1).conj(&b.inv());
    let (ts, tr) = (tau(s), tau(r));
    let rhs = if handle_set(spec.genus).contains(&(s + 1)) {
        Word::product(&[
            &Word::product(&[&b, &b, &ts, &b]).inv(),
            &a,
            &tr,
            &a.inv(),
            &ts,
            &a,
            &b,
            &tr,
            &b,
        ])
    } else {
        Word::product(&[
            &ts.mul(&b).inv(),
            &a,
            &Word::product(&[&tr, &a, &ts]).inv(),
            &a,
            &b,
            &tr,
            &b,
        ])
    };
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyVector {
    pub coords: Vec<i64>,
}

impl HomologyVector {
    pub fn zero(len: usize) -> Self {
        HomologyVector { coords: vec![0; len] }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for HomologyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        let mut terms = String::new();
        for (i, &c) in self.coords.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            if terms.is_empty() {
                if c < 0 {
                    terms.push('-');
                }
            } else {
                terms.push_str(&format!(" {sign} "));
            }
            terms.push_str(&format!("{mag}e_{}", i + 1));
        }
        if terms.is_empty() {
            terms.push('0');
        }
        write!(f, "({}) = {}", body.join(","), terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AjMode {
    Full,
    /// Forgets the listed punctures.
    Relative(BTreeSet<String>),
}

/// Generator values for the two verification homomorphisms.
#[derive(Clone, Debug)]
pub struct HomContext {
    pub spec: SurfaceSpec,
    pub aleph: usize,
    /// Decorations (0-based) swapped by the braid twist dual to an arc.
    pub ca_ends: BTreeMap<usize, (usize, usize)>,
    /// Puncture index enclosed by the L-arc dual to a self-folded arc.
    pub la_puncture: BTreeMap<usize, usize>,
}

impl HomContext {
    pub fn for_spec(spec: &SurfaceSpec) -> Result<Self, BraidError> {
        Ok(HomContext {
            spec: spec.clone(),
            aleph: spec.decoration_count()?,
            ca_ends: BTreeMap::new(),
            la_puncture: BTreeMap::new(),
        })
    }

    /// Decorations are indexed by triangles of `t`.
    pub fn for_triangulation(t: &Triangulation) -> Self {
        let mut ca_ends = BTreeMap::new();
        let mut la_puncture = BTreeMap::new();
        for f in t.self_folded() {
            la_puncture.insert(f.folded, f.puncture);
        }
        for a in 1..=t.n() {
            if !la_puncture.contains_key(&a) {
                ca_ends.insert(a, (t.face_of(Side::new(a, 0)), t.face_of(Side::new(a, 1))));
            }
        }
        HomContext {
            spec: t.spec().clone(),
            aleph: t.triangles().len(),
            ca_ends,
            la_puncture,
        }
    }

    fn rk(&self) -> usize {
        self.spec.sbr_rank()
    }

    fn puncture_offset(&self) -> usize {
        2 * self.spec.genus + self.spec.b() - 1
    }

    fn image(&self, g: Gen) -> Result<Option<usize>, BraidError> {
        let missing = || BraidError::UnassignedGenerator(g.to_string());
        match g.family {
            Family::Sigma => {
                if g.index < self.aleph {
                    Ok(None)
                } else {
                    Err(missing())
                }
            }
            Family::Delta if g.index <= self.rk() => Ok(Some(g.index - 1)),
            Family::Zeta if g.index <= self.spec.p() => Ok(Some(self.puncture_offset() + g.index - 1)),
            Family::DualCa | Family::Cycle if self.ca_ends.contains_key(&g.index) => Ok(None),
            Family::DualLa | Family::Loop => match self.la_puncture.get(&g.index) {
                Some(&k) => Ok(Some(self.puncture_offset() + k)),
                None => Err(missing()),
            },
            _ => Err(missing()),
        }
    }

    /// Abel-Jacobi image.  `eps` and `tau` letters are expanded first.
    pub fn aj(&self, word: &Word, mode: &AjMode) -> Result<HomologyVector, BraidError> {
        let word = epsilon_tau_rewrite(word, Direction::ToDelta, &self.spec)?;
        let mut v = HomologyVector::zero(self.rk());
        for l in word.letters() {
            if let Some(k) = self.image(l.gen)? {
                v.coords[k] += if l.inv { -1 } else { 1 };
            }
        }
        if let AjMode::Relative(forget) = mode {
            for (k, label) in self.spec.puncture_labels().iter().enumerate() {
                if forget.contains(label) {
                    v.coords[self.puncture_offset() + k] = 0;
                }
            }
        }
        Ok(v)
    }

    /// `perm[x]` is where decoration `x` ends up; rightmost letter acts first.
    pub fn decoration_permutation(&self, word: &Word) -> Result<Vec<usize>, BraidError> {
        let word = epsilon_tau_rewrite(word, Direction::ToDelta, &self.spec)?;
        let mut perm: Vec<usize> = (0..self.aleph).collect();
        for l in word.letters().iter().rev() {
            self.image(l.gen)?;
            let swap = match l.gen.family {
                Family::Sigma => Some((l.gen.index - 1, l.gen.index)),
                Family::DualCa | Family::Cycle => self.ca_ends.get(&l.gen.index).copied(),
                _ => None,
            };
            if let Some((x, y)) = swap {
                for p in perm.iter_mut() {
                    if *p == x {
                        *p = y;
                    } else if *p == y {
                        *p = x;
                    }
                }
            }
        }
        Ok(perm)
    }

    /// Full mode plus every relative mode.
    pub fn modes(&self) -> Vec<AjMode> {
        let labels = self.spec.puncture_labels();
        let mut out = vec![AjMode::Full];
        for mask in 1..(1usize << labels.len()) {
            let set = labels
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, l)| l.clone())
                .collect();
            out.push(AjMode::Relative(set));
        }
        out
    }

    /// Generators of `p` in the kernel of the AJ map relative to `forget`.
    pub fn kernel_generators(&self, p: &Presentation, forget: &BTreeSet<String>) -> Result<Vec<Gen>, BraidError> {
        let mode = AjMode::Relative(forget.clone());
        let mut out = Vec::new();
        for &g in &p.generators {
            if self.aj(&Word::gen(g), &mode)?.is_zero() {
                out.push(g);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PresentationReport {
    pub relations: usize,
    pub failures: Vec<String>,
}

impl PresentationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Both sides of every relation agree under AJ in all modes and under the
/// decoration permutation.
pub fn verify_presentation(p: &Presentation, ctx: &HomContext) -> Result<PresentationReport, BraidError> {
    let mut report = PresentationReport {
        relations: p.relations.len(),
        failures: vec![],
    };
    let modes = ctx.modes();
    for r in &p.relations {
        for mode in &modes {
            let (a, b) = (ctx.aj(&r.lhs, mode)?, ctx.aj(&r.rhs, mode)?);
            if a != b {
                report
                    .failures
                    .push(format!("AJ {mode:?}: {} = {} gives {a} vs {b}", r.lhs, r.rhs));
            }
        }
        if ctx.decoration_permutation(&r.lhs)? != ctx.decoration_permutation(&r.rhs)? {
            report
                .failures
                .push(format!("permutation: {} = {}", r.lhs, r.rhs));
        }
    }
    Ok(report)
}

/// Invariant factors of an integer matrix.
pub fn smith_invariants(m: &[Vec<i64>]) -> Vec<i64> {
    let mut a: Vec<Vec<i64>> = m.to_vec();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[i][t] / a[t][t];
            for j in t..cols {
                a[i][j] -= q * a[t][j];
            }
            clean &= a[i][t] == 0;
        }
        for j in t + 1..cols {
            let q = a[t][j] / a[t][t];
            for i in t..rows {
                a[i][j] -= q * a[i][t];
            }
            clean &= a[t][j] == 0;
        }
        if !clean {
            continue;
        }
        let bad = (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % a[t][t] != 0);
        if let Some((i, _)) = bad {
            for j in t..cols {
                a[t][j] += a[i][j];
            }
            continue;
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

/// Rank and unimodularity of the AJ images of `d1..d_{2g+b-1}` inside the
/// non-puncture part of the lattice.
pub fn delta_lattice(spec: &SurfaceSpec) -> Result<(usize, bool), BraidError> {
    let ctx = HomContext::for_spec(spec)?;
    let k = 2 * spec.genus + spec.b() - 1;
    let rows: Vec<Vec<i64>> = (1..=k)
        .map(|r| Ok(ctx.aj(&Word::delta(r), &AjMode::Full)?.coords[..k].to_vec()))
        .collect::<Result<_, BraidError>>()?;
    let inv = smith_invariants(&rows);
    Ok((inv.len(), inv.len() == k && inv.iter().all(|&d| d == 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairKind {
    Co,
    Br,
    Sb,
}

/// Relation type of two arcs read off the quiver.
fn pair_kind(t: &Triangulation, i: usize, j: usize) -> Result<PairKind, BraidError> {
    let q = qp_from_triangulation(t);
    let (p, r) = (q.count(i, j), q.count(j, i));
    let (li, lj) = (t.is_self_folded(i), t.is_self_folded(j));
    match (p, r) {
        (0, 0) => Ok(PairKind::Co),
        (1, 0) | (0, 1) if !li && !lj => Ok(PairKind::Br),
        (1, 1) if li != lj => Ok(PairKind::Sb),
        _ => Err(BraidError::DoubleArrow(format!("arcs {i} and {j}"))),
    }
}

fn quiver_relations(t: &Triangulation, ca: Family, la: Family) -> Result<(Vec<Gen>, Vec<Relation>), BraidError> {
    let gen = |a: usize| Gen::new(if t.is_self_folded(a) { la } else { ca }, a);
    let gens: Vec<Gen> = (1..=t.n()).map(gen).collect();
    let mut rels = Vec::new();
    for i in 1..=t.n() {
        for j in i + 1..=t.n() {
            let (a, b) = (Word::gen(gen(i)), Word::gen(gen(j)));
            let r = match pair_kind(t, i, j)? {
                PairKind::Co => br_relation(&a, &b, 2),
                PairKind::Br => br_relation(&a, &b, 3),
                PairKind::Sb => br_relation(&a, &b, 4),
            };
            rels.push(r);
        }
    }
    Ok((gens, rels))
}

/// Mixed twist group presentation of an admissible triangulation whose
/// quiver has no double arrows.
pub fn mt_presentation(t: &Triangulation) -> Result<Presentation, BraidError> {
    if !t.is_admissible() {
        return Err(BraidError::NotAdmissible);
    }
    let (generators, mut relations) = quiver_relations(t, Family::DualCa, Family::DualLa)?;
    for tri in t.triangles() {
        let arcs = [tri[0].arc, tri[2].arc, tri[1].arc];
        let plain = |a: usize| t.is_internal(a) && !t.is_self_folded(a);
        if !arcs.iter().all(|&a| plain(a)) || arcs[0] == arcs[1] || arcs[1] == arcs[2] || arcs[0] == arcs[2] {
            continue;
        }
        let [a, b, c] = arcs.map(|x| Word::gen(Gen::new(Family::DualCa, x)));
        let abca = Word::product(&[&a, &b, &c, &a]);
        let bcab = Word::product(&[&b, &c, &a, &b]);
        let cabc = Word::product(&[&c, &a, &b, &c]);
        relations.push(Relation { lhs: abca, rhs: bcab.clone(), tag: "triangle".into() });
        relations.push(Relation { lhs: bcab, rhs: cabc, tag: "triangle".into() });
    }
    Ok(Presentation {
        generators,
        relations,
    })
}

/// Relators of the flip twist group of `t` in the `t`/`l` alphabet.
pub fn ft_relators(t: &Triangulation) -> Result<Vec<Relation>, BraidError> {
    Ok(quiver_relations(t, Family::Cycle, Family::Loop)?.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Twist {
    Cycle(usize),
    Loop(usize),
}

/// Braid twist or L-twist corresponding to a flip twist.
pub fn flip_twist_image(t: &Triangulation, twist: Twist) -> Result<Word, BraidError> {
    let (arc, want_folded, family) = match twist {
        Twist::Cycle(a) => (a, false, Family::DualCa),
        Twist::Loop(a) => (a, true, Family::DualLa),
    };
    if arc == 0 || arc > t.n() {
        return Err(TriError::UnknownArc(arc).into());
    }
    if t.is_self_folded(arc) != want_folded {
        return Err(BraidError::KindMismatch(arc));
    }
    Ok(Word::gen(Gen::new(family, arc)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipEdge {
    /// L-flip at a self-folded arc.
    Loop(usize),
    /// Ordinary flip at an arc.
    Flip(usize),
    /// Flip at an enclosing arc followed by flip at its folded partner.
    Diamond(usize),
}

fn cyc(a: usize) -> Word {
    Word::gen(Gen::new(Family::Cycle, a))
}

fn lp(a: usize) -> Word {
    Word::gen(Gen::new(Family::Loop, a))
}

fn ft_letter(g: Gen) -> Result<(), BraidError> {
    match g.family {
        Family::Cycle | Family::Loop => Ok(()),
        _ => Err(BraidError::UnassignedGenerator(g.to_string())),
    }
}

/// Carries a flip twist word along a flip-graph edge out of `source`.
pub fn conj_flip(word: &Word, source: &Triangulation, edge: FlipEdge) -> Result<Word, BraidError> {
    match edge {
        FlipEdge::Loop(a) => {
            if !source.is_self_folded(a) {
                return Err(BraidError::KindMismatch(a));
            }
            word.substitute(|g| {
                ft_letter(g)?;
                Ok(Word::gen(g).conj(&lp(a)))
            })
        }
        FlipEdge::Flip(i) => {
            if source.is_self_folded(i) {
                return Err(BraidError::KindMismatch(i));
            }
            let target = source.flip(i)?;
            let before = source.isolated_punctures();
            let after = target.isolated_punctures();
            if !after.is_superset(&before) {
                return Err(BraidError::UnsupportedEdgeCase(format!("flip at {i} frees a puncture")));
            }
            let old: BTreeSet<usize> = source.self_folded_edges().into_iter().collect();
            let partner = target.self_folded_edges().into_iter().find(|a| !old.contains(a));
            let q = qp_from_triangulation(source);
            word.substitute(|g| {
                ft_letter(g)?;
                let k = g.index;
                Ok(match g.family {
                    Family::Loop => lp(k),
                    _ if k == i => cyc(i),
                    _ if Some(k) == partner => cyc(i).conj(&lp(k).inv()),
                    _ if q.count(k, i) > 0 => cyc(k).conj(&cyc(i)),
                    _ => cyc(k),
                })
            })
        }
        FlipEdge::Diamond(e) => {
            let fold = source
                .self_folded()
                .into_iter()
                .find(|f| f.enclosing.arc == e && source.is_internal(e))
                .ok_or_else(|| BraidError::UnsupportedEdgeCase(format!("arc {e} is not an internal enclosing arc")))?;
            let f = fold.folded;
            let middle = source.flip(e)?;
            let q = qp_from_triangulation(&middle);
            let g4 = Word::product(&[&cyc(f), &lp(e), &cyc(f), &lp(e).inv()]);
            word.substitute(|g| {
                ft_letter(g)?;
                let k = g.index;
                Ok(match g.family {
                    Family::Loop if k == f => lp(e),
                    Family::Loop => lp(k),
                    _ if k == e => cyc(f).conj(&lp(e).inv()),
                    _ if q.count(k, f) > 0 => cyc(k).conj(&g4),
                    _ => cyc(k),
                })
            })
        }
    }
}

fn least_rotation(w: &[Letter]) -> Vec<Letter> {
    (0..w.len().max(1))
        .map(|k| w[k.min(w.len())..].iter().chain(&w[..k.min(w.len())]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

fn cyclic_reduce(v: Vec<Letter>) -> Vec<Letter> {
    Word::from_letters(v).cyclically_reduced().0
}

/// Searches for a derivation of `a = b` from `relators` by replacing at
/// least half of a cyclic conjugate of a relator (or its inverse) inside the
/// cyclic word `a b^-1`, never increasing length.  `true` is a proof;
/// `false` only means none was found within `budget` states.
pub fn equal_modulo(a: &Word, b: &Word, relators: &[Relation], budget: usize) -> bool {
    let start = cyclic_reduce(a.mul(&b.inv()).0);
    if start.is_empty() {
        return true;
    }
    let mut cyclic: Vec<Vec<Letter>> = Vec::new();
    for r in relators {
        for w in [r.relator(), r.relator().inv()] {
            let w = cyclic_reduce(w.0);
            for k in 0..w.len() {
                cyclic.push(w[k..].iter().chain(&w[..k]).copied().collect());
            }
        }
    }
    let mut seen = HashSet::new();
    seen.insert(least_rotation(&start));
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        let n = w.len();
        for r in &cyclic {
            let len = r.len();
            for k in len.div_ceil(2)..=len.min(n) {
                for p in 0..n {
                    if (0..k).any(|t| w[(p + t) % n] != r[t]) {
                        continue;
                    }
                    let mut next: Vec<Letter> = r[k..].iter().rev().map(|l| l.inverse()).collect();
                    next.extend((k..n).map(|t| w[(p + t) % n]));
                    let next = cyclic_reduce(next);
                    if next.is_empty() {
                        return true;
                    }
                    if next.len() <= n && seen.len() < budget && seen.insert(least_rotation(&next)) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceCheck {
    pub generator: Word,
    pub direct: Word,
    pub chained: Word,
    /// Carrying the middle preimage back to the start reproduces the generator.
    pub preimage_ok: bool,
    pub ok: bool,
}

/// Compares the diamond flip at `e` with the two single flips through the
/// middle triangulation, generator by generator of the flip twist group.
/// The loop at the folded partner `f` is tested through `l_f t_e l_f^-1`.
pub fn diamond_coherence(left: &Triangulation, e: usize) -> Result<Vec<CoherenceCheck>, BraidError> {
    let fold = left
        .self_folded()
        .into_iter()
        .find(|x| x.enclosing.arc == e)
        .ok_or_else(|| BraidError::UnsupportedEdgeCase(format!("arc {e} encloses nothing")))?;
    let f = fold.folded;
    let middle = left.flip(e)?;
    let right = middle.flip(f)?;
    let qm = qp_from_triangulation(&middle);
    let rel_left = ft_relators(left)?;
    let rel_right = ft_relators(&right)?;
    let te = cyc(e);
    let mut out = Vec::new();
    for k in 1..=left.n() {
        let (x, y) = if k == f {
            (te.conj(&lp(f).inv()), cyc(f))
        } else if left.is_self_folded(k) {
            (lp(k), lp(k))
        } else if k != e && qm.count(k, e) > 0 {
            (cyc(k), cyc(k).conj(&te.inv()))
        } else {
            (cyc(k), cyc(k))
        };
        let back = conj_flip(&y, &middle, FlipEdge::Flip(e))?;
        let preimage_ok = equal_modulo(&back, &x, &rel_left, 20_000);
        let direct = conj_flip(&x, left, FlipEdge::Diamond(e))?;
        let chained = conj_flip(&y.conj(&te), &middle, FlipEdge::Flip(f))?;
        let ok = equal_modulo(&direct, &chained, &rel_right, 20_000);
        out.push(CoherenceCheck {
            generator: x,
            direct,
            chained,
            preimage_ok,
            ok,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn words() {
        assert_eq!(w("s1 s2 s2^-1 d1").to_string(), "s1 d1");
        assert_eq!(w("s1").conj(&w("s2")).to_string(), "s2^-1 s1 s2");
        assert!("x1".parse::<Word>().is_err());
        assert!("s0".parse::<Word>().is_err());
        let r = br_relation(&w("s1"), &w("s2"), 4);
        assert_eq!((r.lhs.to_string(), r.rhs.to_string()), ("s1 s2 s1 s2".into(), "s2 s1 s2 s1".into()));
        assert_eq!(w("s1 s2 s1^-1").cyclically_reduced(), w("s2"));
    }

    #[test]
    fn presentations_of_small_surfaces() {
        let p = sbr_presentation(&SurfaceSpec::disk(5)).unwrap();
        assert_eq!(p.generators.len(), 2);
        assert_eq!(p.relations.len(), 1);
        assert_eq!(p.relations[0].tag, "braid");

        let p = sbr_presentation(&SurfaceSpec::with_plain(0, &[3], 1)).unwrap();
        let text: Vec<String> = p.relations.iter().map(|r| format!("{} = {}", r.lhs, r.rhs)).collect();
        assert!(text.contains(&"d1 s1 d1 s1 = s1 d1 s1 d1".to_string()));
        assert!(text.contains(&"s2 d1 = d1 s2".to_string()));
        assert!(p.stray_symbols().is_empty());

        let g1 = SurfaceSpec::with_plain(1, &[1], 0);
        let p = sbr_presentation(&g1).unwrap();
        assert_eq!(p.relations.iter().filter(|r| r.tag == "handle").count(), 1);
        assert_eq!(p.relations.iter().filter(|r| r.tag == "deltas commute").count(), 0);
        assert!(matches!(
            sbr_presentation(&SurfaceSpec::with_plain(0, &[1], 1)),
            Err(BraidError::TooFewDecorations(1))
        ));
    }

    #[test]
    fn aj_and_permutations() {
        let spec = SurfaceSpec::with_plain(0, &[3], 1);
        let ctx = HomContext::for_spec(&spec).unwrap();
        assert!(ctx.aj(&w("s1 s2^-1"), &AjMode::Full).unwrap().is_zero());
        assert_eq!(ctx.aj(&w("d1"), &AjMode::Full).unwrap().to_string(), "(1) = e_1");
        let moon = AjMode::Relative(["P1".to_string()].into());
        assert!(ctx.aj(&w("z1"), &moon).unwrap().is_zero());
        assert_eq!(ctx.decoration_permutation(&w("s1")).unwrap(), vec![1, 0, 2]);
        assert_eq!(ctx.decoration_permutation(&w("d1")).unwrap(), vec![0, 1, 2]);
        // rightmost first: s1 s2 sends 2 -> 1 -> 0
        assert_eq!(ctx.decoration_permutation(&w("s1 s2")).unwrap(), vec![1, 2, 0]);
        assert!(matches!(ctx.aj(&w("d2"), &AjMode::Full), Err(BraidError::UnassignedGenerator(_))));
        let bad = Presentation {
            generators: vec![],
            relations: vec![Relation { lhs: w("s1"), rhs: w("d1"), tag: "corrupt".into() }],
        };
        assert!(!verify_presentation(&bad, &ctx).unwrap().ok());
    }

    #[test]
    fn epsilon_rewrites() {
        let g2 = SurfaceSpec::with_plain(2, &[1], 1);
        let to_d = |s: &str| epsilon_tau_rewrite(&w(s), Direction::ToDelta, &g2).unwrap().to_string();
        assert_eq!(to_d("eps1"), "d1");
        assert_eq!(to_d("eps2"), "d2");
        assert_eq!(to_d("eps3"), "d3 d2");
        assert_eq!(to_d("eps4"), "d4 d2");
        let x = w("d1 d2 d4^-1 s1");
        let there = epsilon_tau_rewrite(&x, Direction::ToEpsilon, &g2).unwrap();
        assert_eq!(epsilon_tau_rewrite(&there, Direction::ToDelta, &g2).unwrap(), x);
        assert!(matches!(
            epsilon_tau_rewrite(&w("d9"), Direction::ToEpsilon, &g2),
            Err(BraidError::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn commutator_images() {
        let g2 = SurfaceSpec::with_plain(2, &[1], 1);
        let ctx = HomContext::for_spec(&g2).unwrap();
        for (s, r) in [(1, 2), (1, 3), (2, 3), (2, 4)] {
            let (lhs, rhs) = commutator_word(s, r, &g2).unwrap();
            let lhs = epsilon_tau_rewrite(&lhs, Direction::ToDelta, &g2).unwrap();
            let rhs = epsilon_tau_rewrite(&rhs, Direction::ToDelta, &g2).unwrap();
            for mode in ctx.modes() {
                assert_eq!(ctx.aj(&lhs, &mode).unwrap(), ctx.aj(&rhs, &mode).unwrap());
            }
            // the right side moves three decorations, the commutator none
            let id: Vec<usize> = (0..ctx.aleph).collect();
            assert_eq!(ctx.decoration_permutation(&lhs).unwrap(), id);
            let p = ctx.decoration_permutation(&rhs).unwrap();
            assert_eq!(p.iter().enumerate().filter(|(i, x)| i != *x).count(), 3, "{s},{r}: {p:?}");
        }
    }

    #[test]
    fn smith() {
        assert_eq!(smith_invariants(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
        assert_eq!(smith_invariants(&[vec![1, 0], vec![0, 1]]), vec![1, 1]);
        assert_eq!(smith_invariants(&[vec![2, 3]]), vec![1]);
        assert_eq!(delta_lattice(&SurfaceSpec::with_plain(2, &[1, 1], 1)).unwrap(), (5, true));
    }

    #[test]
    fn dehn_search() {
        let sb = br_relation(&w("l1"), &w("t2"), 4);
        let a = w("l1 t2^-1 l1^-1 t2 l1 t2 l1^-1");
        let b = w("l1 l1 t2 l1^-1 l1^-1");
        assert!(equal_modulo(&a, &b, &[sb.clone()], 1000));
        assert!(!equal_modulo(&w("l1"), &w("t2"), &[sb], 1000));
    }
}
