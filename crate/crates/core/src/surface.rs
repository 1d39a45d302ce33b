//! Numerical data of a marked surface with punctures.
//!
//! A [`SurfaceSpec`] records the genus, the number of marked points on each
//! boundary component and the puncture labels, split into plain punctures and
//! vortices.  Everything else in the crate is derived from the counts
//! computed here.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("negative arc rank 6g+3p+3b+m-6 = {0}")]
    NegativeRank(i64),
    #[error("invalid surface: {0}")]
    InvalidSpec(String),
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
}

/// A rule broken by a surface specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    BoundaryEmpty,
    UnmarkedBoundary(usize),
    PunctureOverlap(String),
    NoDecorations(i64),
    VortexRank(i64),
    VortexNeedsBoundary,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BoundaryEmpty => write!(f, "boundary nonempty"),
            Violation::UnmarkedBoundary(j) => {
                write!(f, "boundary component {j} needs at least one marked point")
            }
            Violation::PunctureOverlap(l) => write!(f, "puncture {l} is both plain and vortex"),
            Violation::NoDecorations(a) => write!(f, "aleph >= 1 (got {a})"),
            Violation::VortexRank(n) => write!(f, "n >= 2 in MSx mode (got n={n})"),
            Violation::VortexNeedsBoundary => write!(f, "b >= 1 in MSx mode"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceSpec {
    pub genus: usize,
    /// Marked points per boundary component.
    pub boundaries: Vec<usize>,
    pub plain: BTreeSet<String>,
    pub vortex: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    genus: usize,
    boundaries: Vec<usize>,
    #[serde(default)]
    punctures: PunctureFile,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PunctureFile {
    #[serde(default)]
    plain: Vec<String>,
    #[serde(default)]
    vortex: Vec<String>,
}

impl SurfaceSpec {
    pub fn new(genus: usize, boundaries: &[usize], plain: &[&str], vortex: &[&str]) -> Self {
        SurfaceSpec {
            genus,
            boundaries: boundaries.to_vec(),
            plain: plain.iter().map(|s| s.to_string()).collect(),
            vortex: vortex.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Disk with `m` marked points and no punctures.
    pub fn disk(m: usize) -> Self {
        Self::new(0, &[m], &[], &[])
    }

    /// Surface whose punctures are all plain, labelled `P1..Pp`.
    pub fn with_plain(genus: usize, boundaries: &[usize], p: usize) -> Self {
        let labels: Vec<String> = (1..=p).map(|i| format!("P{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(|s| s.as_str()).collect();
        Self::new(genus, boundaries, &refs, &[])
    }

    pub fn b(&self) -> usize {
        self.boundaries.len()
    }

    pub fn m(&self) -> usize {
        self.boundaries.iter().sum()
    }

    pub fn p(&self) -> usize {
        self.plain.len() + self.vortex.len()
    }

    fn n_raw(&self) -> i64 {
        6 * self.genus as i64 + 3 * self.p() as i64 + 3 * self.b() as i64 + self.m() as i64 - 6
    }

    fn aleph_raw(&self) -> i64 {
        4 * self.genus as i64 + 2 * self.p() as i64 + 2 * self.b() as i64 + self.m() as i64 - 4
    }

    /// Number of internal arcs of any triangulation.
    pub fn rank_open_arcs(&self) -> Result<usize, SurfaceError> {
        let n = self.n_raw();
        if n < 0 {
            return Err(SurfaceError::NegativeRank(n));
        }
        Ok(n as usize)
    }

    /// Number of triangles, `(2n+m)/3`.
    pub fn triangle_count(&self) -> Result<usize, SurfaceError> {
        let n = self.rank_open_arcs()?;
        let total = 2 * n + self.m();
        debug_assert_eq!(total % 3, 0);
        Ok(total / 3)
    }

    /// Number of decorations `4g+2p+2b+m-4`.
    pub fn decoration_count(&self) -> Result<usize, SurfaceError> {
        let a = self.aleph_raw();
        if a < 1 {
            return Err(SurfaceError::InvalidSpec(format!("aleph = {a} < 1")));
        }
        if let Ok(t) = self.triangle_count() {
            assert_eq!(t as i64, a, "decoration count differs from triangle count");
        }
        Ok(a as usize)
    }

    /// Number of delta generators, `2g+b+p-1`.
    pub fn sbr_rank(&self) -> usize {
        (2 * self.genus + self.b() + self.p()).saturating_sub(1)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.boundaries.is_empty() {
            out.push(Violation::BoundaryEmpty);
        }
        for (j, &mj) in self.boundaries.iter().enumerate() {
            if mj == 0 {
                out.push(Violation::UnmarkedBoundary(j + 1));
            }
        }
        for l in self.plain.intersection(&self.vortex) {
            out.push(Violation::PunctureOverlap(l.clone()));
        }
        let a = self.aleph_raw();
        if a < 1 {
            out.push(Violation::NoDecorations(a));
        }
        if !self.vortex.is_empty() {
            let n = self.n_raw();
            if n < 2 {
                out.push(Violation::VortexRank(n));
            }
            if self.boundaries.is_empty() {
                out.push(Violation::VortexNeedsBoundary);
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<(), SurfaceError> {
        let v = self.validate();
        if v.is_empty() {
            return Ok(());
        }
        let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(SurfaceError::InvalidSpec(msg.join("; ")))
    }

    /// Puncture labels in the fixed order `P_1..P_p`: plain ones first, then
    /// vortices, each sorted.
    pub fn puncture_labels(&self) -> Vec<String> {
        self.plain.iter().chain(self.vortex.iter()).cloned().collect()
    }

    pub fn puncture_index(&self, label: &str) -> Option<usize> {
        self.puncture_labels().iter().position(|l| l == label)
    }

    pub fn is_vortex(&self, label: &str) -> bool {
        self.vortex.contains(label)
    }

    /// The same surface with every vortex turned into a plain puncture.
    pub fn forget_vortices(&self) -> SurfaceSpec {
        let mut s = self.clone();
        s.plain.extend(s.vortex.iter().cloned());
        s.vortex.clear();
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| SurfaceError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        let plain: BTreeSet<String> = file.punctures.plain.iter().cloned().collect();
        let vortex: BTreeSet<String> = file.punctures.vortex.iter().cloned().collect();
        if plain.len() != file.punctures.plain.len() || vortex.len() != file.punctures.vortex.len()
        {
            return Err(SurfaceError::InvalidSpec("duplicate puncture label".into()));
        }
        Ok(SurfaceSpec {
            genus: file.genus,
            boundaries: file.boundaries,
            plain,
            vortex,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SpecFile {
            genus: self.genus,
            boundaries: self.boundaries.clone(),
            punctures: PunctureFile {
                plain: self.plain.iter().cloned().collect(),
                vortex: self.vortex.iter().cloned().collect(),
            },
        })
        .expect("spec serializes")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self, SurfaceError> {
        Self::from_json(&v.to_string())
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g={} boundaries={:?} plain={:?} vortex={:?}",
            self.genus, self.boundaries, self.plain, self.vortex
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_of_small_surfaces() {
        let tri = SurfaceSpec::with_plain(0, &[3], 1);
        assert_eq!(tri.rank_open_arcs().unwrap(), 3);
        assert_eq!(tri.triangle_count().unwrap(), 3);
        assert_eq!(tri.decoration_count().unwrap(), 3);
        assert_eq!(tri.sbr_rank(), 1);

        let sq = SurfaceSpec::disk(4);
        assert_eq!(sq.rank_open_arcs().unwrap(), 1);
        assert_eq!(sq.triangle_count().unwrap(), 2);
        assert_eq!(sq.decoration_count().unwrap(), 2);

        assert_eq!(SurfaceSpec::with_plain(1, &[1], 0).rank_open_arcs().unwrap(), 4);
        assert_eq!(SurfaceSpec::with_plain(0, &[1], 1).triangle_count().unwrap(), 1);
        assert_eq!(SurfaceSpec::new(0, &[1, 1], &[], &[]).decoration_count().unwrap(), 2);
        assert_eq!(SurfaceSpec::disk(3).sbr_rank(), 0);
        assert_eq!(SurfaceSpec::with_plain(1, &[1, 1], 2).sbr_rank(), 5);
    }

    #[test]
    fn negative_rank() {
        assert_eq!(
            SurfaceSpec::disk(2).rank_open_arcs(),
            Err(SurfaceError::NegativeRank(-1))
        );
    }

    #[test]
    fn validation_rules() {
        assert!(SurfaceSpec::with_plain(0, &[3], 1).validate().is_empty());
        let closed = SurfaceSpec::with_plain(0, &[], 3);
        let v = closed.validate();
        assert!(v.contains(&Violation::BoundaryEmpty));
        assert_eq!(v[0].to_string(), "boundary nonempty");
        let mono = SurfaceSpec::new(0, &[1], &[], &["V"]);
        let v = mono.validate();
        assert_eq!(v, vec![Violation::VortexRank(1)]);
        assert_eq!(v[0].to_string(), "n >= 2 in MSx mode (got n=1)");
        let both = SurfaceSpec::new(0, &[3], &["A"], &["A"]);
        assert!(both.validate().contains(&Violation::PunctureOverlap("A".into())));
        assert!(SurfaceSpec::new(0, &[0, 2], &[], &[])
            .validate()
            .contains(&Violation::UnmarkedBoundary(1)));
    }

    #[test]
    fn aleph_identity_sweep() {
        for g in 0..=3 {
            for b in 1..=3usize {
                for m in b..=6 {
                    for p in 0..=3 {
                        let mut bs = vec![1; b];
                        bs[0] += m - b;
                        let s = SurfaceSpec::with_plain(g, &bs, p);
                        if !s.is_valid() {
                            continue;
                        }
                        let n = s.rank_open_arcs().unwrap();
                        assert_eq!((2 * n + m) % 3, 0);
                        assert_eq!(s.decoration_count().unwrap(), (2 * n + m) / 3);
                        assert!(s.decoration_count().unwrap() + 1 >= 2 * p);
                    }
                }
            }
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"genus":0,"boundaries":[3],"punctures":{"plain":["P"],"vortex":["V"]}}"#;
        let s = SurfaceSpec::from_json(text).unwrap();
        assert_eq!(s.puncture_labels(), vec!["P".to_string(), "V".to_string()]);
        assert_eq!(SurfaceSpec::from_json_value(&s.to_json_value()).unwrap(), s);

        let bad = "{\"genus\":0,\n \"boundaries\":[3],\n \"colour\":1}";
        match SurfaceSpec::from_json(bad) {
            Err(SurfaceError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(SurfaceSpec::from_json(r#"{"genus":0,"boundaries":[3],"punctures":{"plain":["A","A"]}}"#).is_err());
    }
}
