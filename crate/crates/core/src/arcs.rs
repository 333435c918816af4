//! Arc verification, line spectra, the code and blocking-set
//! correspondences, and the arc file format.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::orbits::{GeneratorMatrix, OrbitError, OrbitSystem};
use crate::plane::{dot, incident, line_through, parse_point, PlaneError, PlaneIndex, ProjPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArcError {
    #[error("an arc needs at least one point")]
    Empty,
    #[error("the selection is empty")]
    EmptySelection,
    #[error("point {0} appears twice")]
    Duplicate(String),
    #[error("point {0} is not a point of this plane")]
    UnknownPoint(String),
    #[error("selection has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("the points lie on one line; they do not span GF(q)^3")]
    RankDeficient,
    #[error("invalid code parameters k={k} d={d} q={q}")]
    BadParams { k: u32, d: u64, q: u64 },
    #[error("header claims {claimed} points but {found} were listed")]
    CountMismatch { claimed: usize, found: usize },
    #[error("malformed arc file: {0}")]
    Syntax(String),
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// A set of points with a claimed `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcRecord {
    pub spec: FieldSpec,
    pub claimed_r: u32,
    /// Distinct normalized points, in listing order.
    pub points: Vec<ProjPoint>,
    pub provenance: String,
}

impl ArcRecord {
    pub fn new(
        spec: FieldSpec,
        claimed_r: u32,
        points: Vec<ProjPoint>,
        provenance: impl Into<String>,
    ) -> Result<Self, ArcError> {
        if points.is_empty() {
            return Err(ArcError::Empty);
        }
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for p in &points {
            if !crate::plane::is_normalized(&p.coords)
                || p.coords.iter().any(|c| !spec.contains(*c))
            {
                return Err(ArcError::UnknownPoint(p.to_string()));
            }
            if !seen.insert(*p) {
                return Err(ArcError::Duplicate(p.to_string()));
            }
        }
        Ok(ArcRecord {
            spec,
            claimed_r,
            points,
            provenance: provenance.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn q(&self) -> u32 {
        self.spec.q()
    }

    /// Point indices in `plane`.
    pub fn indices(&self, plane: &PlaneIndex) -> Result<Vec<usize>, ArcError> {
        self.points
            .iter()
            .map(|p| {
                plane
                    .point_index(p)
                    .ok_or_else(|| ArcError::UnknownPoint(p.to_string()))
            })
            .collect()
    }

    fn membership(&self, plane: &PlaneIndex) -> Result<Vec<bool>, ArcError> {
        let mut inside = vec![false; plane.size()];
        for i in self.indices(plane)? {
            inside[i] = true;
        }
        Ok(inside)
    }
}

/// Number of lines meeting the arc in exactly `i` points, for each `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpectrum {
    pub counts: BTreeMap<u32, u64>,
    pub max_intersection: u32,
}

impl LineSpectrum {
    pub fn total_lines(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `sum_i i * counts[i]`, which equals `n (q+1)`.
    pub fn incidences(&self) -> u64 {
        self.counts.iter().map(|(&i, &c)| i as u64 * c).sum()
    }
}

/// Points of the arc on each line, in plane line order.
pub fn line_counts(plane: &PlaneIndex, arc: &ArcRecord) -> Result<Vec<u32>, ArcError> {
    let inside = arc.membership(plane)?;
    Ok((0..plane.size())
        .map(|li| {
            plane
                .points_on_line(li)
                .iter()
                .filter(|&&p| inside[p as usize])
                .count() as u32
        })
        .collect())
}

pub fn spectrum(plane: &PlaneIndex, arc: &ArcRecord) -> Result<LineSpectrum, ArcError> {
    let mut counts = BTreeMap::new();
    for c in line_counts(plane, arc)? {
        *counts.entry(c).or_insert(0u64) += 1;
    }
    let max_intersection = counts.keys().next_back().copied().unwrap_or(0);
    Ok(LineSpectrum {
        counts,
        max_intersection,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcVerdict {
    pub n: usize,
    pub achieved_r: u32,
    pub is_valid_for_claim: bool,
}

pub fn verify_arc(plane: &PlaneIndex, arc: &ArcRecord) -> Result<ArcVerdict, ArcError> {
    let spec = spectrum(plane, arc)?;
    Ok(ArcVerdict {
        n: arc.n(),
        achieved_r: spec.max_intersection,
        is_valid_for_claim: spec.max_intersection == arc.claimed_r,
    })
}

/// `sum_{i<k} ceil(d / q^i)`.
pub fn griesmer_sum(k: u32, d: u64, q: u64) -> Result<u64, ArcError> {
    if k == 0 || d == 0 || q < 2 {
        return Err(ArcError::BadParams { k, d, q });
    }
    let mut total = 0u64;
    let mut power = 1u64;
    for _ in 0..k {
        total += d.div_ceil(power);
        power = power.saturating_mul(q);
    }
    Ok(total)
}

/// Whether the `[n, 3, n-r]_q` code of an `(n, r)`-arc meets the Griesmer bound.
pub fn meets_griesmer(q: u32, n: usize, achieved_r: u32) -> bool {
    let n = n as u64;
    let r = achieved_r as u64;
    n > r && griesmer_sum(3, n - r, q as u64) == Ok(n)
}

/// The complement of an arc, a `(q^2+q+1-n, q+1-r)`-blocking set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockingSet {
    pub points: Vec<usize>,
    pub size: usize,
    pub t: u32,
    /// Fewest complement points on any line.
    pub min_line_meet: u32,
}

impl BlockingSet {
    pub fn holds(&self) -> bool {
        self.min_line_meet >= self.t
    }
}

pub fn blocking_complement(plane: &PlaneIndex, arc: &ArcRecord) -> Result<BlockingSet, ArcError> {
    let inside = arc.membership(plane)?;
    let counts = line_counts(plane, arc)?;
    let achieved_r = counts.iter().copied().max().unwrap_or(0);
    let q1 = plane.q() + 1;
    let points: Vec<usize> = (0..plane.size()).filter(|&i| !inside[i]).collect();
    Ok(BlockingSet {
        size: points.len(),
        points,
        t: q1 - achieved_r,
        min_line_meet: counts.iter().map(|&c| q1 - c).min().unwrap_or(q1),
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: u32,
    pub d: usize,
    pub q: u32,
}

impl std::fmt::Display for CodeParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]_{}", self.n, self.k, self.d, self.q)
    }
}

/// Generator matrix of the projective code whose columns are the arc's points.
pub fn code_generator_columns(
    plane: &PlaneIndex,
    arc: &ArcRecord,
) -> Result<(CodeParams, Vec<ProjPoint>), ArcError> {
    let spec = plane.spec();
    if arc.n() < 3 {
        return Err(ArcError::RankDeficient);
    }
    let line = line_through(spec, &arc.points[0], &arc.points[1])?;
    if arc.points.iter().all(|p| incident(spec, p, &line)) {
        return Err(ArcError::RankDeficient);
    }
    let verdict = verify_arc(plane, arc)?;
    let params = CodeParams {
        n: arc.n(),
        k: 3,
        d: arc.n() - verdict.achieved_r as usize,
        q: spec.q(),
    };
    Ok((params, arc.points.clone()))
}

/// Minimum weight over all nonzero codewords `m G`, by enumerating the
/// `q^3 - 1` messages. Cost is `q^3 * n`.
pub fn exhaustive_min_distance(spec: &FieldSpec, columns: &[ProjPoint]) -> usize {
    let mut best = usize::MAX;
    for a in spec.elements() {
        for b in spec.elements() {
            for c in spec.elements() {
                let msg = [a, b, c];
                if msg.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let weight = columns
                    .iter()
                    .filter(|p| !dot(spec, &msg, &p.coords).is_zero())
                    .count();
                best = best.min(weight);
            }
        }
    }
    best
}

/// Largest field order for which codeword enumeration is used as a check.
pub const MIN_DISTANCE_ENUM_MAX_Q: u32 = 9;

/// True iff the generator maps every arc point into the arc.
pub fn is_orbit_union(sys: &OrbitSystem, arc: &ArcRecord) -> Result<bool, ArcError> {
    let plane = sys.plane();
    let inside = arc.membership(plane)?;
    Ok(arc
        .indices(plane)?
        .into_iter()
        .all(|i| inside[sys.point_image(i)]))
}

/// The union of the selected point orbits.
pub fn arc_from_selection(
    sys: &OrbitSystem,
    selection: &[bool],
    claimed_r: u32,
    provenance: impl Into<String>,
) -> Result<ArcRecord, ArcError> {
    let orbits = sys.point_orbits();
    if selection.len() != orbits.len() {
        return Err(ArcError::LengthMismatch {
            expected: orbits.len(),
            got: selection.len(),
        });
    }
    let points: Vec<ProjPoint> = orbits
        .iter()
        .zip(selection)
        .filter(|(_, &x)| x)
        .flat_map(|(o, _)| o.iter().map(|&i| *sys.plane().point(i as usize)))
        .collect();
    if points.is_empty() {
        return Err(ArcError::EmptySelection);
    }
    ArcRecord::new(sys.plane().spec().clone(), claimed_r, points, provenance)
}

/// An arc file: the record plus the generator it is claimed to be invariant under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcFile {
    pub arc: ArcRecord,
    pub generator: Option<GeneratorMatrix>,
}

impl ArcFile {
    /// Reads `q=<desc> r=<r> n=<n> gen=<9 codes or ->` followed by `(a,b,c)` points.
    ///
    /// Whitespace and separators between points are ignored.
    pub fn parse(text: &str, provenance: &str) -> Result<Self, ArcError> {
        let syntax = |m: &str| ArcError::Syntax(m.to_string());
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let mut q_desc = None;
        let mut modulus = None;
        let mut r = None;
        let mut n = None;
        let mut gen = None;
        for tok in header.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| syntax("header token without '='"))?;
            match key {
                "q" => q_desc = Some(value),
                "mod" => modulus = Some(tok),
                "r" => r = Some(value.parse::<u32>().map_err(|_| syntax("bad r"))?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| syntax("bad n"))?),
                "gen" => gen = Some(value),
                _ => return Err(syntax(&format!("unknown header key {key:?}"))),
            }
        }
        let q_desc = q_desc.ok_or_else(|| syntax("missing q"))?;
        let descriptor = match modulus {
            Some(m) => format!("{q_desc} {m}"),
            None => q_desc.to_string(),
        };
        let spec: FieldSpec = descriptor.parse()?;
        let r = r.ok_or_else(|| syntax("missing r"))?;
        let n = n.ok_or_else(|| syntax("missing n"))?;
        let generator = match gen {
            None | Some("-") => None,
            Some(g) => Some(GeneratorMatrix::parse(&spec, g)?),
        };
        let points = parse_point_list(&spec, body)?;
        if points.len() != n {
            return Err(ArcError::CountMismatch {
                claimed: n,
                found: points.len(),
            });
        }
        Ok(ArcFile {
            arc: ArcRecord::new(spec, r, points, provenance)?,
            generator,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let gen = self
            .generator
            .map_or_else(|| "-".to_string(), |g| g.to_string());
        let _ = writeln!(
            out,
            "q={} r={} n={} gen={}",
            self.arc.spec,
            self.arc.claimed_r,
            self.arc.n(),
            gen
        );
        for p in &self.arc.points {
            let _ = writeln!(out, "{p}");
        }
        out
    }
}

/// Extracts every `(a,b,c)` group from free text.
pub fn parse_point_list(spec: &FieldSpec, text: &str) -> Result<Vec<ProjPoint>, ArcError> {
    let mut points = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('(') {
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| ArcError::Syntax("unclosed '('".into()))?;
        let group: String = rest[open..open + close + 1]
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect();
        points.push(parse_point(spec, &group)?);
        let between = &rest[..open];
        if between
            .chars()
            .any(|c| !(c.is_whitespace() || c == ',' || c == '.' || c == '$'))
        {
            return Err(ArcError::Syntax(format!(
                "unexpected text {:?}",
                between.trim()
            )));
        }
        rest = &rest[open + close + 1..];
    }
    if rest
        .chars()
        .any(|c| !(c.is_whitespace() || c == ',' || c == '.' || c == '$'))
    {
        return Err(ArcError::Syntax(format!(
            "unexpected text {:?}",
            rest.trim()
        )));
    }
    Ok(points)
}

/// Field element triple of a point, as raw codes.
pub fn point_codes(p: &ProjPoint) -> [u32; 3] {
    p.coords.map(FieldElement::code)
}
