//! Points and lines of the projective plane PG(2,q).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlaneError {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("a line needs two distinct points")]
    EqualPoints,
    #[error("{0} is not normalized (leftmost nonzero coordinate must be 1)")]
    NotNormalized(String),
    #[error("malformed point {0:?}")]
    Syntax(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Triple = [FieldElement; 3];

/// A point of PG(2,q): a nonzero row vector with leftmost nonzero entry 1.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint {
    pub coords: Triple,
}

/// A line of PG(2,q), given by normalized dual coordinates.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjLine {
    pub normal: Triple,
}

fn fmt_triple(t: &Triple, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "({},{},{})", t[0], t[1], t[2])
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_triple(&self.coords, f)
    }
}

impl fmt::Display for ProjLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_triple(&self.normal, f)
    }
}

/// Scales a nonzero triple so its leftmost nonzero entry is 1.
pub fn normalize(spec: &FieldSpec, raw: Triple) -> Result<Triple, PlaneError> {
    let lead = raw
        .iter()
        .copied()
        .find(|c| !c.is_zero())
        .ok_or(PlaneError::ZeroVector)?;
    if lead == FieldElement::ONE {
        return Ok(raw);
    }
    let s = spec.inv(lead)?;
    Ok(raw.map(|c| spec.mul(s, c)))
}

pub fn is_normalized(t: &Triple) -> bool {
    t.iter().copied().find(|c| !c.is_zero()) == Some(FieldElement::ONE)
}

pub fn normalize_point(spec: &FieldSpec, raw: Triple) -> Result<ProjPoint, PlaneError> {
    Ok(ProjPoint {
        coords: normalize(spec, raw)?,
    })
}

pub fn normalize_line(spec: &FieldSpec, raw: Triple) -> Result<ProjLine, PlaneError> {
    Ok(ProjLine {
        normal: normalize(spec, raw)?,
    })
}

pub fn dot(spec: &FieldSpec, a: &Triple, b: &Triple) -> FieldElement {
    let mut s = spec.mul(a[0], b[0]);
    s = spec.add(s, spec.mul(a[1], b[1]));
    spec.add(s, spec.mul(a[2], b[2]))
}

pub fn cross(spec: &FieldSpec, a: &Triple, b: &Triple) -> Triple {
    let m = |x, y| spec.mul(x, y);
    [
        spec.sub(m(a[1], b[2]), m(a[2], b[1])),
        spec.sub(m(a[2], b[0]), m(a[0], b[2])),
        spec.sub(m(a[0], b[1]), m(a[1], b[0])),
    ]
}

pub fn incident(spec: &FieldSpec, point: &ProjPoint, line: &ProjLine) -> bool {
    dot(spec, &point.coords, &line.normal).is_zero()
}

pub fn line_through(
    spec: &FieldSpec,
    p1: &ProjPoint,
    p2: &ProjPoint,
) -> Result<ProjLine, PlaneError> {
    if p1 == p2 {
        return Err(PlaneError::EqualPoints);
    }
    normalize_line(spec, cross(spec, &p1.coords, &p2.coords))
}

pub fn meet(spec: &FieldSpec, l1: &ProjLine, l2: &ProjLine) -> Result<ProjPoint, PlaneError> {
    if l1 == l2 {
        return Err(PlaneError::EqualPoints);
    }
    normalize_point(spec, cross(spec, &l1.normal, &l2.normal))
}

/// Parses `"(a,b,c)"` into raw codes, checking range but not normalization.
pub fn parse_triple(spec: &FieldSpec, text: &str) -> Result<Triple, PlaneError> {
    let bad = || PlaneError::Syntax(text.to_string());
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let codes = inner
        .split(',')
        .map(|c| c.trim().parse::<u32>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    if codes.len() != 3 {
        return Err(bad());
    }
    Ok([
        spec.elem(codes[0])?,
        spec.elem(codes[1])?,
        spec.elem(codes[2])?,
    ])
}

/// Parses a point that must already be in normalized form.
pub fn parse_point(spec: &FieldSpec, text: &str) -> Result<ProjPoint, PlaneError> {
    let coords = parse_triple(spec, text)?;
    if coords.iter().all(|c| c.is_zero()) {
        return Err(PlaneError::ZeroVector);
    }
    if !is_normalized(&coords) {
        return Err(PlaneError::NotNormalized(text.trim().to_string()));
    }
    Ok(ProjPoint { coords })
}

/// All points and lines of PG(2,q) in canonical order, with incidence lists.
///
/// Order: `(0,0,1)`, then `(0,1,c)` by `c`, then `(1,b,c)` lexicographically.
/// Lines use the same order on their normals.
#[derive(Clone, Debug)]
pub struct PlaneIndex {
    spec: FieldSpec,
    points: Vec<ProjPoint>,
    lines: Vec<ProjLine>,
    // q+1 entries per line / per point, flattened
    points_on_line: Vec<u32>,
    lines_through_point: Vec<u32>,
}

fn canonical_triples(q: u32) -> Vec<Triple> {
    let e = FieldElement;
    let mut out = Vec::with_capacity((q * q + q + 1) as usize);
    out.push([e(0), e(0), e(1)]);
    for c in 0..q {
        out.push([e(0), e(1), e(c)]);
    }
    for b in 0..q {
        for c in 0..q {
            out.push([e(1), e(b), e(c)]);
        }
    }
    out
}

/// Position of a normalized triple in the canonical order.
fn triple_index(q: u32, t: &Triple) -> Option<usize> {
    let [a, b, c] = t.map(|x| x.code());
    if a >= q || b >= q || c >= q {
        return None;
    }
    match (a, b, c) {
        (0, 0, 1) => Some(0),
        (0, 1, c) => Some(1 + c as usize),
        (1, b, c) => Some(1 + q as usize + (b * q + c) as usize),
        _ => None,
    }
}

impl PlaneIndex {
    pub fn new(spec: &FieldSpec) -> Self {
        let q = spec.q();
        let triples = canonical_triples(q);
        let points: Vec<ProjPoint> = triples.iter().map(|&coords| ProjPoint { coords }).collect();
        let lines: Vec<ProjLine> = triples.iter().map(|&normal| ProjLine { normal }).collect();
        let k = q as usize + 1;
        let mut points_on_line = Vec::with_capacity(lines.len() * k);
        let mut lines_through_point = vec![0u32; points.len() * k];
        let mut fill = vec![0usize; points.len()];
        for (li, line) in lines.iter().enumerate() {
            let before = points_on_line.len();
            for (pi, point) in points.iter().enumerate() {
                if incident(spec, point, line) {
                    points_on_line.push(pi as u32);
                    lines_through_point[pi * k + fill[pi]] = li as u32;
                    fill[pi] += 1;
                }
            }
            debug_assert_eq!(points_on_line.len() - before, k);
        }
        PlaneIndex {
            spec: spec.clone(),
            points,
            lines,
            points_on_line,
            lines_through_point,
        }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q()
    }

    /// Number of points (equal to the number of lines): q^2+q+1.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn lines(&self) -> &[ProjLine] {
        &self.lines
    }

    pub fn point(&self, i: usize) -> &ProjPoint {
        &self.points[i]
    }

    pub fn line(&self, i: usize) -> &ProjLine {
        &self.lines[i]
    }

    pub fn point_index(&self, p: &ProjPoint) -> Option<usize> {
        triple_index(self.q(), &p.coords)
    }

    pub fn line_index(&self, l: &ProjLine) -> Option<usize> {
        triple_index(self.q(), &l.normal)
    }

    /// Indices of the q+1 points on line `li`, ascending.
    pub fn points_on_line(&self, li: usize) -> &[u32] {
        let k = self.q() as usize + 1;
        &self.points_on_line[li * k..(li + 1) * k]
    }

    /// Indices of the q+1 lines through point `pi`, ascending.
    pub fn lines_through_point(&self, pi: usize) -> &[u32] {
        let k = self.q() as usize + 1;
        &self.lines_through_point[pi * k..(pi + 1) * k]
    }
}

/// Convenience wrapper matching the operation name used elsewhere.
pub fn enumerate_plane(spec: &FieldSpec) -> PlaneIndex {
    PlaneIndex::new(spec)
}
