//! Cyclic groups `<A> <= GL(3,q)` acting on PG(2,q), their orbits and the
//! orbit incidence matrix.
//!
//! The published generators act on points as column vectors, `p -> A p`.
//! [`ActionSide::Row`] (`p -> p A`) is kept for comparison; under it the
//! published arcs are not orbit unions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::plane::{normalize, PlaneIndex, ProjLine, ProjPoint, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbitError {
    #[error("generator matrix is singular")]
    SingularMatrix,
    #[error("malformed generator {0:?}: expected 9 comma-separated element codes")]
    Syntax(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A 3x3 matrix over GF(q), row-major `a11,a12,a13,a21,...,a33`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorMatrix {
    pub entries: [[FieldElement; 3]; 3],
}

impl GeneratorMatrix {
    pub fn identity() -> Self {
        let (o, z) = (FieldElement::ONE, FieldElement::ZERO);
        GeneratorMatrix {
            entries: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    pub fn from_codes(spec: &FieldSpec, codes: &[u32]) -> Result<Self, OrbitError> {
        if codes.len() != 9 {
            return Err(OrbitError::Syntax(format!("{codes:?}")));
        }
        let mut entries = [[FieldElement::ZERO; 3]; 3];
        for (k, &c) in codes.iter().enumerate() {
            entries[k / 3][k % 3] = spec.elem(c)?;
        }
        Ok(GeneratorMatrix { entries })
    }

    /// Parses `"a11,a12,...,a33"`.
    pub fn parse(spec: &FieldSpec, text: &str) -> Result<Self, OrbitError> {
        let codes = text
            .split(',')
            .map(|c| c.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| OrbitError::Syntax(text.to_string()))?;
        if codes.len() != 9 {
            return Err(OrbitError::Syntax(text.to_string()));
        }
        Self::from_codes(spec, &codes)
    }

    pub fn codes(&self) -> [u32; 9] {
        let mut out = [0; 9];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.entries[k / 3][k % 3].code();
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let a = &self.entries;
        GeneratorMatrix {
            entries: [
                [a[0][0], a[1][0], a[2][0]],
                [a[0][1], a[1][1], a[2][1]],
                [a[0][2], a[1][2], a[2][2]],
            ],
        }
    }

    pub fn mul(&self, spec: &FieldSpec, other: &Self) -> Self {
        let mut entries = [[FieldElement::ZERO; 3]; 3];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut s = FieldElement::ZERO;
                for k in 0..3 {
                    s = spec.add(s, spec.mul(self.entries[i][k], other.entries[k][j]));
                }
                *cell = s;
            }
        }
        GeneratorMatrix { entries }
    }

    fn minor(&self, spec: &FieldSpec, r0: usize, r1: usize, c0: usize, c1: usize) -> FieldElement {
        let a = &self.entries;
        spec.sub(
            spec.mul(a[r0][c0], a[r1][c1]),
            spec.mul(a[r0][c1], a[r1][c0]),
        )
    }

    pub fn det(&self, spec: &FieldSpec) -> FieldElement {
        let a = &self.entries;
        let t0 = spec.mul(a[0][0], self.minor(spec, 1, 2, 1, 2));
        let t1 = spec.mul(a[0][1], self.minor(spec, 1, 2, 0, 2));
        let t2 = spec.mul(a[0][2], self.minor(spec, 1, 2, 0, 1));
        spec.add(spec.sub(t0, t1), t2)
    }

    /// Inverse via the adjugate.
    pub fn inverse(&self, spec: &FieldSpec) -> Result<Self, OrbitError> {
        let det = self.det(spec);
        let dinv = spec.inv(det).map_err(|_| OrbitError::SingularMatrix)?;
        let mut entries = [[FieldElement::ZERO; 3]; 3];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                // cofactor C_ji
                let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                let mut cof = self.minor(spec, rows[0], rows[1], cols[0], cols[1]);
                if (i + j) % 2 == 1 {
                    cof = spec.neg(cof);
                }
                *cell = spec.mul(cof, dinv);
            }
        }
        Ok(GeneratorMatrix { entries })
    }

    /// `v * self` for a row vector `v`.
    pub fn apply_row(&self, spec: &FieldSpec, v: &Triple) -> Triple {
        let a = &self.entries;
        let mut out = [FieldElement::ZERO; 3];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut s = spec.mul(v[0], a[0][j]);
            s = spec.add(s, spec.mul(v[1], a[1][j]));
            *slot = spec.add(s, spec.mul(v[2], a[2][j]));
        }
        out
    }

    pub fn is_scalar(&self) -> bool {
        let a = &self.entries;
        let d = a[0][0];
        !d.is_zero()
            && (0..3)
                .all(|i| (0..3).all(|j| a[i][j] == if i == j { d } else { FieldElement::ZERO }))
    }
}

impl fmt::Display for GeneratorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes = self.codes();
        let parts: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub fn mat_is_invertible(spec: &FieldSpec, m: &GeneratorMatrix) -> bool {
    !m.det(spec).is_zero()
}

/// Which side the generator multiplies points from.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSide {
    /// `p -> A p^T`: the convention under which the published arcs are closed.
    #[default]
    Column,
    /// `p -> p A`.
    Row,
}

impl FromStr for ActionSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "column" | "col" => Ok(ActionSide::Column),
            "row" => Ok(ActionSide::Row),
            other => Err(format!("unknown action side {other:?}")),
        }
    }
}

/// A generator prepared for acting on points and lines.
///
/// Both sides reduce to right multiplication of row vectors: points by `B`
/// (`B = A` or `A^T`), lines by `(B^-1)^T`, which preserves incidence.
#[derive(Clone, Debug)]
pub struct GroupAction {
    spec: FieldSpec,
    point_mat: GeneratorMatrix,
    line_mat: GeneratorMatrix,
}

impl GroupAction {
    pub fn new(
        spec: &FieldSpec,
        m: &GeneratorMatrix,
        side: ActionSide,
    ) -> Result<Self, OrbitError> {
        let point_mat = match side {
            ActionSide::Row => *m,
            ActionSide::Column => m.transpose(),
        };
        let line_mat = point_mat.inverse(spec)?.transpose();
        Ok(GroupAction {
            spec: spec.clone(),
            point_mat,
            line_mat,
        })
    }

    pub fn point(&self, p: &ProjPoint) -> ProjPoint {
        let img = self.point_mat.apply_row(&self.spec, &p.coords);
        ProjPoint {
            coords: normalize(&self.spec, img).expect("invertible map sends nonzero to nonzero"),
        }
    }

    pub fn line(&self, l: &ProjLine) -> ProjLine {
        let img = self.line_mat.apply_row(&self.spec, &l.normal);
        ProjLine {
            normal: normalize(&self.spec, img).expect("invertible map sends nonzero to nonzero"),
        }
    }
}

/// Image of a point under the default (column) action.
pub fn act_point(
    spec: &FieldSpec,
    m: &GeneratorMatrix,
    p: &ProjPoint,
) -> Result<ProjPoint, OrbitError> {
    Ok(GroupAction::new(spec, m, ActionSide::default())?.point(p))
}

/// Image of a line under the default (column) action.
pub fn act_line(
    spec: &FieldSpec,
    m: &GeneratorMatrix,
    l: &ProjLine,
) -> Result<ProjLine, OrbitError> {
    Ok(GroupAction::new(spec, m, ActionSide::default())?.line(l))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splits a permutation into cycles, each starting at its smallest index.
fn cycles(perm: &[u32]) -> (Vec<Vec<u32>>, Vec<u32>) {
    let mut orbit_of = vec![u32::MAX; perm.len()];
    let mut orbits = Vec::new();
    for start in 0..perm.len() {
        if orbit_of[start] != u32::MAX {
            continue;
        }
        let id = orbits.len() as u32;
        let mut orbit = vec![start as u32];
        orbit_of[start] = id;
        let mut x = perm[start] as usize;
        while x != start {
            orbit_of[x] = id;
            orbit.push(x as u32);
            x = perm[x] as usize;
        }
        orbits.push(orbit);
    }
    (orbits, orbit_of)
}

/// Orbits of `<A>` on the points and lines of a plane.
#[derive(Clone, Debug)]
pub struct OrbitSystem {
    plane: Arc<PlaneIndex>,
    generator: GeneratorMatrix,
    side: ActionSide,
    group_order: u64,
    point_image: Vec<u32>,
    line_image: Vec<u32>,
    point_orbits: Vec<Vec<u32>>,
    line_orbits: Vec<Vec<u32>>,
    orbit_of_point: Vec<u32>,
    orbit_of_line: Vec<u32>,
}

impl OrbitSystem {
    pub fn plane(&self) -> &PlaneIndex {
        &self.plane
    }

    pub fn plane_arc(&self) -> &Arc<PlaneIndex> {
        &self.plane
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn side(&self) -> ActionSide {
        self.side
    }

    /// Order of the generator in PGL(3,q).
    pub fn group_order(&self) -> u64 {
        self.group_order
    }

    pub fn point_orbits(&self) -> &[Vec<u32>] {
        &self.point_orbits
    }

    pub fn line_orbits(&self) -> &[Vec<u32>] {
        &self.line_orbits
    }

    pub fn orbit_of_point(&self, pi: usize) -> usize {
        self.orbit_of_point[pi] as usize
    }

    pub fn orbit_of_line(&self, li: usize) -> usize {
        self.orbit_of_line[li] as usize
    }

    /// Index of the image of point `pi` under the generator.
    pub fn point_image(&self, pi: usize) -> usize {
        self.point_image[pi] as usize
    }

    pub fn line_image(&self, li: usize) -> usize {
        self.line_image[li] as usize
    }
}

pub fn compute_orbits(
    plane: &Arc<PlaneIndex>,
    m: &GeneratorMatrix,
) -> Result<OrbitSystem, OrbitError> {
    compute_orbits_with(plane, m, ActionSide::default())
}

pub fn compute_orbits_with(
    plane: &Arc<PlaneIndex>,
    m: &GeneratorMatrix,
    side: ActionSide,
) -> Result<OrbitSystem, OrbitError> {
    let action = GroupAction::new(plane.spec(), m, side)?;
    let point_image: Vec<u32> = plane
        .points()
        .iter()
        .map(|p| {
            plane
                .point_index(&action.point(p))
                .expect("normalized image") as u32
        })
        .collect();
    let line_image: Vec<u32> = plane
        .lines()
        .iter()
        .map(|l| plane.line_index(&action.line(l)).expect("normalized image") as u32)
        .collect();
    let (point_orbits, orbit_of_point) = cycles(&point_image);
    let (line_orbits, orbit_of_line) = cycles(&line_image);
    let group_order = point_orbits
        .iter()
        .map(|o| o.len() as u64)
        .fold(1, |acc, k| acc / gcd(acc, k) * k);
    Ok(OrbitSystem {
        plane: Arc::clone(plane),
        generator: *m,
        side,
        group_order,
        point_image,
        line_image,
        point_orbits,
        line_orbits,
        orbit_of_point,
        orbit_of_line,
    })
}

/// The orbit incidence matrix `M^G` and orbit weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitIncidence {
    pub q: u32,
    pub group_order: u64,
    /// `matrix[i][j]`: points of point orbit `j` on a fixed line of line orbit `i`.
    pub matrix: Vec<Vec<u32>>,
    /// Point orbit sizes.
    pub weights: Vec<u64>,
    /// Line orbit sizes.
    pub row_sizes: Vec<u64>,
    pub row_reps: Vec<usize>,
    /// For each point orbit: line orbits of the q+1 lines through its first
    /// point, as `(row, multiplicity)` sorted by row.
    pub pencils: Vec<Vec<(usize, u32)>>,
}

impl OrbitIncidence {
    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn num_cols(&self) -> usize {
        self.weights.len()
    }
}

/// Row of `M^G` computed from an arbitrary line.
pub fn incidence_row(sys: &OrbitSystem, line: usize) -> Vec<u32> {
    let mut row = vec![0u32; sys.point_orbits.len()];
    for &p in sys.plane.points_on_line(line) {
        row[sys.orbit_of_point[p as usize] as usize] += 1;
    }
    row
}

pub fn build_incidence(sys: &OrbitSystem) -> OrbitIncidence {
    let reps: Vec<usize> = sys.line_orbits.iter().map(|o| o[0] as usize).collect();
    build_incidence_with_reps(sys, &reps)
}

/// Builds `M^G` using the given representative line for each line orbit.
///
/// Panics if a representative is not in its orbit.
pub fn build_incidence_with_reps(sys: &OrbitSystem, reps: &[usize]) -> OrbitIncidence {
    assert_eq!(reps.len(), sys.line_orbits.len());
    let matrix = reps
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            assert_eq!(sys.orbit_of_line(li), i, "representative outside its orbit");
            incidence_row(sys, li)
        })
        .collect();
    let pencils = sys
        .point_orbits
        .iter()
        .map(|orbit| {
            let mut rows: Vec<usize> = sys
                .plane
                .lines_through_point(orbit[0] as usize)
                .iter()
                .map(|&l| sys.orbit_of_line(l as usize))
                .collect();
            rows.sort_unstable();
            let mut out: Vec<(usize, u32)> = Vec::new();
            for r in rows {
                match out.last_mut() {
                    Some((last, c)) if *last == r => *c += 1,
                    _ => out.push((r, 1)),
                }
            }
            out
        })
        .collect();
    OrbitIncidence {
        q: sys.plane.q(),
        group_order: sys.group_order,
        matrix,
        weights: sys.point_orbits.iter().map(|o| o.len() as u64).collect(),
        row_sizes: sys.line_orbits.iter().map(|o| o.len() as u64).collect(),
        row_reps: reps.to_vec(),
        pencils,
    }
}
