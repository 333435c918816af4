mod common;

use std::sync::Arc;

use arcs_core::orbits::{
    build_incidence, compute_orbits, GeneratorMatrix, OrbitIncidence, OrbitSystem,
};
use arcs_core::plane::{dot, normalize, PlaneIndex};
use arcs_core::search::random_invertible;
use arcs_core::FieldSpec;
use common::field;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

pub const ORDERS_TO_27: [u32; 15] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];

/// Column action computed directly: p -> normalize(A p).
fn image_oracle(f: &FieldSpec, plane: &PlaneIndex, g: &GeneratorMatrix, pi: usize) -> usize {
    let p = plane.point(pi).coords;
    let mut v = [f.elem(0).unwrap(); 3];
    for (i, slot) in v.iter_mut().enumerate() {
        for j in 0..3 {
            *slot = f.add(*slot, f.mul(g.entries[i][j], p[j]));
        }
    }
    let n = normalize(f, v).unwrap();
    plane.points().iter().position(|x| x.coords == n).unwrap()
}

/// Smallest k with A^k scalar.
fn projective_order(f: &FieldSpec, g: &GeneratorMatrix) -> u64 {
    let mut m = *g;
    let mut k = 1;
    while !m.is_scalar() {
        m = m.mul(f, g);
        k += 1;
    }
    k
}

fn check_system(
    f: &FieldSpec,
    plane: &PlaneIndex,
    g: &GeneratorMatrix,
    sys: &OrbitSystem,
    inc: &OrbitIncidence,
) {
    let q = f.q() as u64;
    let n = plane.size();
    // orbits partition the points and are closed
    let mut seen = vec![false; n];
    for o in sys.point_orbits() {
        assert_eq!(sys.group_order() % o.len() as u64, 0);
        for &p in o {
            assert!(!seen[p as usize]);
            seen[p as usize] = true;
        }
    }
    assert!(seen.iter().all(|&s| s));
    for pi in 0..n {
        let img = image_oracle(f, plane, g, pi);
        assert_eq!(sys.point_image(pi), img);
        assert_eq!(sys.orbit_of_point(pi), sys.orbit_of_point(img));
    }
    assert_eq!(sys.group_order(), projective_order(f, g));
    // as many line orbits as point orbits
    assert_eq!(sys.line_orbits().len(), sys.point_orbits().len());
    assert_eq!(inc.weights.iter().sum::<u64>(), n as u64);
    for (i, row) in inc.matrix.iter().enumerate() {
        assert_eq!(row.iter().map(|&c| c as u64).sum::<u64>(), q + 1, "row sum");
        // recount the row from scratch
        let line = plane.line(inc.row_reps[i]);
        let mut counts = vec![0u32; row.len()];
        for (pi, p) in plane.points().iter().enumerate() {
            if dot(f, &p.coords, &line.normal).is_zero() {
                counts[sys.orbit_of_point(pi)] += 1;
            }
        }
        assert_eq!(&counts, row);
    }
    for j in 0..inc.weights.len() {
        let col: u64 = inc
            .matrix
            .iter()
            .zip(&inc.row_sizes)
            .map(|(r, &s)| r[j] as u64 * s)
            .sum();
        assert_eq!(col, inc.weights[j] * (q + 1), "column identity");
    }
}

#[test]
fn row_sums_for_random_generators() {
    for q in ORDERS_TO_27 {
        let f = field(q);
        let plane = Arc::new(PlaneIndex::new(&f));
        let mut rng = SplitMix64::seed_from_u64(1000 + q as u64);
        for _ in 0..50 {
            let g = random_invertible(&f, &mut rng);
            let sys = compute_orbits(&plane, &g).unwrap();
            let inc = build_incidence(&sys);
            check_system(&f, &plane, &g, &sys, &inc);
        }
    }
}

#[test]
fn row_sums_shared_check() {
    for q in ORDERS_TO_27 {
        common::orbit_row_sums(q, 50, q as u64).unwrap();
    }
}

#[test]
fn paper_generators() {
    for (q, gen, orbits, order) in [
        (29, "9,16,22,22,7,27,4,21,16", 127, 7),
        (27, "5,7,0,15,0,19,2,3,22", 61, 13),
    ] {
        let f = field(q);
        let plane = Arc::new(PlaneIndex::new(&f));
        let g = GeneratorMatrix::parse(&f, gen).unwrap();
        let sys = compute_orbits(&plane, &g).unwrap();
        assert_eq!(sys.point_orbits().len(), orbits);
        assert_eq!(sys.group_order(), order);
        check_system(&f, &plane, &g, &sys, &build_incidence(&sys));
    }
}

#[test]
fn identity_gives_singletons() {
    let f = field(5);
    let plane = Arc::new(PlaneIndex::new(&f));
    let sys = compute_orbits(&plane, &GeneratorMatrix::identity()).unwrap();
    assert_eq!(sys.point_orbits().len(), 31);
    let inc = build_incidence(&sys);
    for (i, row) in inc.matrix.iter().enumerate() {
        let on: Vec<usize> = row
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(j, _)| j)
            .collect();
        let expected: Vec<usize> = plane
            .points_on_line(inc.row_reps[i])
            .iter()
            .map(|&p| p as usize)
            .collect();
        let mut expected = expected;
        expected.sort();
        assert_eq!(on, expected);
    }
}
