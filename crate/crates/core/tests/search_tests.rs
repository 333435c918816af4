mod common;

use arcs_core::arcs::verify_arc;
use arcs_core::corpus::Corpus;
use arcs_core::ilp::SolverConfig;
use arcs_core::orbits::{mat_is_invertible, GeneratorMatrix};
use arcs_core::plane::PlaneIndex;
use arcs_core::search::{random_invertible, random_matrix, run_search, SearchJob};
use common::field;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;

#[test]
fn singular_fraction_matches_group_order() {
    for q in [2u32, 3, 5, 7] {
        let f = field(q);
        let mut rng = SplitMix64::seed_from_u64(q as u64);
        let draws = 10_000;
        let singular = (0..draws)
            .filter(|_| !mat_is_invertible(&f, &random_matrix(&f, &mut rng)))
            .count();
        let q3 = (q as f64).powi(3);
        let gl = (q3 - 1.0) * (q3 - q as f64) * (q3 - (q as f64).powi(2));
        let p = 1.0 - gl / q3.powi(3);
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        let observed = singular as f64 / draws as f64;
        assert!(
            (observed - p).abs() < 5.0 * sigma,
            "q={q}: {observed} vs {p}"
        );
        assert!(p <= 1.0 / q as f64 + 1.0 / (q as f64).powi(2));
    }
}

#[test]
fn sampling_is_seeded() {
    let f = field(5);
    let seq = |s| {
        let mut rng = SplitMix64::seed_from_u64(s);
        (0..50)
            .map(|_| random_invertible(&f, &mut rng))
            .collect::<Vec<_>>()
    };
    assert_eq!(seq(42), seq(42));
    assert!(seq(42).iter().all(|m| mat_is_invertible(&f, m)));
}

#[test]
fn trivial_group_over_gf3() {
    let mut job = SearchJob::new(field(3), vec![2], 5);
    job.explicit.push(GeneratorMatrix::identity());
    let out = run_search(&job).unwrap();
    assert_eq!(out.best[&2].0.n, 4);
}

#[test]
fn paper_generator_gf29() {
    let f = field(29);
    let mut job = SearchJob::new(f.clone(), vec![3], 0);
    job.explicit
        .push(GeneratorMatrix::parse(&f, "9,16,22,22,7,27,4,21,16").unwrap());
    job.solver = SolverConfig {
        stop_at: Some(44),
        ..SolverConfig::default()
    };
    job.known = Some(Corpus::bundled().unwrap().tables);
    let out = run_search(&job).unwrap();
    let (v, file) = &out.best[&3];
    assert!(v.n >= 44);
    let plane = PlaneIndex::new(&f);
    let verdict = verify_arc(&plane, &file.arc).unwrap();
    assert!(verdict.achieved_r <= 3);
    assert_eq!(verdict.n as u64, v.n);
    assert_eq!(out.upper_bound_violations(), 0);
}

#[test]
fn logs_are_reproducible() {
    let run = |jobs| {
        let mut job = SearchJob::new(field(7), vec![2, 3], 99);
        job.random_candidates = 8;
        job.jobs = jobs;
        job.solver = SolverConfig::default().with_nodes(50_000);
        job.known = Some(Corpus::bundled().unwrap().tables);
        let out = run_search(&job).unwrap();
        for r in &out.results {
            assert!(r.n <= 57);
            assert!(!r.exceeds_upper);
        }
        out.log()
    };
    let a = run(1);
    assert_eq!(a, run(1));
    assert_eq!(a, run(3));
    assert_eq!(
        a.lines().filter(|l| l.starts_with('(')).count()
            + a.lines().filter(|l| l.contains("skipped")).count(),
        16
    );
}

#[test]
fn writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut job = SearchJob::new(field(5), vec![2, 3], 1);
    job.explicit.push(GeneratorMatrix::identity());
    job.random_candidates = 2;
    let out = run_search(&job).unwrap();
    out.write_to(&job, tmp.path()).unwrap();
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("log.txt")).unwrap(),
        out.log()
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 1);
    assert!(tmp.path().join("q5_r2_n6.arc").exists());
    assert!(tmp.path().join("q5_r3_n11.arc").exists());
}
