use std::path::{Path, PathBuf};

use arcs_core::arcs::ArcFile;
use arcs_core::corpus::{
    parse_arc_listing, parse_result_vector, verify_corpus, Corpus, TableEntry,
};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn copy_corpus() -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let src = corpus_dir();
    std::fs::create_dir_all(tmp.path().join("arcs")).unwrap();
    std::fs::create_dir_all(tmp.path().join("tables")).unwrap();
    for sub in ["arcs", "tables"] {
        for e in std::fs::read_dir(src.join(sub)).unwrap() {
            let e = e.unwrap();
            std::fs::copy(e.path(), tmp.path().join(sub).join(e.file_name())).unwrap();
        }
    }
    for f in ["vectors.txt", "SHA256SUMS"] {
        std::fs::copy(src.join(f), tmp.path().join(f)).unwrap();
    }
    tmp
}

#[test]
fn bundled_corpus_passes() {
    let corpus = Corpus::bundled().unwrap();
    assert!(corpus.checksum_failures.is_empty());
    assert_eq!(corpus.arcs.len(), 36);
    assert_eq!(corpus.vectors.len(), 37);
    let report = verify_corpus(&corpus, 1);
    assert!(report.all_passed(), "{}", report.to_text());
    assert_eq!(
        report.unmatched_vectors,
        vec!["(31,19,539;21,20,1,12,15,6,27,25,22;240)".to_string()]
    );
    assert_eq!(
        report.shared_generators,
        vec![vec!["(29,21,565)".to_string(), "(29,25,695)".to_string()]]
    );
    assert!(report.to_text().ends_with("36/36 passed\n"));
    // worker count does not change the report
    assert_eq!(verify_corpus(&corpus, 4).to_text(), report.to_text());
}

#[test]
fn directory_matches_bundle() {
    let a = verify_corpus(&Corpus::bundled().unwrap(), 1);
    let b = verify_corpus(&Corpus::from_dir(&corpus_dir()).unwrap(), 1);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn vector_lines_round_trip() {
    let text = std::fs::read_to_string(corpus_dir().join("vectors.txt")).unwrap();
    for line in text.lines() {
        assert_eq!(parse_result_vector(line).unwrap().to_string(), line);
    }
}

#[test]
fn corrupted_coordinate_fails_only_that_arc() {
    let tmp = copy_corpus();
    let path = tmp.path().join("arcs/q29_r3_n44.arc");
    let text = std::fs::read_to_string(&path).unwrap();
    // (0,1,11) -> (0,1,12)
    let bad = text.replacen("(0,1,11)", "(0,1,12)", 1);
    assert_ne!(bad, text);
    std::fs::write(&path, bad).unwrap();
    let corpus = Corpus::from_dir(tmp.path()).unwrap();
    assert_eq!(
        corpus.checksum_failures,
        vec!["arcs/q29_r3_n44.arc".to_string()]
    );
    let report = verify_corpus(&corpus, 1);
    let failed: Vec<&str> = report
        .arcs
        .iter()
        .filter(|a| !a.passed)
        .map(|a| a.name.as_str())
        .collect();
    assert_eq!(failed, vec!["q29_r3_n44"]);
    assert_eq!(report.passed, 35);
}

#[test]
fn checksum_mismatch_is_reported() {
    let tmp = copy_corpus();
    let path = tmp.path().join("tables/t1.tsv");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push('\n');
    std::fs::write(&path, text).unwrap();
    let report = verify_corpus(&Corpus::from_dir(tmp.path()).unwrap(), 1);
    assert_eq!(report.passed, report.total);
    assert_eq!(report.checksum_failures, vec!["tables/t1.tsv".to_string()]);
    assert!(!report.all_passed());
}

#[test]
fn appendix_style_listings() {
    let corpus = Corpus::bundled().unwrap();
    for (name, header) in [
        ("q29_r3_n44", "m_{3}(2,29) ≥ 44"),
        ("q31_r27_n805", "m_{27}(2,31) ≥ 805"),
    ] {
        let file: &ArcFile = corpus.arc(name).unwrap().parsed.as_ref().unwrap();
        let pts: Vec<String> = file.arc.points.iter().map(|p| p.to_string()).collect();
        let listing = format!("{header}\n{}", pts.join(", "));
        let arc = parse_arc_listing(&listing).unwrap();
        assert_eq!(arc.points, file.arc.points);
        assert_eq!(arc.claimed_r, file.arc.claimed_r);
    }
}

#[test]
fn tables() {
    let corpus = Corpus::bundled().unwrap();
    let t = &corpus.tables;
    assert_eq!(t.exact_values().count(), 24);
    assert_eq!(t.get(9, 8), Some(&TableEntry::Exact(65)));
    for (_, e) in t.iter() {
        assert!(e.lower() <= e.upper());
    }
    let mut g = t.griesmer_entries();
    g.sort();
    assert_eq!(g.len(), 10);
    for a in &corpus.arcs {
        let f = a.parsed.as_ref().unwrap();
        match t.get(f.arc.q(), f.arc.claimed_r) {
            Some(&TableEntry::Bounds {
                lower,
                is_new: true,
                ..
            }) => assert_eq!(lower, f.arc.n() as u64),
            other => panic!("{}: {other:?}", a.name),
        }
    }
}
