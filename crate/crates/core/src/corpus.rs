//! The bundled data: appendix arcs, search result vectors, and bound tables.
//!
//! Layout on disk (and compiled into the library):
//!
//! ```text
//! corpus/arcs/q<q>_r<r>_n<n>.arc
//! corpus/vectors.txt
//! corpus/tables/{t1,t2,t3}.tsv
//! corpus/SHA256SUMS
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arcs::{
    blocking_complement, is_orbit_union, meets_griesmer, parse_point_list, spectrum, ArcError,
    ArcFile, ArcRecord,
};
use crate::field::{prime_power, FieldError, FieldSpec};
use crate::orbits::{compute_orbits, GeneratorMatrix};
use crate::plane::{PlaneError, PlaneIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("header claims {claimed} points but {found} were listed")]
    CountMismatch { claimed: usize, found: usize },
    #[error("{0} is not normalized")]
    NonNormalizedPoint(String),
    #[error("point {0} is listed twice")]
    DuplicatePoint(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Arc(ArcError),
}

impl From<ArcError> for CorpusError {
    fn from(e: ArcError) -> Self {
        match e {
            ArcError::Plane(PlaneError::NotNormalized(p)) => CorpusError::NonNormalizedPoint(p),
            ArcError::Duplicate(p) => CorpusError::DuplicatePoint(p),
            ArcError::CountMismatch { claimed, found } => {
                CorpusError::CountMismatch { claimed, found }
            }
            ArcError::Syntax(s) => CorpusError::Syntax(s),
            other => CorpusError::Arc(other),
        }
    }
}

/// A search record `(q,r,n;a11,...,a33;time)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResultVector {
    pub q: u32,
    pub r: u32,
    pub n: u64,
    pub generator: [u32; 9],
    pub time_seconds: u64,
}

impl ResultVector {
    pub fn key(&self) -> (u32, u32, u64) {
        (self.q, self.r, self.n)
    }

    pub fn generator_matrix(&self, spec: &FieldSpec) -> Result<GeneratorMatrix, CorpusError> {
        GeneratorMatrix::from_codes(spec, &self.generator)
            .map_err(|e| CorpusError::Range(e.to_string()))
    }
}

impl fmt::Display for ResultVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.generator.iter().map(u32::to_string).collect();
        write!(
            f,
            "({},{},{};{};{})",
            self.q,
            self.r,
            self.n,
            g.join(","),
            self.time_seconds
        )
    }
}

impl FromStr for ResultVector {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || CorpusError::Syntax(format!("{s:?} is not (q,r,n;a11,...,a33;time)"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(syntax)?;
        let parts: Vec<&str> = inner.split(';').collect();
        if parts.len() != 3 {
            return Err(syntax());
        }
        let nums = |p: &str| -> Result<Vec<u64>, CorpusError> {
            p.split(',')
                .map(|x| x.parse::<u64>().map_err(|_| syntax()))
                .collect()
        };
        let head = nums(parts[0])?;
        let gen = nums(parts[1])?;
        let time = nums(parts[2])?;
        if head.len() != 3 || gen.len() != 9 || time.len() != 1 {
            return Err(syntax());
        }
        let range = |m: String| CorpusError::Range(m);
        let q = u32::try_from(head[0]).map_err(|_| range(format!("q={}", head[0])))?;
        if prime_power(q).is_none() {
            return Err(range(format!("q={q} is not a prime power")));
        }
        let r = head[1];
        if r < 1 || r > q as u64 {
            return Err(range(format!("r={r} outside 1..={q}")));
        }
        let n = head[2];
        let points = q as u64 * q as u64 + q as u64 + 1;
        if n > points {
            return Err(range(format!("n={n} exceeds {points}")));
        }
        let mut generator = [0u32; 9];
        for (slot, &c) in generator.iter_mut().zip(&gen) {
            if c >= q as u64 {
                return Err(range(format!(
                    "entry {c} is not an element code of GF({q})"
                )));
            }
            *slot = c as u32;
        }
        Ok(ResultVector {
            q,
            r: r as u32,
            n,
            generator,
            time_seconds: time[0],
        })
    }
}

pub fn parse_result_vector(text: &str) -> Result<ResultVector, CorpusError> {
    text.parse()
}

/// Parses an appendix section: a header `m_r(2,q) >= n` (`≥`, braces and `$`
/// accepted) followed by comma-separated `(a,b,c)` points.
pub fn parse_arc_listing(text: &str) -> Result<ArcRecord, CorpusError> {
    let text = text.trim_start();
    let (header, body) = match text.find('(') {
        // the header itself contains "(2,q)"
        Some(_) => split_header(text)?,
        None => return Err(CorpusError::Syntax("no header".into())),
    };
    let (r, q, n) = parse_listing_header(header)?;
    let spec = FieldSpec::of_order(q)?;
    let points = parse_point_list(&spec, body).map_err(CorpusError::from)?;
    if points.len() != n {
        return Err(CorpusError::CountMismatch {
            claimed: n,
            found: points.len(),
        });
    }
    Ok(ArcRecord::new(spec, r, points, header.trim())?)
}

fn split_header(text: &str) -> Result<(&str, &str), CorpusError> {
    // header ends after the number that follows the relation sign
    let rel = ["≥", ">=", "\\geq"]
        .iter()
        .filter_map(|s| text.find(s).map(|i| (i, s.len())))
        .min()
        .ok_or_else(|| CorpusError::Syntax("header lacks '>='".into()))?;
    let after = rel.0 + rel.1;
    let rest = &text[after..];
    let skip = rest.len() - rest.trim_start_matches([' ', '\t']).len();
    let digits = rest[skip..]
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .count();
    let mut end = after + skip + digits;
    while text[end..].starts_with(['$', ':', ' ', '\t']) {
        end += 1;
    }
    Ok(text.split_at(end))
}

fn parse_listing_header(header: &str) -> Result<(u32, u32, usize), CorpusError> {
    let syntax = || CorpusError::Syntax(format!("bad header {:?}", header.trim()));
    let h: String = header
        .replace("\\geq", ">=")
        .replace('≥', ">=")
        .chars()
        .filter(|c| !c.is_whitespace() && !matches!(c, '{' | '}' | '$' | ':'))
        .collect();
    let rest = h.strip_prefix("m_").ok_or_else(syntax)?;
    let (r, rest) = rest.split_once("(2,").ok_or_else(syntax)?;
    let (q, n) = rest.split_once(")>=").ok_or_else(syntax)?;
    Ok((
        r.parse().map_err(|_| syntax())?,
        q.parse().map_err(|_| syntax())?,
        n.parse().map_err(|_| syntax())?,
    ))
}

/// One row of Tables 1-3.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableEntry {
    Exact(u64),
    Bounds {
        lower: u64,
        upper: u64,
        /// Bold in the paper: a new lower bound.
        is_new: bool,
        /// Underlined in the paper: the arc meets the Griesmer bound.
        is_griesmer: bool,
    },
}

impl TableEntry {
    pub fn lower(&self) -> u64 {
        match *self {
            TableEntry::Exact(v) => v,
            TableEntry::Bounds { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> u64 {
        match *self {
            TableEntry::Exact(v) => v,
            TableEntry::Bounds { upper, .. } => upper,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundsTable {
    entries: BTreeMap<(u32, u32), TableEntry>,
}

impl BoundsTable {
    /// Loads `t1.tsv` (`q r value`) and any number of `q r lower upper new griesmer` tables.
    pub fn parse(t1: &str, others: &[&str]) -> Result<Self, CorpusError> {
        let mut entries = BTreeMap::new();
        for (line_no, fields) in tsv_rows(t1) {
            let v = numbers(&fields, 3, line_no)?;
            entries.insert((v[0] as u32, v[1] as u32), TableEntry::Exact(v[2]));
        }
        for text in others {
            for (line_no, fields) in tsv_rows(text) {
                let v = numbers(&fields, 6, line_no)?;
                if v[2] > v[3] {
                    return Err(CorpusError::Range(format!(
                        "line {line_no}: lower {} > upper {}",
                        v[2], v[3]
                    )));
                }
                entries.insert(
                    (v[0] as u32, v[1] as u32),
                    TableEntry::Bounds {
                        lower: v[2],
                        upper: v[3],
                        is_new: v[4] != 0,
                        is_griesmer: v[5] != 0,
                    },
                );
            }
        }
        Ok(BoundsTable { entries })
    }

    pub fn get(&self, q: u32, r: u32) -> Option<&TableEntry> {
        self.entries.get(&(q, r))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &TableEntry)> {
        self.entries.iter()
    }

    /// Table 1 rows.
    pub fn exact_values(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.entries.iter().filter_map(|(&(q, r), e)| match *e {
            TableEntry::Exact(v) => Some((q, r, v)),
            _ => None,
        })
    }

    /// Underlined rows as `(q, r, lower)`.
    pub fn griesmer_entries(&self) -> Vec<(u32, u32, u64)> {
        self.entries
            .iter()
            .filter_map(|(&(q, r), e)| match *e {
                TableEntry::Bounds {
                    lower,
                    is_griesmer: true,
                    ..
                } => Some((q, r, lower)),
                _ => None,
            })
            .collect()
    }
}

fn tsv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
}

fn numbers(fields: &[&str], want: usize, line: usize) -> Result<Vec<u64>, CorpusError> {
    if fields.len() != want {
        return Err(CorpusError::Syntax(format!(
            "line {line}: expected {want} columns"
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse()
                .map_err(|_| CorpusError::Syntax(format!("line {line}: bad number {f:?}")))
        })
        .collect()
}

macro_rules! bundled_arcs {
    ($($name:literal,)*) => {
        &[$(($name, include_str!(concat!("../corpus/arcs/", $name))),)*]
    };
}

const BUNDLED_ARCS: &[(&str, &str)] = bundled_arcs!(
    "q17_r11_n167.arc",
    "q19_r6_n87.arc",
    "q23_r16_n336.arc",
    "q23_r18_n387.arc",
    "q23_r8_n147.arc",
    "q25_r16_n366.arc",
    "q25_r17_n393.arc",
    "q25_r18_n416.arc",
    "q27_r17_n421.arc",
    "q27_r20_n510.arc",
    "q27_r21_n540.arc",
    "q27_r22_n561.arc",
    "q27_r23_n595.arc",
    "q29_r10_n234.arc",
    "q29_r11_n262.arc",
    "q29_r12_n300.arc",
    "q29_r19_n507.arc",
    "q29_r20_n534.arc",
    "q29_r21_n565.arc",
    "q29_r22_n595.arc",
    "q29_r23_n628.arc",
    "q29_r25_n695.arc",
    "q29_r3_n44.arc",
    "q29_r7_n148.arc",
    "q29_r9_n208.arc",
    "q31_r11_n282.arc",
    "q31_r13_n348.arc",
    "q31_r14_n378.arc",
    "q31_r20_n567.arc",
    "q31_r21_n597.arc",
    "q31_r22_n631.arc",
    "q31_r23_n663.arc",
    "q31_r24_n698.arc",
    "q31_r25_n733.arc",
    "q31_r26_n768.arc",
    "q31_r27_n805.arc",
);
const BUNDLED_VECTORS: &str = include_str!("../corpus/vectors.txt");
const BUNDLED_T1: &str = include_str!("../corpus/tables/t1.tsv");
const BUNDLED_T2: &str = include_str!("../corpus/tables/t2.tsv");
const BUNDLED_T3: &str = include_str!("../corpus/tables/t3.tsv");
const BUNDLED_SUMS: &str = include_str!("../corpus/SHA256SUMS");

/// An arc file as loaded; parse errors are kept for the report.
#[derive(Clone, Debug)]
pub struct CorpusArc {
    pub name: String,
    pub text: String,
    pub parsed: Result<ArcFile, CorpusError>,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub arcs: Vec<CorpusArc>,
    pub vectors: Vec<ResultVector>,
    pub tables: BoundsTable,
    /// Relative paths whose contents disagree with `SHA256SUMS`, or are missing.
    pub checksum_failures: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_sums(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| {
            let (hash, path) = l.split_once(char::is_whitespace)?;
            Some((
                path.trim().trim_start_matches('*').to_string(),
                hash.to_string(),
            ))
        })
        .collect()
}

impl Corpus {
    /// The data compiled into the library.
    pub fn bundled() -> Result<Self, CorpusError> {
        let mut files: Vec<(String, String)> = BUNDLED_ARCS
            .iter()
            .map(|(n, t)| (format!("arcs/{n}"), t.to_string()))
            .collect();
        files.push(("vectors.txt".into(), BUNDLED_VECTORS.into()));
        files.push(("tables/t1.tsv".into(), BUNDLED_T1.into()));
        files.push(("tables/t2.tsv".into(), BUNDLED_T2.into()));
        files.push(("tables/t3.tsv".into(), BUNDLED_T3.into()));
        Self::assemble(files, BUNDLED_SUMS)
    }

    /// Reads a directory with the bundled layout.
    pub fn from_dir(dir: &Path) -> Result<Self, CorpusError> {
        let read = |rel: &str| -> Result<String, CorpusError> {
            std::fs::read_to_string(dir.join(rel)).map_err(|e| CorpusError::Io {
                path: dir.join(rel).display().to_string(),
                msg: e.to_string(),
            })
        };
        let mut names: Vec<String> = std::fs::read_dir(dir.join("arcs"))
            .map_err(|e| CorpusError::Io {
                path: dir.join("arcs").display().to_string(),
                msg: e.to_string(),
            })?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".arc"))
            .collect();
        names.sort();
        let mut files = Vec::new();
        for n in names {
            let rel = format!("arcs/{n}");
            let text = read(&rel)?;
            files.push((rel, text));
        }
        for rel in [
            "vectors.txt",
            "tables/t1.tsv",
            "tables/t2.tsv",
            "tables/t3.tsv",
        ] {
            files.push((rel.to_string(), read(rel)?));
        }
        let sums = read("SHA256SUMS").unwrap_or_default();
        Self::assemble(files, &sums)
    }

    fn assemble(files: Vec<(String, String)>, sums: &str) -> Result<Self, CorpusError> {
        let expected: HashMap<String, String> = parse_sums(sums).into_iter().collect();
        let mut checksum_failures = Vec::new();
        let present: Vec<&String> = files.iter().map(|(p, _)| p).collect();
        for (path, text) in &files {
            match expected.get(path) {
                Some(h) if *h == sha256_hex(text.as_bytes()) => {}
                _ => checksum_failures.push(path.clone()),
            }
        }
        for path in expected.keys() {
            if !present.contains(&path) {
                checksum_failures.push(path.clone());
            }
        }
        checksum_failures.sort();

        let get = |rel: &str| {
            files
                .iter()
                .find(|(p, _)| p == rel)
                .map(|(_, t)| t.as_str())
                .unwrap_or("")
        };
        let vectors = get("vectors.txt")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(parse_result_vector)
            .collect::<Result<Vec<_>, _>>()?;
        let tables = BoundsTable::parse(
            get("tables/t1.tsv"),
            &[get("tables/t2.tsv"), get("tables/t3.tsv")],
        )?;
        let arcs = files
            .iter()
            .filter_map(|(p, t)| {
                let name = p
                    .strip_prefix("arcs/")?
                    .trim_end_matches(".arc")
                    .to_string();
                let parsed = ArcFile::parse(t, p).map_err(CorpusError::from);
                Some(CorpusArc {
                    name,
                    text: t.clone(),
                    parsed,
                })
            })
            .collect();
        Ok(Corpus {
            arcs,
            vectors,
            tables,
            checksum_failures,
        })
    }

    pub fn arc(&self, name: &str) -> Option<&CorpusArc> {
        self.arcs.iter().find(|a| a.name == name)
    }

    pub fn vector(&self, q: u32, r: u32, n: u64) -> Option<&ResultVector> {
        self.vectors.iter().find(|v| v.key() == (q, r, n))
    }
}

/// Checks applied to one bundled arc.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcCheck {
    pub name: String,
    pub q: u32,
    pub r: u32,
    pub n: u64,
    pub parsed: bool,
    /// File name agrees with the header, and the header count with the listing.
    pub count_ok: bool,
    pub achieved_r: Option<u32>,
    pub spectrum_ok: bool,
    pub blocking_ok: bool,
    /// Closure under the generator of the matching result vector.
    pub closure: Option<bool>,
    pub vector: Option<String>,
    pub meets_griesmer: bool,
    /// Table flag: underlined.
    pub griesmer_flag: Option<bool>,
    pub table_lower: Option<u64>,
    pub checksum_ok: bool,
    pub passed: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub arcs: Vec<ArcCheck>,
    pub passed: usize,
    pub total: usize,
    pub unmatched_vectors: Vec<String>,
    pub shared_generators: Vec<Vec<String>>,
    pub griesmer: Vec<(u32, u32, u64)>,
    /// Non-arc files failing their checksum.
    pub checksum_failures: Vec<String>,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total && self.checksum_failures.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in &self.arcs {
            let yn = |b: bool| if b { "yes" } else { "no" };
            let _ = write!(
                out,
                "{} {} n={} r={} achieved_r={} closure={} griesmer={}",
                if a.passed { "PASS" } else { "FAIL" },
                a.name,
                a.n,
                a.r,
                a.achieved_r.map_or("-".to_string(), |r| r.to_string()),
                a.closure.map_or("-", yn),
                yn(a.meets_griesmer),
            );
            if let Some(v) = &a.vector {
                let _ = write!(out, " vector={v}");
            }
            out.push('\n');
            for note in &a.notes {
                let _ = writeln!(out, "  note: {note}");
            }
        }
        for v in &self.unmatched_vectors {
            let _ = writeln!(out, "unmatched vector: {v} has no arc listing");
        }
        for group in &self.shared_generators {
            let _ = writeln!(out, "shared generator: {}", group.join(" "));
        }
        for f in &self.checksum_failures {
            let _ = writeln!(out, "checksum mismatch: {f}");
        }
        let g: Vec<String> = self
            .griesmer
            .iter()
            .map(|(q, r, n)| format!("({q},{r},{n})"))
            .collect();
        let _ = writeln!(out, "griesmer: {}", g.join(" "));
        let _ = writeln!(out, "{}/{} passed", self.passed, self.total);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Verifies every bundled arc; `jobs` bounds the worker count (0 = rayon default).
pub fn verify_corpus(corpus: &Corpus, jobs: usize) -> CorpusReport {
    let mut planes: HashMap<u32, Arc<PlaneIndex>> = HashMap::new();
    for a in &corpus.arcs {
        if let Ok(f) = &a.parsed {
            planes
                .entry(f.arc.q())
                .or_insert_with(|| Arc::new(PlaneIndex::new(&f.arc.spec)));
        }
    }
    let check_one = |a: &CorpusArc| check_arc(corpus, &planes, a);
    let arcs: Vec<ArcCheck> = if jobs == 1 {
        corpus.arcs.iter().map(check_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| corpus.arcs.par_iter().map(check_one).collect())
    };

    let keys: Vec<(u32, u32, u64)> = arcs
        .iter()
        .filter(|a| a.parsed)
        .map(|a| (a.q, a.r, a.n))
        .collect();
    let unmatched_vectors = corpus
        .vectors
        .iter()
        .filter(|v| !keys.contains(&v.key()))
        .map(|v| v.to_string())
        .collect();
    let mut by_gen: BTreeMap<(u32, [u32; 9]), Vec<String>> = BTreeMap::new();
    for v in &corpus.vectors {
        by_gen
            .entry((v.q, v.generator))
            .or_default()
            .push(format!("({},{},{})", v.q, v.r, v.n));
    }
    let shared_generators = by_gen.into_values().filter(|g| g.len() > 1).collect();
    let mut griesmer: Vec<(u32, u32, u64)> = arcs
        .iter()
        .filter(|a| a.meets_griesmer)
        .map(|a| (a.q, a.r, a.n))
        .collect();
    griesmer.sort();
    let checksum_failures = corpus
        .checksum_failures
        .iter()
        .filter(|p| !p.starts_with("arcs/"))
        .cloned()
        .collect();
    CorpusReport {
        passed: arcs.iter().filter(|a| a.passed).count(),
        total: arcs.len(),
        arcs,
        unmatched_vectors,
        shared_generators,
        griesmer,
        checksum_failures,
    }
}

fn name_key(name: &str) -> Option<(u32, u32, u64)> {
    let rest = name.strip_prefix('q')?;
    let (q, rest) = rest.split_once("_r")?;
    let (r, n) = rest.split_once("_n")?;
    Some((q.parse().ok()?, r.parse().ok()?, n.parse().ok()?))
}

fn check_arc(corpus: &Corpus, planes: &HashMap<u32, Arc<PlaneIndex>>, a: &CorpusArc) -> ArcCheck {
    let checksum_ok = !corpus
        .checksum_failures
        .contains(&format!("arcs/{}.arc", a.name));
    let (q, r, n) = name_key(&a.name).unwrap_or((0, 0, 0));
    let mut check = ArcCheck {
        name: a.name.clone(),
        q,
        r,
        n,
        parsed: false,
        count_ok: false,
        achieved_r: None,
        spectrum_ok: false,
        blocking_ok: false,
        closure: None,
        vector: None,
        meets_griesmer: false,
        griesmer_flag: None,
        table_lower: None,
        checksum_ok,
        passed: false,
        notes: Vec::new(),
    };
    if !checksum_ok {
        check.notes.push("checksum mismatch".into());
    }
    let file = match &a.parsed {
        Ok(f) => f,
        Err(e) => {
            check.notes.push(format!("parse error: {e}"));
            return check;
        }
    };
    check.parsed = true;
    let arc = &file.arc;
    check.count_ok = (arc.q(), arc.claimed_r, arc.n() as u64) == (q, r, n);
    if !check.count_ok {
        check.notes.push(format!(
            "file name does not match header q={} r={} n={}",
            arc.q(),
            arc.claimed_r,
            arc.n()
        ));
    }
    let plane = &planes[&arc.q()];
    let qq = plane.q() as u64;
    if let Ok(spec) = spectrum(plane, arc) {
        check.achieved_r = Some(spec.max_intersection);
        check.spectrum_ok = spec.total_lines() == qq * qq + qq + 1
            && spec.incidences() == arc.n() as u64 * (qq + 1);
    }
    if let Ok(b) = blocking_complement(plane, arc) {
        check.blocking_ok = b.holds();
    }
    let achieved = check.achieved_r.unwrap_or(0);
    if achieved != r {
        check
            .notes
            .push(format!("achieved r is {achieved}, claimed {r}"));
    }
    check.meets_griesmer = meets_griesmer(arc.q(), arc.n(), achieved);

    if let Some(v) = corpus.vector(q, r, n) {
        check.vector = Some(v.to_string());
        check.closure = Some(match v.generator_matrix(&arc.spec) {
            Ok(g) => {
                if file.generator.is_some_and(|fg| fg != g) {
                    check
                        .notes
                        .push("file generator differs from the result vector".into());
                }
                compute_orbits(plane, &g)
                    .ok()
                    .and_then(|sys| is_orbit_union(&sys, arc).ok())
                    .unwrap_or(false)
            }
            Err(_) => false,
        });
        if check.closure == Some(false) {
            check.notes.push("not closed under the generator".into());
        }
    } else {
        check.notes.push("no matching result vector".into());
    }

    let mut table_ok = true;
    if let Some(e) = corpus.tables.get(q, r) {
        check.table_lower = Some(e.lower());
        if let TableEntry::Bounds {
            is_new,
            is_griesmer,
            upper,
            ..
        } = *e
        {
            check.griesmer_flag = Some(is_griesmer);
            if is_griesmer && !check.meets_griesmer {
                table_ok = false;
                check
                    .notes
                    .push("underlined in the table but misses the Griesmer bound".into());
            }
            if !is_griesmer && check.meets_griesmer {
                check
                    .notes
                    .push("meets the Griesmer bound but is not underlined in the table".into());
            }
            if is_new && n != e.lower() {
                table_ok = false;
                check
                    .notes
                    .push(format!("bold table entry is {}, arc has {n}", e.lower()));
            }
            if n > upper {
                table_ok = false;
                check
                    .notes
                    .push(format!("n exceeds the table upper bound {upper}"));
            }
        }
    }
    check.passed = checksum_ok
        && check.count_ok
        && achieved == r
        && check.spectrum_ok
        && check.blocking_ok
        && check.closure == Some(true)
        && table_ok;
    check
}
