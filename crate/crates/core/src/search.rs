//! Random search over cyclic groups `<A>`: sample invertible generators,
//! solve the orbit packing model for each `r`, and log result vectors.
//!
//! The generator is SplitMix64 (`rand_xoshiro::SplitMix64`, seeded with
//! `seed_from_u64(seed)`). Matrix entries are drawn one at a time in row
//! order: a 64-bit output `x` is rejected while `x >= floor(2^64 / q) * q`,
//! and the entry code is `x mod q`. Singular matrices are rejected whole.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arcs::{arc_from_selection, verify_arc, ArcFile, ArcRecord};
use crate::corpus::{BoundsTable, ResultVector};
use crate::field::{FieldElement, FieldSpec};
use crate::ilp::{model_from_incidence, solve, SolveStatus, SolverConfig};
use crate::orbits::{build_incidence, compute_orbits, mat_is_invertible, GeneratorMatrix};
use crate::plane::PlaneIndex;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("r={r} is outside 2..={q}")]
    BadR { r: u32, q: u32 },
    #[error("no r values given")]
    NoR,
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Uniform element code in `0..q`.
fn uniform_code(rng: &mut SplitMix64, q: u32) -> u32 {
    let q = q as u64;
    let zone = (u64::MAX / q) * q;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % q) as u32;
        }
    }
}

/// Nine uniform entries in row order; possibly singular.
pub fn random_matrix(spec: &FieldSpec, rng: &mut SplitMix64) -> GeneratorMatrix {
    let mut entries = [[FieldElement::ZERO; 3]; 3];
    for row in entries.iter_mut() {
        for e in row.iter_mut() {
            *e = spec
                .elem(uniform_code(rng, spec.q()))
                .expect("code below q");
        }
    }
    GeneratorMatrix { entries }
}

/// Uniform over `GL(3,q)`: uniform entries, singular draws rejected.
pub fn random_invertible(spec: &FieldSpec, rng: &mut SplitMix64) -> GeneratorMatrix {
    loop {
        let m = random_matrix(spec, rng);
        if mat_is_invertible(spec, &m) {
            return m;
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchJob {
    pub spec: FieldSpec,
    pub r_values: Vec<u32>,
    pub seed: u64,
    /// Applied to every (candidate, r) solve.
    pub solver: SolverConfig,
    /// Tried before the random candidates, in order.
    pub explicit: Vec<GeneratorMatrix>,
    pub random_candidates: usize,
    /// No new candidate starts once this much time has passed.
    pub wall_budget: Option<Duration>,
    /// Worker count; 1 runs candidates in order on the calling thread.
    pub jobs: usize,
    /// Write 0 for the time field of log lines so logs are reproducible.
    pub deterministic: bool,
    pub known: Option<BoundsTable>,
}

impl SearchJob {
    pub fn new(spec: FieldSpec, r_values: Vec<u32>, seed: u64) -> Self {
        SearchJob {
            spec,
            r_values,
            seed,
            solver: SolverConfig::default(),
            explicit: Vec::new(),
            random_candidates: 0,
            wall_budget: None,
            jobs: 1,
            deterministic: true,
            known: None,
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.r_values.is_empty() {
            return Err(SearchError::NoR);
        }
        let q = self.spec.q();
        match self.r_values.iter().find(|&&r| r < 2 || r > q) {
            Some(&r) => Err(SearchError::BadR { r, q }),
            None => Ok(()),
        }
    }

    /// Explicit candidates followed by the seeded random ones.
    pub fn candidates(&self) -> Vec<GeneratorMatrix> {
        let mut rng = SplitMix64::seed_from_u64(self.seed);
        let mut out = self.explicit.clone();
        out.extend((0..self.random_candidates).map(|_| random_invertible(&self.spec, &mut rng)));
        out
    }
}

/// One (candidate, r) solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateResult {
    pub index: usize,
    pub generator: String,
    pub r: u32,
    pub orbits: usize,
    pub group_order: u64,
    pub n: u64,
    pub achieved_r: u32,
    pub status: Option<SolveStatus>,
    pub elapsed_ms: u64,
    pub vector: ResultVector,
    /// Why the candidate was not solved.
    pub skipped: Option<String>,
    pub exceeds_known: bool,
    pub exceeds_upper: bool,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub results: Vec<CandidateResult>,
    /// Best arc per r with its generator; ties go to the lower candidate index.
    pub best: BTreeMap<u32, (ResultVector, ArcFile)>,
    pub elapsed: Duration,
}

struct Solved {
    result: CandidateResult,
    arc: Option<ArcRecord>,
    generator: GeneratorMatrix,
}

fn run_candidate(
    job: &SearchJob,
    plane: &Arc<PlaneIndex>,
    index: usize,
    g: GeneratorMatrix,
) -> Vec<Solved> {
    let spec = &job.spec;
    let q = spec.q();
    let base = |r: u32| CandidateResult {
        index,
        generator: g.to_string(),
        r,
        orbits: 0,
        group_order: 0,
        n: 0,
        achieved_r: 0,
        status: None,
        elapsed_ms: 0,
        vector: ResultVector {
            q,
            r,
            n: 0,
            generator: g.codes(),
            time_seconds: 0,
        },
        skipped: None,
        exceeds_known: false,
        exceeds_upper: false,
    };
    let sys = match compute_orbits(plane, &g) {
        Ok(s) => s,
        Err(e) => {
            return job
                .r_values
                .iter()
                .map(|&r| Solved {
                    result: CandidateResult {
                        skipped: Some(e.to_string()),
                        ..base(r)
                    },
                    arc: None,
                    generator: g,
                })
                .collect();
        }
    };
    let inc = build_incidence(&sys);
    let mut out = Vec::new();
    for &r in &job.r_values {
        let mut res = base(r);
        res.orbits = sys.point_orbits().len();
        res.group_order = sys.group_order();
        let model = match model_from_incidence(&inc, r) {
            Ok(m) => m,
            Err(e) => {
                res.skipped = Some(e.to_string());
                out.push(Solved {
                    result: res,
                    arc: None,
                    generator: g,
                });
                continue;
            }
        };
        if model.forced_zero().iter().all(|&z| z) {
            res.skipped = Some("every orbit alone exceeds r on some line".into());
            out.push(Solved {
                result: res,
                arc: None,
                generator: g,
            });
            continue;
        }
        let started = Instant::now();
        let sol = solve(&model, &job.solver);
        let elapsed = started.elapsed();
        res.status = Some(sol.status);
        res.elapsed_ms = elapsed.as_millis() as u64;
        res.n = sol.objective;
        res.vector.n = sol.objective;
        res.vector.time_seconds = if job.deterministic {
            0
        } else {
            elapsed.as_secs()
        };
        let arc = if sol.objective > 0 {
            let arc = arc_from_selection(
                &sys,
                &sol.selection,
                r,
                format!("search seed={} candidate={index}", job.seed),
            )
            .expect("nonempty selection");
            let verdict = verify_arc(plane, &arc).expect("points of this plane");
            assert!(
                verdict.achieved_r <= r && verdict.n as u64 == sol.objective,
                "solver returned an invalid arc for candidate {index}, r={r}"
            );
            res.achieved_r = verdict.achieved_r;
            Some(arc)
        } else {
            None
        };
        if let Some(entry) = job.known.as_ref().and_then(|t| t.get(q, r)) {
            res.exceeds_known = res.n > entry.lower();
            res.exceeds_upper = res.n > entry.upper();
        }
        let points = q as u64 * q as u64 + q as u64 + 1;
        res.exceeds_upper |= res.n > points;
        out.push(Solved {
            result: res,
            arc,
            generator: g,
        });
    }
    out
}

pub fn run_search(job: &SearchJob) -> Result<SearchOutcome, SearchError> {
    job.validate()?;
    let start = Instant::now();
    let plane = Arc::new(PlaneIndex::new(&job.spec));
    let candidates = job.candidates();
    let over = || job.wall_budget.is_some_and(|b| start.elapsed() >= b);
    let per_candidate = |(i, g): (usize, &GeneratorMatrix)| {
        if over() {
            None
        } else {
            Some(run_candidate(job, &plane, i, *g))
        }
    };
    let solved: Vec<Option<Vec<Solved>>> = if job.jobs <= 1 {
        candidates.iter().enumerate().map(per_candidate).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(job.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            candidates
                .par_iter()
                .enumerate()
                .map(per_candidate)
                .collect()
        })
    };

    let mut results = Vec::new();
    let mut best: BTreeMap<u32, (ResultVector, ArcFile)> = BTreeMap::new();
    for s in solved.into_iter().flatten().flatten() {
        if let Some(arc) = s.arc {
            let better = best.get(&s.result.r).is_none_or(|(v, _)| s.result.n > v.n);
            if better {
                best.insert(
                    s.result.r,
                    (
                        s.result.vector,
                        ArcFile {
                            arc,
                            generator: Some(s.generator),
                        },
                    ),
                );
            }
        }
        results.push(s.result);
    }
    Ok(SearchOutcome {
        results,
        best,
        elapsed: start.elapsed(),
    })
}

impl SearchOutcome {
    /// Result vectors in candidate order; skips and bound events as `#` lines.
    pub fn log(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            if let Some(why) = &r.skipped {
                let _ = writeln!(out, "# candidate {} r={} skipped: {}", r.index, r.r, why);
                continue;
            }
            let _ = writeln!(out, "{}", r.vector);
            if r.exceeds_upper {
                let _ = writeln!(
                    out,
                    "# ERROR candidate {} r={}: n={} exceeds the known upper bound",
                    r.index, r.r, r.n
                );
            } else if r.exceeds_known {
                let _ = writeln!(
                    out,
                    "# candidate {} r={}: n={} exceeds the known lower bound",
                    r.index, r.r, r.n
                );
            }
        }
        out
    }

    pub fn upper_bound_violations(&self) -> usize {
        self.results.iter().filter(|r| r.exceeds_upper).count()
    }

    pub fn manifest(&self, job: &SearchJob) -> SearchManifest {
        SearchManifest {
            field: job.spec.to_string(),
            r_values: job.r_values.clone(),
            seed: job.seed,
            prng: "SplitMix64, entries by rejection sampling, row order".into(),
            explicit_candidates: job.explicit.iter().map(|g| g.to_string()).collect(),
            random_candidates: job.random_candidates,
            jobs: job.jobs,
            deterministic: job.deterministic,
            solver_time_budget_ms: job.solver.time_budget.map(|d| d.as_millis() as u64),
            solver_node_budget: job.solver.node_budget,
            solver_local_search_rounds: job.solver.local_search_rounds,
            wall_budget_ms: job.wall_budget.map(|d| d.as_millis() as u64),
            elapsed_ms: self.elapsed.as_millis() as u64,
            results: self.results.clone(),
        }
    }

    /// Writes `log.txt`, `manifest.json` and one arc file per r into `dir`.
    pub fn write_to(&self, job: &SearchJob, dir: &Path) -> Result<(), SearchError> {
        let io = |p: &Path, e: std::io::Error| SearchError::Io {
            path: p.display().to_string(),
            msg: e.to_string(),
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let log = dir.join("log.txt");
        std::fs::write(&log, self.log()).map_err(|e| io(&log, e))?;
        let manifest = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self.manifest(job)).expect("manifest serializes");
        std::fs::write(&manifest, json).map_err(|e| io(&manifest, e))?;
        for (v, file) in self.best.values() {
            let p = dir.join(format!("q{}_r{}_n{}.arc", v.q, v.r, v.n));
            std::fs::write(&p, file.to_text()).map_err(|e| io(&p, e))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchManifest {
    pub field: String,
    pub r_values: Vec<u32>,
    pub seed: u64,
    pub prng: String,
    pub explicit_candidates: Vec<String>,
    pub random_candidates: usize,
    pub jobs: usize,
    pub deterministic: bool,
    pub solver_time_budget_ms: Option<u64>,
    pub solver_node_budget: Option<u64>,
    pub solver_local_search_rounds: u64,
    pub wall_budget_ms: Option<u64>,
    pub elapsed_ms: u64,
    pub results: Vec<CandidateResult>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_reproducible_and_invertible() {
        let f = FieldSpec::prime(5).unwrap();
        let draw = |seed| {
            let mut rng = SplitMix64::seed_from_u64(seed);
            (0..20)
                .map(|_| random_invertible(&f, &mut rng))
                .collect::<Vec<_>>()
        };
        let a = draw(7);
        assert_eq!(a, draw(7));
        assert_ne!(a, draw(8));
        assert!(a.iter().all(|m| mat_is_invertible(&f, m)));
    }

    #[test]
    fn uniform_codes_cover_the_field() {
        let mut rng = SplitMix64::seed_from_u64(1);
        let mut seen = [0u32; 7];
        for _ in 0..7000 {
            seen[uniform_code(&mut rng, 7) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| (800..1200).contains(&c)));
    }

    #[test]
    fn trivial_group_q3() {
        let mut job = SearchJob::new(FieldSpec::prime(3).unwrap(), vec![2], 1);
        job.explicit.push(GeneratorMatrix::identity());
        job.random_candidates = 2;
        let out = run_search(&job).unwrap();
        assert_eq!(out.results[0].n, 4);
        assert_eq!(out.best[&2].0.n, 4);
        assert!(out.log().starts_with("(3,2,4;1,0,0,0,1,0,0,0,1;0)\n"));
        assert_eq!(out.log(), run_search(&job).unwrap().log());
    }

    #[test]
    fn bad_r() {
        let job = SearchJob::new(FieldSpec::prime(3).unwrap(), vec![4], 1);
        assert!(matches!(
            run_search(&job),
            Err(SearchError::BadR { r: 4, q: 3 })
        ));
        let job = SearchJob::new(FieldSpec::prime(3).unwrap(), vec![], 1);
        assert!(matches!(run_search(&job), Err(SearchError::NoR)));
    }
}
