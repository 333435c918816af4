//! `pgarcs`: verify, construct and search for (n,r)-arcs in PG(2,q).
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad usage or unreadable input.
//! With `--json`, a one-line JSON summary is printed after the normal output.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use arcs_core::arcs::{
    blocking_complement, griesmer_sum, is_orbit_union, meets_griesmer, spectrum, verify_arc,
    ArcFile,
};
use arcs_core::corpus::{verify_corpus, Corpus};
use arcs_core::ilp::{export_lp, model_from_incidence, solve, PackingModel, SolverConfig};
use arcs_core::orbits::{
    build_incidence, compute_orbits_with, ActionSide, GeneratorMatrix, OrbitSystem,
};
use arcs_core::search::{run_search, SearchJob};
use arcs_core::{FieldSpec, PlaneIndex};

#[derive(Parser)]
#[command(
    name = "pgarcs",
    version,
    about = "Arcs in PG(2,q) with prescribed cyclic automorphism groups"
)]
struct Cli {
    /// Print a one-line JSON summary after the text output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an arc file: size, line spectrum, Griesmer equality, orbit closure.
    Verify {
        #[arg(long)]
        arc: PathBuf,
    },
    /// Verify the bundled corpus (or a directory with the same layout).
    CorpusCheck {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Print the point and line orbits of a generator.
    Orbits {
        #[command(flatten)]
        group: GroupArgs,
        /// List the points of every orbit.
        #[arg(long)]
        list: bool,
    },
    /// Build and solve the orbit packing model.
    Solve {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        r: u32,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        lp_out: Option<PathBuf>,
        #[arg(long)]
        arc_out: Option<PathBuf>,
    },
    /// Random search over generators.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        /// r values: a list "3,5,7" or a range "3..7".
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random candidates to draw.
        #[arg(long, default_value_t = 10)]
        candidates: usize,
        /// Extra generators tried first ("identity" or 9 codes); repeatable.
        #[arg(long = "gen")]
        gens: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Stop starting candidates after this many seconds.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Log measured times instead of 0.
        #[arg(long)]
        timed: bool,
        /// Directory for log.txt, manifest.json and the best arcs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the packing model in CPLEX LP format.
    ExportLp {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Griesmer sum for a [n,3,n-r]_q code.
    Griesmer {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u64,
    },
    /// Library version and bundled data summary.
    Info,
}

#[derive(Args)]
struct FieldArgs {
    /// Field order or descriptor: "29", "3^3", "2^3 mod=1,1,0,1".
    #[arg(long)]
    q: String,
    /// Modulus coefficients c0,...,ce (low degree first).
    #[arg(long = "mod")]
    modulus: Option<String>,
}

impl FieldArgs {
    fn spec(&self) -> Result<FieldSpec> {
        let desc = match &self.modulus {
            Some(m) => format!("{} mod={m}", self.q),
            None => self.q.clone(),
        };
        desc.parse().with_context(|| format!("bad field {desc:?}"))
    }
}

#[derive(Args)]
struct GroupArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// "identity" or 9 comma-separated element codes a11..a33.
    #[arg(long = "gen", default_value = "identity")]
    generator: String,
    /// Action side: "column" (p -> A p) or "row" (p -> p A).
    #[arg(long, default_value = "column")]
    side: String,
}

fn parse_gen(spec: &FieldSpec, text: &str) -> Result<GeneratorMatrix> {
    if text == "identity" {
        return Ok(GeneratorMatrix::identity());
    }
    GeneratorMatrix::parse(spec, text).with_context(|| format!("bad generator {text:?}"))
}

impl GroupArgs {
    fn system(&self) -> Result<(FieldSpec, GeneratorMatrix, OrbitSystem)> {
        let spec = self.field.spec()?;
        let g = parse_gen(&spec, &self.generator)?;
        let side: ActionSide = self
            .side
            .parse()
            .map_err(|e| anyhow::anyhow!("bad --side: {e}"))?;
        let plane = Arc::new(PlaneIndex::new(&spec));
        let sys = compute_orbits_with(&plane, &g, side)?;
        Ok((spec, g, sys))
    }

    fn model(&self, r: u32) -> Result<(FieldSpec, GeneratorMatrix, OrbitSystem, PackingModel)> {
        let (spec, g, sys) = self.system()?;
        let model = model_from_incidence(&build_incidence(&sys), r)?;
        Ok((spec, g, sys, model))
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Time budget in seconds.
    #[arg(long)]
    time: Option<u64>,
    #[arg(long)]
    nodes: Option<u64>,
    /// Known achievable objective, used for pruning.
    #[arg(long)]
    hint: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed of the local-search warm start.
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
    #[arg(long)]
    local_search_rounds: Option<u64>,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig {
            time_budget: self.time.map(Duration::from_secs),
            node_budget: self.nodes,
            initial_incumbent: self.hint,
            deterministic: self.threads <= 1,
            threads: self.threads.max(1),
            seed: self.solver_seed,
            ..SolverConfig::default()
        };
        if let Some(r) = self.local_search_rounds {
            cfg.local_search_rounds = r;
        }
        cfg
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Either a finished command (exit 0 or 1) with its JSON summary, or an error (exit 2).
struct Outcome {
    ok: bool,
    summary: Value,
}

fn cmd_verify(arc: PathBuf) -> Result<Outcome> {
    let text =
        std::fs::read_to_string(&arc).with_context(|| format!("cannot read {}", arc.display()))?;
    let file = ArcFile::parse(&text, &arc.display().to_string())?;
    let plane = Arc::new(PlaneIndex::new(&file.arc.spec));
    let verdict = verify_arc(&plane, &file.arc)?;
    let spec = spectrum(&plane, &file.arc)?;
    let griesmer = meets_griesmer(file.arc.q(), verdict.n, verdict.achieved_r);
    let blocking = blocking_complement(&plane, &file.arc)?;
    println!(
        "n={} r={} griesmer={}",
        verdict.n,
        verdict.achieved_r,
        yes(griesmer)
    );
    let counts: Vec<String> = spec
        .counts
        .iter()
        .map(|(i, c)| format!("{i}:{c}"))
        .collect();
    println!("spectrum {}", counts.join(" "));
    println!(
        "claimed r={} {}",
        file.arc.claimed_r,
        if verdict.is_valid_for_claim {
            "valid"
        } else {
            "INVALID"
        }
    );
    println!(
        "blocking set size={} t={} holds={}",
        blocking.size,
        blocking.t,
        yes(blocking.holds())
    );
    let closure = match file.generator {
        Some(g) => {
            let sys = compute_orbits_with(&plane, &g, ActionSide::default())?;
            let closed = is_orbit_union(&sys, &file.arc)?;
            println!("closure={} generator={g}", yes(closed));
            Some(closed)
        }
        None => None,
    };
    let ok = verdict.is_valid_for_claim && closure != Some(false);
    Ok(Outcome {
        ok,
        summary: json!({
            "command": "verify",
            "n": verdict.n,
            "claimed_r": file.arc.claimed_r,
            "achieved_r": verdict.achieved_r,
            "valid": verdict.is_valid_for_claim,
            "griesmer": griesmer,
            "closure": closure,
            "spectrum": spec.counts,
        }),
    })
}

fn cmd_corpus_check(
    dir: Option<PathBuf>,
    jobs: usize,
    summary: Option<PathBuf>,
) -> Result<Outcome> {
    let corpus = match &dir {
        Some(d) => Corpus::from_dir(d)?,
        None => Corpus::bundled()?,
    };
    let report = verify_corpus(&corpus, jobs);
    print!("{}", report.to_text());
    if let Some(p) = summary {
        std::fs::write(&p, report.to_json())
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(Outcome {
        ok: report.all_passed(),
        summary: json!({
            "command": "corpus-check",
            "passed": report.passed,
            "total": report.total,
            "checksum_failures": report.checksum_failures,
            "unmatched_vectors": report.unmatched_vectors,
        }),
    })
}

fn cmd_orbits(group: GroupArgs, list: bool) -> Result<Outcome> {
    let (spec, g, sys) = group.system()?;
    let mut sizes = std::collections::BTreeMap::new();
    for o in sys.point_orbits() {
        *sizes.entry(o.len()).or_insert(0usize) += 1;
    }
    let hist: Vec<String> = sizes.iter().map(|(s, c)| format!("{c}x{s}")).collect();
    println!(
        "field {spec} generator {g} group order {}",
        sys.group_order()
    );
    println!(
        "point orbits {} ({})",
        sys.point_orbits().len(),
        hist.join(" ")
    );
    println!("line orbits {}", sys.line_orbits().len());
    if list {
        for (k, o) in sys.point_orbits().iter().enumerate() {
            let pts: Vec<String> = o
                .iter()
                .map(|&i| sys.plane().point(i as usize).to_string())
                .collect();
            println!("orbit {k}: {}", pts.join(" "));
        }
    }
    Ok(Outcome {
        ok: true,
        summary: json!({
            "command": "orbits",
            "group_order": sys.group_order(),
            "point_orbits": sys.point_orbits().len(),
            "line_orbits": sys.line_orbits().len(),
        }),
    })
}

fn cmd_solve(
    group: GroupArgs,
    r: u32,
    solver: SolverArgs,
    lp_out: Option<PathBuf>,
    arc_out: Option<PathBuf>,
) -> Result<Outcome> {
    let (spec, g, sys, model) = group.model(r)?;
    if let Some(p) = &lp_out {
        export_lp(&model, p).with_context(|| format!("cannot write {}", p.display()))?;
    }
    let sol = solve(&model, &solver.config());
    println!(
        "orbits={} group_order={}",
        model.num_cols(),
        model.group_order
    );
    println!(
        "objective={} status={:?} nodes={}",
        sol.objective, sol.status, sol.nodes_explored
    );
    let codes: Vec<String> = g.codes().iter().map(|c| c.to_string()).collect();
    println!(
        "({},{},{};{};{})",
        spec.q(),
        r,
        sol.objective,
        codes.join(","),
        sol.elapsed.as_secs()
    );
    if let (Some(p), true) = (&arc_out, sol.objective > 0) {
        let arc = arcs_core::arcs::arc_from_selection(&sys, &sol.selection, r, "pgarcs solve")?;
        let file = ArcFile {
            arc,
            generator: Some(g),
        };
        std::fs::write(p, file.to_text())
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(Outcome {
        ok: true,
        summary: json!({
            "command": "solve",
            "objective": sol.objective,
            "status": format!("{:?}", sol.status),
            "nodes": sol.nodes_explored,
            "elapsed_ms": sol.elapsed.as_millis() as u64,
        }),
    })
}

fn parse_r_values(text: &str) -> Result<Vec<u32>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().context("bad --r range")?;
        let b: u32 = b.trim().parse().context("bad --r range")?;
        if a > b {
            bail!("empty --r range {text:?}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .with_context(|| format!("bad r value {s:?}"))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    field: FieldArgs,
    r: String,
    seed: u64,
    candidates: usize,
    gens: Vec<String>,
    solver: SolverArgs,
    budget: Option<u64>,
    jobs: usize,
    timed: bool,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let spec = field.spec()?;
    let mut job = SearchJob::new(spec.clone(), parse_r_values(&r)?, seed);
    job.explicit = gens
        .iter()
        .map(|g| parse_gen(&spec, g))
        .collect::<Result<_>>()?;
    job.random_candidates = candidates;
    job.solver = solver.config();
    job.solver.deterministic = true;
    job.solver.threads = 1;
    job.wall_budget = budget.map(Duration::from_secs);
    job.jobs = jobs.max(1);
    job.deterministic = !timed;
    job.known = Corpus::bundled().ok().map(|c| c.tables);
    let outcome = run_search(&job)?;
    print!("{}", outcome.log());
    for (r, (v, _)) in &outcome.best {
        println!("best r={r}: {v}");
    }
    if let Some(dir) = &out {
        outcome.write_to(&job, dir)?;
    }
    let violations = outcome.upper_bound_violations();
    Ok(Outcome {
        ok: violations == 0,
        summary: json!({
            "command": "search",
            "seed": seed,
            "results": outcome.results.len(),
            "best": outcome.best.iter().map(|(r, (v, _))| (r.to_string(), v.n)).collect::<std::collections::BTreeMap<_, _>>(),
            "upper_bound_violations": violations,
        }),
    })
}

fn cmd_export_lp(group: GroupArgs, r: u32, out: PathBuf) -> Result<Outcome> {
    let (_, _, _, model) = group.model(r)?;
    export_lp(&model, &out).with_context(|| format!("cannot write {}", out.display()))?;
    println!(
        "wrote {} ({} columns, {} rows)",
        out.display(),
        model.num_cols(),
        model.num_rows()
    );
    Ok(Outcome {
        ok: true,
        summary: json!({"command": "export-lp", "columns": model.num_cols(), "rows": model.num_rows()}),
    })
}

fn cmd_griesmer(q: u64, n: u64, r: u64) -> Result<Outcome> {
    if r >= n {
        bail!("need r < n");
    }
    let sum = griesmer_sum(3, n - r, q)?;
    println!(
        "griesmer_sum(3,{},{})={} n={} meets={}",
        n - r,
        q,
        sum,
        n,
        yes(sum == n)
    );
    Ok(Outcome {
        ok: true,
        summary: json!({"command": "griesmer", "sum": sum, "meets": sum == n}),
    })
}

fn cmd_info() -> Result<Outcome> {
    let corpus = Corpus::bundled()?;
    println!("pgarcs {}", env!("CARGO_PKG_VERSION"));
    println!("bundled arcs: {}", corpus.arcs.len());
    println!("bundled result vectors: {}", corpus.vectors.len());
    println!("table rows: {}", corpus.tables.iter().count());
    println!("default moduli: 2^4 x^4+x^3+1, 5^2 x^2+x+2, 3^3 x^3+2x+1");
    println!("action: column (p -> A p)");
    Ok(Outcome {
        ok: true,
        summary: json!({
            "command": "info",
            "version": env!("CARGO_PKG_VERSION"),
            "arcs": corpus.arcs.len(),
            "vectors": corpus.vectors.len(),
        }),
    })
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Verify { arc } => cmd_verify(arc),
        Command::CorpusCheck { dir, jobs, summary } => cmd_corpus_check(dir, jobs, summary),
        Command::Orbits { group, list } => cmd_orbits(group, list),
        Command::Solve {
            group,
            r,
            solver,
            lp_out,
            arc_out,
        } => cmd_solve(group, r, solver, lp_out, arc_out),
        Command::Search {
            field,
            r,
            seed,
            candidates,
            gens,
            solver,
            budget,
            jobs,
            timed,
            out,
        } => cmd_search(
            field, r, seed, candidates, gens, solver, budget, jobs, timed, out,
        ),
        Command::ExportLp { group, r, out } => cmd_export_lp(group, r, out),
        Command::Griesmer { q, n, r } => cmd_griesmer(q, n, r),
        Command::Info => cmd_info(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.summary);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if cli.json {
                println!("{}", json!({"error": format!("{e:#}")}));
            }
            ExitCode::from(2)
        }
    }
}
