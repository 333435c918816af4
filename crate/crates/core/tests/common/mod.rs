//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use arcs_core::field::FieldSpec;
use arcs_core::ilp::PackingModel;
use rand::Rng;

/// Field orders covered by the axiom and plane suites.
pub const AXIOM_ORDERS: [u32; 17] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31];

/// A field of order `q`, with a fixed irreducible modulus where no default exists.
pub fn field(q: u32) -> FieldSpec {
    match q {
        4 => FieldSpec::new(2, 2, Some(vec![1, 1, 1])).unwrap(),
        8 => FieldSpec::new(2, 3, Some(vec![1, 1, 0, 1])).unwrap(),
        9 => FieldSpec::new(3, 2, Some(vec![1, 0, 1])).unwrap(),
        _ => FieldSpec::of_order(q).unwrap(),
    }
}

/// Schoolbook arithmetic on coefficient vectors, written independently of the
/// library: elements are integers `sum a_i p^i`, reduced by the given modulus.
pub struct NaiveField {
    pub p: u32,
    pub e: u32,
    /// monic, low degree first, length e+1
    pub modulus: Vec<u32>,
}

impl NaiveField {
    pub fn of(spec: &FieldSpec) -> Self {
        NaiveField {
            p: spec.p(),
            e: spec.e(),
            modulus: spec.modulus().to_vec(),
        }
    }

    pub fn q(&self) -> u32 {
        self.p.pow(self.e)
    }

    fn digits(&self, mut x: u32) -> Vec<u32> {
        (0..self.e)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    fn number(&self, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.digits(a), self.digits(b));
        let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.number(&s)
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let e = self.e as usize;
        let mut prod = vec![0u32; 2 * e - 1];
        for i in 0..e {
            for j in 0..e {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % self.p;
            }
        }
        // x^k = -(m_0 + ... + m_{e-1} x^{e-1}) x^{k-e}
        for k in (e..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..e {
                let sub = c * self.modulus[i] % self.p;
                prod[k - e + i] = (prod[k - e + i] + self.p - sub) % self.p;
            }
        }
        self.number(&prod[..e])
    }

    /// Inverse by exhaustive search.
    pub fn inv(&self, a: u32) -> Option<u32> {
        (1..self.q()).find(|&b| self.mul(a, b) == 1)
    }
}

/// Maximum of `w.x` over all feasible binary `x`, by enumeration.
pub fn brute_force(model: &PackingModel) -> u64 {
    let t = model.num_cols();
    assert!(t <= 24, "enumeration oracle limited to 24 columns");
    let mut cols: Vec<Vec<(usize, u32)>> = vec![Vec::new(); t];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, c) in row {
            cols[j].push((i, c));
        }
    }
    let mut best = 0;
    let mut load = vec![0u32; model.num_rows()];
    // Gray-code walk: one column flips per step.
    let mut sel = vec![false; t];
    let mut obj = 0u64;
    let mut over = 0usize;
    for step in 1u64..(1u64 << t) {
        let j = step.trailing_zeros() as usize;
        sel[j] = !sel[j];
        for &(i, c) in &cols[j] {
            let before = load[i] > model.rhs;
            if sel[j] {
                load[i] += c;
            } else {
                load[i] -= c;
            }
            let after = load[i] > model.rhs;
            if before && !after {
                over -= 1;
            } else if !before && after {
                over += 1;
            }
        }
        if sel[j] {
            obj += model.weights[j];
        } else {
            obj -= model.weights[j];
        }
        if over == 0 && obj > best {
            best = obj;
        }
    }
    best
}

/// A random packing model without certificates.
pub fn random_model(rng: &mut impl Rng, max_cols: usize) -> PackingModel {
    let t = rng.gen_range(1..=max_cols);
    let s = rng.gen_range(1..=max_cols + 4);
    let rhs = rng.gen_range(1..=5u32);
    let weights: Vec<u64> = (0..t).map(|_| rng.gen_range(1..=13u64)).collect();
    let density = rng.gen_range(0.1..0.6);
    let rows: Vec<Vec<(usize, u32)>> = (0..s)
        .map(|_| {
            let mut row = Vec::new();
            for j in 0..t {
                if rng.gen_bool(density) {
                    row.push((j, rng.gen_range(1..=4u32)));
                }
            }
            if row.is_empty() {
                row.push((rng.gen_range(0..t), 1));
            }
            row
        })
        .collect();
    PackingModel::new(7, 1, rhs, weights, rows).unwrap()
}

/// Parsed CPLEX LP text: objective weights and `<=` rows.
#[derive(Debug, PartialEq, Eq)]
pub struct LpText {
    pub objective: Vec<(usize, u64)>,
    pub rows: Vec<(Vec<(usize, u32)>, u32)>,
    pub binaries: Vec<usize>,
}

/// A small LP-format reader for the subset the exporter emits.
pub fn parse_lp(text: &str) -> LpText {
    #[derive(PartialEq)]
    enum Sec {
        None,
        Obj,
        Cons,
        Bin,
        End,
    }
    let mut sec = Sec::None;
    let mut objective = Vec::new();
    let mut rows = Vec::new();
    let mut binaries = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let terms = |toks: &[String]| -> Vec<(usize, u64)> {
        let toks: Vec<&String> = toks.iter().filter(|t| t.as_str() != "+").collect();
        toks.chunks(2)
            .map(|c| {
                let coef: u64 = c[0].parse().expect("coefficient");
                let var: usize = c[1]
                    .strip_prefix('x')
                    .expect("variable")
                    .parse()
                    .expect("index");
                (var, coef)
            })
            .collect()
    };
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('\\') || line.is_empty() {
            continue;
        }
        match line {
            "Maximize" => {
                sec = Sec::Obj;
                continue;
            }
            "Subject To" => {
                sec = Sec::Cons;
                continue;
            }
            "Binaries" => {
                sec = Sec::Bin;
                continue;
            }
            "End" => {
                sec = Sec::End;
                continue;
            }
            _ => {}
        }
        let mut toks: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if toks.first().is_some_and(|t| t.ends_with(':')) {
            toks.remove(0);
        }
        match sec {
            Sec::Obj => objective.extend(terms(&toks)),
            Sec::Cons => {
                pending.extend(toks);
                if let Some(pos) = pending.iter().position(|t| t == "<=") {
                    let rhs: u32 = pending[pos + 1].parse().expect("rhs");
                    let row = terms(&pending[..pos])
                        .into_iter()
                        .filter(|&(_, c)| c != 0)
                        .map(|(j, c)| (j, c as u32))
                        .collect();
                    rows.push((row, rhs));
                    pending.clear();
                }
            }
            Sec::Bin => binaries.extend(
                toks.iter()
                    .map(|t| t[1..].parse::<usize>().expect("binary")),
            ),
            Sec::None | Sec::End => panic!("text outside a section: {line}"),
        }
    }
    assert!(sec == Sec::End, "missing End");
    LpText {
        objective,
        rows,
        binaries,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Field axioms over every pair and triple, plus agreement with [`NaiveField`].
pub fn field_axioms(q: u32) -> Result<(), String> {
    let f = field(q);
    let naive = NaiveField::of(&f);
    let els: Vec<_> = f.elements().collect();
    ensure(els.len() == q as usize, || {
        format!("GF({q}) has {} elements", els.len())
    })?;
    let (zero, one) = (f.elem(0).unwrap(), f.elem(1).unwrap());
    for &a in &els {
        ensure(f.add(a, zero) == a && f.mul(a, one) == a, || {
            format!("GF({q}) identities at {a:?}")
        })?;
        ensure(f.add(a, f.neg(a)) == zero, || {
            format!("GF({q}) negation at {a:?}")
        })?;
        match naive.inv(a.code()) {
            Some(b) => ensure(f.inv(a).map(|x| x.code()) == Ok(b), || {
                format!("GF({q}) inverse of {a:?}")
            })?,
            None => ensure(a.is_zero(), || format!("GF({q}) {a:?} has no inverse"))?,
        }
        for &b in &els {
            ensure(f.add(a, b).code() == naive.add(a.code(), b.code()), || {
                format!("GF({q}) {a:?}+{b:?}")
            })?;
            ensure(f.mul(a, b).code() == naive.mul(a.code(), b.code()), || {
                format!("GF({q}) {a:?}*{b:?}")
            })?;
            ensure(
                f.add(a, b) == f.add(b, a) && f.mul(a, b) == f.mul(b, a),
                || format!("GF({q}) commutativity"),
            )?;
            for &c in &els {
                ensure(f.add(f.add(a, b), c) == f.add(a, f.add(b, c)), || {
                    format!("GF({q}) + associativity")
                })?;
                ensure(f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)), || {
                    format!("GF({q}) * associativity")
                })?;
                ensure(
                    f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)),
                    || format!("GF({q}) distributivity"),
                )?;
            }
        }
    }
    Ok(())
}

/// Point/line counts and incidence degrees, with incidence recomputed by dot products.
pub fn plane_identities(q: u32) -> Result<(), String> {
    use arcs_core::plane::{dot, PlaneIndex};
    let f = field(q);
    let plane = PlaneIndex::new(&f);
    let n = (q * q + q + 1) as usize;
    ensure(
        plane.points().len() == n && plane.lines().len() == n,
        || format!("PG(2,{q}) size"),
    )?;
    let mut on_line = vec![0usize; n];
    let mut through = vec![0usize; n];
    for (li, l) in plane.lines().iter().enumerate() {
        for (pi, p) in plane.points().iter().enumerate() {
            if dot(&f, &p.coords, &l.normal).is_zero() {
                on_line[li] += 1;
                through[pi] += 1;
                ensure(plane.points_on_line(li).contains(&(pi as u32)), || {
                    format!("PG(2,{q}) point list of line {li}")
                })?;
                ensure(plane.lines_through_point(pi).contains(&(li as u32)), || {
                    format!("PG(2,{q}) line list of point {pi}")
                })?;
            }
        }
    }
    ensure(
        on_line.iter().chain(&through).all(|&c| c == q as usize + 1),
        || format!("PG(2,{q}) degrees"),
    )?;
    for (i, p) in plane.points().iter().enumerate() {
        ensure(plane.point_index(p) == Some(i), || {
            format!("PG(2,{q}) index of {p}")
        })?;
    }
    Ok(())
}

/// Row sums of `M^G` equal q+1 for `count` seeded random generators, and
/// each row agrees with a recount over the plane.
pub fn orbit_row_sums(q: u32, count: usize, seed: u64) -> Result<(), String> {
    use arcs_core::orbits::{build_incidence, compute_orbits};
    use arcs_core::plane::{dot, PlaneIndex};
    use arcs_core::search::random_invertible;
    use rand_core::SeedableRng;
    let f = field(q);
    let plane = std::sync::Arc::new(PlaneIndex::new(&f));
    let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(seed);
    for _ in 0..count {
        let g = random_invertible(&f, &mut rng);
        let sys = compute_orbits(&plane, &g).map_err(|e| e.to_string())?;
        let inc = build_incidence(&sys);
        for (i, row) in inc.matrix.iter().enumerate() {
            let sum: u32 = row.iter().sum();
            ensure(sum == q + 1, || {
                format!("q={q} generator {g}: row {i} sums to {sum}")
            })?;
            let line = plane.line(inc.row_reps[i]);
            let mut counts = vec![0u32; row.len()];
            for (pi, p) in plane.points().iter().enumerate() {
                if dot(&f, &p.coords, &line.normal).is_zero() {
                    counts[sys.orbit_of_point(pi)] += 1;
                }
            }
            ensure(&counts == row, || {
                format!("q={q} generator {g}: row {i} differs from recount")
            })?;
        }
    }
    Ok(())
}

/// Solver optimum equals enumeration on `cases` seeded random models with t <= 20.
pub fn solver_vs_enumeration(cases: usize, seed: u64) -> Result<(), String> {
    use arcs_core::ilp::{solve, SolveStatus, SolverConfig};
    use rand_core::SeedableRng;
    let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(seed);
    let cfg = SolverConfig {
        local_search_rounds: 200,
        ..SolverConfig::default()
    };
    for k in 0..cases {
        let model = random_model(&mut rng, 20);
        let sol = solve(&model, &cfg);
        let truth = brute_force(&model);
        ensure(
            sol.status == SolveStatus::Optimal
                && sol.objective == truth
                && model.is_feasible(&sol.selection),
            || {
                format!(
                    "model {k}: solver {} ({:?}), enumeration {truth}",
                    sol.objective, sol.status
                )
            },
        )?;
    }
    Ok(())
}

/// Spectrum identities on every bundled arc.
pub fn corpus_spectra() -> Result<usize, String> {
    use arcs_core::arcs::spectrum;
    use arcs_core::plane::PlaneIndex;
    let corpus = arcs_core::corpus::Corpus::bundled().map_err(|e| e.to_string())?;
    for a in &corpus.arcs {
        let file = a.parsed.as_ref().map_err(|e| format!("{}: {e}", a.name))?;
        let q = file.arc.q() as u64;
        let plane = PlaneIndex::new(&file.arc.spec);
        let s = spectrum(&plane, &file.arc).map_err(|e| e.to_string())?;
        ensure(s.total_lines() == q * q + q + 1, || {
            format!("{}: line count", a.name)
        })?;
        ensure(s.incidences() == file.arc.n() as u64 * (q + 1), || {
            format!("{}: incidence count", a.name)
        })?;
    }
    Ok(corpus.arcs.len())
}
