//! The orbit packing program `max { w.x : M x <= r, x binary }`.
//!
//! [`solve`] is an exact depth-first branch-and-bound:
//!
//! * branch on the undecided column of largest weight (lowest index on ties),
//!   include branch first;
//! * after an inclusion, any undecided column whose coefficient exceeds the
//!   residual capacity of one of its rows is fixed to zero;
//! * a node is pruned when `objective + weight of undecided columns` cannot
//!   beat the incumbent, or when a counting certificate (see
//!   [`CountingCertificate`]) gives a smaller bound.
//!
//! The incumbent starts from [`greedy_warm_start`] improved by
//! [`local_search`]; both are seeded and deterministic.

use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbits::OrbitIncidence;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("r = {r} is outside 1..={max} for q = {q}")]
    BadR { r: u32, q: u32, max: u32 },
    #[error("model is malformed: {0}")]
    Malformed(String),
    #[error("cannot parse model dump line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A linear identity certifying an upper bound on the objective.
///
/// For every binary `x`:
/// `scale * w.x = sum_i mult_i * (M x)_i - column_coef * x_column`.
/// Since each `(M x)_i <= r`, the row loads bound `w.x` from above. The
/// q+1 lines through a point give one such identity per point orbit, and
/// summing over all lines gives one with `scale = q+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingCertificate {
    pub scale: u64,
    /// `(row, multiplicity)`, rows ascending.
    pub rows: Vec<(usize, u64)>,
    pub column: Option<usize>,
    pub column_coef: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingModel {
    pub q: u32,
    pub group_order: u64,
    pub rhs: u32,
    pub weights: Vec<u64>,
    /// Sparse rows, `(column, coefficient)` with nonzero coefficients, columns ascending.
    pub rows: Vec<Vec<(usize, u32)>>,
    #[serde(default)]
    pub certificates: Vec<CountingCertificate>,
}

impl PackingModel {
    /// Builds and validates a model without certificates.
    pub fn new(
        q: u32,
        group_order: u64,
        rhs: u32,
        weights: Vec<u64>,
        rows: Vec<Vec<(usize, u32)>>,
    ) -> Result<Self, ModelError> {
        let model = PackingModel {
            q,
            group_order,
            rhs,
            weights,
            rows,
            certificates: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn num_cols(&self) -> usize {
        self.weights.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Malformed(m));
        if self.rhs == 0 {
            return bad("right-hand side must be positive".into());
        }
        if let Some(j) = self.weights.iter().position(|&w| w == 0) {
            return bad(format!("column {j} has zero weight"));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                return bad(format!("row {i} is empty"));
            }
            let mut last = None;
            for &(j, c) in row {
                if j >= self.num_cols() || c == 0 || last.is_some_and(|l| l >= j) {
                    return bad(format!("row {i} has a bad entry ({j}, {c})"));
                }
                last = Some(j);
            }
        }
        for (k, cert) in self.certificates.iter().enumerate() {
            if !self.certificate_holds(cert) {
                return bad(format!("certificate {k} is not an identity of the model"));
            }
        }
        Ok(())
    }

    /// Checks `scale * w_j == sum_i mult_i m_ij - [j == column] column_coef` for all j.
    pub fn certificate_holds(&self, cert: &CountingCertificate) -> bool {
        if cert.scale == 0 {
            return false;
        }
        let mut lhs = vec![0i128; self.num_cols()];
        for &(i, mult) in &cert.rows {
            let Some(row) = self.rows.get(i) else {
                return false;
            };
            for &(j, c) in row {
                lhs[j] += mult as i128 * c as i128;
            }
        }
        if let Some(j0) = cert.column {
            if j0 >= self.num_cols() {
                return false;
            }
            lhs[j0] -= cert.column_coef as i128;
        }
        lhs.iter()
            .zip(&self.weights)
            .all(|(&l, &w)| l == cert.scale as i128 * w as i128)
    }

    /// Columns that cannot be selected at all: some coefficient exceeds r.
    pub fn forced_zero(&self) -> Vec<bool> {
        let mut out = vec![false; self.num_cols()];
        for row in &self.rows {
            for &(j, c) in row {
                if c > self.rhs {
                    out[j] = true;
                }
            }
        }
        out
    }

    pub fn objective(&self, selection: &[bool]) -> u64 {
        self.weights
            .iter()
            .zip(selection)
            .filter(|(_, &x)| x)
            .map(|(&w, _)| w)
            .sum()
    }

    /// Largest row load `(M x)_i` of a selection.
    pub fn max_load(&self, selection: &[bool]) -> u32 {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|&&(j, _)| selection[j])
                    .map(|&(_, c)| c)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn is_feasible(&self, selection: &[bool]) -> bool {
        selection.len() == self.num_cols() && self.max_load(selection) <= self.rhs
    }

    /// Same matrix and weights with a different right-hand side.
    pub fn with_rhs(&self, rhs: u32) -> Result<Self, ModelError> {
        check_r(self.q, rhs)?;
        Ok(PackingModel {
            rhs,
            ..self.clone()
        })
    }

    /// Writes the plain-text model dump.
    ///
    /// ```text
    /// q r group_order t s
    /// w_0 w_1 ... w_{t-1}
    /// 0: col:coef col:coef ...
    /// ```
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            self.q,
            self.rhs,
            self.group_order,
            self.num_cols(),
            self.num_rows()
        );
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "{}", w.join(" "));
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{i}:");
            for &(j, c) in row {
                let _ = write!(out, " {j}:{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, ModelError> {
        let err = |line: usize, msg: &str| ModelError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let h: Vec<u64> = header
            .split_whitespace()
            .map(|x| x.parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(1, "header must be five integers"))?;
        let [q, r, order, t, s] = h[..] else {
            return Err(err(1, "header must be five integers"));
        };
        let (wl, wline) = lines.next().ok_or_else(|| err(2, "missing weights"))?;
        let weights: Vec<u64> = wline
            .split_whitespace()
            .map(|x| x.parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(wl + 1, "bad weight"))?;
        if weights.len() as u64 != t {
            return Err(err(wl + 1, "weight count differs from t"));
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            let (idx, rest) = line
                .split_once(':')
                .ok_or_else(|| err(n + 1, "missing row index"))?;
            if idx.trim().parse::<usize>().ok() != Some(rows.len()) {
                return Err(err(n + 1, "rows must be numbered consecutively from 0"));
            }
            let row = rest
                .split_whitespace()
                .map(|tok| {
                    let (j, c) = tok.split_once(':')?;
                    Some((j.parse::<usize>().ok()?, c.parse::<u32>().ok()?))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(n + 1, "bad col:coef entry"))?;
            rows.push(row);
        }
        if rows.len() as u64 != s {
            return Err(err(0, "row count differs from s"));
        }
        PackingModel::new(q as u32, order, r as u32, weights, rows)
    }

    /// CPLEX LP format text. Byte-identical for identical models.
    pub fn to_lp(&self) -> String {
        const PER_LINE: usize = 8;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ orbit packing model q={} r={} group_order={} t={} s={}",
            self.q,
            self.rhs,
            self.group_order,
            self.num_cols(),
            self.num_rows()
        );
        out.push_str("Maximize\n obj:");
        for (j, w) in self.weights.iter().enumerate() {
            if j > 0 && j % PER_LINE == 0 {
                out.push_str("\n     ");
            }
            let sep = if j == 0 { " " } else { " + " };
            let _ = write!(out, "{sep}{w} x{j}");
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            for (k, &(j, c)) in row.iter().enumerate() {
                if k > 0 && k % PER_LINE == 0 {
                    out.push_str("\n     ");
                }
                let sep = if k == 0 { " " } else { " + " };
                let _ = write!(out, "{sep}{c} x{j}");
            }
            let _ = writeln!(out, " <= {}", self.rhs);
        }
        out.push_str("Binaries\n");
        for j in 0..self.num_cols() {
            if j > 0 && j % PER_LINE == 0 {
                out.push('\n');
            }
            let _ = write!(out, " x{j}");
        }
        out.push_str("\nEnd\n");
        out
    }
}

/// `r = q + 1` would admit the whole plane; it is rejected like any r > q.
fn check_r(q: u32, r: u32) -> Result<(), ModelError> {
    if r == 0 || r > q {
        return Err(ModelError::BadR { r, q, max: q });
    }
    Ok(())
}

/// Packing model for `(n, r)`-arcs that are unions of the given orbits.
///
/// Columns are point orbits, rows are line orbits. Columns with a
/// coefficient above `r` stay in the model and are fixed to zero by the
/// solver (see [`PackingModel::forced_zero`]).
pub fn model_from_incidence(inc: &OrbitIncidence, r: u32) -> Result<PackingModel, ModelError> {
    check_r(inc.q, r)?;
    let rows: Vec<Vec<(usize, u32)>> = inc
        .matrix
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(j, &c)| (j, c))
                .collect()
        })
        .collect();
    let mut certificates: Vec<CountingCertificate> = inc
        .pencils
        .iter()
        .enumerate()
        .map(|(j, pencil)| CountingCertificate {
            scale: 1,
            rows: pencil.iter().map(|&(i, m)| (i, m as u64)).collect(),
            column: Some(j),
            column_coef: inc.q as u64,
        })
        .collect();
    certificates.push(CountingCertificate {
        scale: inc.q as u64 + 1,
        rows: inc.row_sizes.iter().copied().enumerate().collect(),
        column: None,
        column_coef: 0,
    });
    let model = PackingModel {
        q: inc.q,
        group_order: inc.group_order,
        rhs: r,
        weights: inc.weights.clone(),
        rows,
        certificates,
    };
    model.validate()?;
    Ok(model)
}

pub fn export_lp(model: &PackingModel, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, model.to_lp())?;
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// The search finished; no selection has a larger objective.
    Optimal,
    /// A budget ran out (or the incumbent hint was not reached); the
    /// selection is feasible but not proven optimal.
    FeasibleBudgetExhausted,
    /// The user-fixed columns already violate a row.
    Infeasible,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub time_budget: Option<Duration>,
    pub node_budget: Option<u64>,
    /// A known achievable objective; nodes that cannot reach it are pruned.
    pub initial_incumbent: Option<u64>,
    /// Sequential search; results are reproducible when no time budget cuts in.
    pub deterministic: bool,
    /// Worker count for the split-root parallel mode (ignored when deterministic).
    pub threads: usize,
    pub fixed_ones: Vec<usize>,
    pub fixed_zeros: Vec<usize>,
    pub use_certificates: bool,
    pub warm_start: bool,
    /// Ruin-and-recreate rounds run on the greedy warm start (0 disables).
    pub local_search_rounds: u64,
    pub seed: u64,
    /// Stop as soon as an incumbent reaches this objective.
    pub stop_at: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_budget: None,
            node_budget: None,
            initial_incumbent: None,
            deterministic: true,
            threads: 1,
            fixed_ones: Vec::new(),
            fixed_zeros: Vec::new(),
            use_certificates: true,
            warm_start: true,
            local_search_rounds: 200_000,
            seed: 0,
            stop_at: None,
        }
    }
}

impl SolverConfig {
    pub fn with_time(mut self, d: Duration) -> Self {
        self.time_budget = Some(d);
        self
    }

    pub fn with_nodes(mut self, n: u64) -> Self {
        self.node_budget = Some(n);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub selection: Vec<bool>,
    pub objective: u64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

impl Solution {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.selection
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(j, _)| j)
    }
}

/// Greedy feasible selection: columns by decreasing `w_j / sum_i m_ij`,
/// lowest index on ties, each added if it still fits.
pub fn greedy_warm_start(model: &PackingModel) -> Solution {
    let start = Instant::now();
    let mut tight = vec![0u64; model.num_cols()];
    for row in &model.rows {
        for &(j, c) in row {
            tight[j] += c as u64;
        }
    }
    let mut order: Vec<usize> = (0..model.num_cols()).collect();
    // w_a / t_a > w_b / t_b  <=>  w_a t_b > w_b t_a
    order.sort_by(|&a, &b| {
        let lhs = model.weights[a] as u128 * tight[b] as u128;
        let rhs = model.weights[b] as u128 * tight[a] as u128;
        rhs.cmp(&lhs).then(a.cmp(&b))
    });
    let cols = column_lists(model);
    let mut load = vec![0u32; model.num_rows()];
    let mut selection = vec![false; model.num_cols()];
    for j in order {
        if cols[j]
            .iter()
            .all(|&(i, c)| load[i as usize] + c <= model.rhs)
        {
            for &(i, c) in &cols[j] {
                load[i as usize] += c;
            }
            selection[j] = true;
        }
    }
    Solution {
        objective: model.objective(&selection),
        selection,
        status: SolveStatus::FeasibleBudgetExhausted,
        nodes_explored: 0,
        elapsed: start.elapsed(),
    }
}

/// Seeded ruin-and-recreate improvement of a feasible selection.
///
/// Each round forces one unselected column in, drops random conflicting
/// columns until the rows fit again, and refills greedily in a random order.
/// A round is kept if the objective does not decrease.
pub fn local_search(model: &PackingModel, start: &[bool], rounds: u64, seed: u64) -> Solution {
    let clock = Instant::now();
    let cols = column_lists(model);
    let forced = model.forced_zero();
    let candidates: Vec<usize> = (0..model.num_cols()).filter(|&j| !forced[j]).collect();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut cur = start.to_vec();
    let mut load = vec![0u32; model.num_rows()];
    for j in 0..cur.len() {
        if cur[j] {
            for &(i, c) in &cols[j] {
                load[i as usize] += c;
            }
        }
    }
    let mut cur_obj = model.objective(&cur);
    let mut best = (cur_obj, cur.clone());
    let mut order = candidates.clone();
    for _ in 0..rounds {
        let outside: Vec<usize> = candidates.iter().copied().filter(|&j| !cur[j]).collect();
        if outside.is_empty() {
            break;
        }
        let mut sel = cur.clone();
        let mut ld = load.clone();
        let put = |sel: &mut Vec<bool>, ld: &mut Vec<u32>, j: usize, on: bool| {
            sel[j] = on;
            for &(i, c) in &cols[j] {
                if on {
                    ld[i as usize] += c;
                } else {
                    ld[i as usize] -= c;
                }
            }
        };
        let forced_in = outside[rng.gen_range(0..outside.len())];
        put(&mut sel, &mut ld, forced_in, true);
        loop {
            let Some(&(row, _)) = cols[forced_in]
                .iter()
                .find(|&&(i, _)| ld[i as usize] > model.rhs)
            else {
                break;
            };
            let victims: Vec<usize> = model.rows[row as usize]
                .iter()
                .map(|&(j, _)| j)
                .filter(|&j| sel[j] && j != forced_in)
                .collect();
            let v = victims[rng.gen_range(0..victims.len())];
            put(&mut sel, &mut ld, v, false);
        }
        order.shuffle(&mut rng);
        for &j in &order {
            if !sel[j]
                && cols[j]
                    .iter()
                    .all(|&(i, c)| ld[i as usize] + c <= model.rhs)
            {
                put(&mut sel, &mut ld, j, true);
            }
        }
        let obj = model.objective(&sel);
        if obj >= cur_obj {
            cur = sel;
            load = ld;
            cur_obj = obj;
            if obj > best.0 {
                best = (obj, cur.clone());
            }
        }
    }
    Solution {
        objective: best.0,
        selection: best.1,
        status: SolveStatus::FeasibleBudgetExhausted,
        nodes_explored: 0,
        elapsed: clock.elapsed(),
    }
}

fn column_lists(model: &PackingModel) -> Vec<Vec<(u32, u32)>> {
    let mut cols = vec![Vec::new(); model.num_cols()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, c) in row {
            cols[j].push((i as u32, c));
        }
    }
    cols
}

const FREE: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;

struct Cert {
    scale: u64,
    column: Option<usize>,
    column_coef: i64,
}

/// Immutable problem data shared by all workers.
struct Problem<'a> {
    model: &'a PackingModel,
    cols: Vec<Vec<(u32, u32)>>,
    rows: Vec<Vec<(u32, u32)>>,
    branch_order: Vec<u32>,
    certs: Vec<Cert>,
    // per row: (certificate, multiplicity, coefficient of the certificate's column)
    row_certs: Vec<Vec<(u32, i64, u32)>>,
}

impl<'a> Problem<'a> {
    fn new(model: &'a PackingModel, use_certs: bool) -> Self {
        let cols = column_lists(model);
        let rows = model
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, c)| (j as u32, c)).collect())
            .collect();
        let mut branch_order: Vec<u32> = (0..model.num_cols() as u32).collect();
        branch_order.sort_by(|&a, &b| {
            model.weights[b as usize]
                .cmp(&model.weights[a as usize])
                .then(a.cmp(&b))
        });
        let mut certs = Vec::new();
        let mut row_certs = vec![Vec::new(); model.num_rows()];
        if use_certs {
            for (k, c) in model.certificates.iter().enumerate() {
                certs.push(Cert {
                    scale: c.scale,
                    column: c.column,
                    column_coef: c.column_coef as i64,
                });
                for &(i, mult) in &c.rows {
                    let coef = c
                        .column
                        .and_then(|j0| model.rows[i].binary_search_by_key(&j0, |&(j, _)| j).ok())
                        .map_or(0, |pos| model.rows[i][pos].1);
                    row_certs[i].push((k as u32, mult as i64, coef));
                }
            }
        }
        Problem {
            model,
            cols,
            rows,
            branch_order,
            certs,
            row_certs,
        }
    }
}

struct Shared {
    best: AtomicU64,
    nodes: AtomicU64,
    stop: AtomicBool,
    start: Instant,
    stop_at: Option<u64>,
}

/// Mutable search state of one worker.
struct Search<'p, 'a> {
    pb: &'p Problem<'a>,
    rhs: u32,
    state: Vec<u8>,
    load: Vec<u32>,
    free_sum: Vec<u32>,
    obj: u64,
    free_weight: u64,
    // per certificate: sum of mult * min(r, cap_i), with and without its column
    cert_with: Vec<i64>,
    cert_without: Vec<i64>,
    trail: Vec<u32>,
    best_obj: u64,
    best_sel: Option<Vec<bool>>,
    floor: u64,
    nodes: u64,
    interrupted: bool,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(pb: &'p Problem<'a>) -> Self {
        let m = pb.model;
        let r = m.rhs as i64;
        let mut free_sum = vec![0u32; m.num_rows()];
        let mut cert_with = vec![0i64; pb.certs.len()];
        let mut cert_without = vec![0i64; pb.certs.len()];
        for (i, row) in pb.rows.iter().enumerate() {
            free_sum[i] = row.iter().map(|&(_, c)| c).sum();
            let cap = free_sum[i] as i64;
            for &(k, mult, coef) in &pb.row_certs[i] {
                cert_with[k as usize] += mult * cap.min(r);
                cert_without[k as usize] += mult * (cap - coef as i64).min(r);
            }
        }
        Search {
            pb,
            rhs: m.rhs,
            state: vec![FREE; m.num_cols()],
            load: vec![0; m.num_rows()],
            free_sum,
            obj: 0,
            free_weight: m.weights.iter().sum(),
            cert_with,
            cert_without,
            trail: Vec::new(),
            best_obj: 0,
            best_sel: None,
            floor: 0,
            nodes: 0,
            interrupted: false,
        }
    }

    /// Updates certificate sums after row `i`'s capacity moved from `before` to `after`.
    #[inline]
    fn cap_changed(&mut self, i: usize, before: u32, after: u32) {
        let r = self.rhs as i64;
        let (a, b) = (before as i64, after as i64);
        let dw = b.min(r) - a.min(r);
        for &(k, mult, coef) in &self.pb.row_certs[i] {
            let c = coef as i64;
            // caps below `coef` only occur once the column is decided, where
            // `without` is unused
            let dwo = (b - c).min(r) - (a - c).min(r);
            self.cert_with[k as usize] += mult * dw;
            self.cert_without[k as usize] += mult * dwo;
        }
    }

    fn leave_free(&mut self, j: usize, to: u8) {
        debug_assert_eq!(self.state[j], FREE);
        self.state[j] = to;
        self.free_weight -= self.pb.model.weights[j];
        let pb = self.pb;
        for &(i, c) in &pb.cols[j] {
            let i = i as usize;
            self.free_sum[i] -= c;
            if to == OUT {
                let cap = self.load[i] + self.free_sum[i];
                self.cap_changed(i, cap + c, cap);
            }
        }
        self.trail.push(j as u32);
    }

    fn exclude(&mut self, j: usize) {
        self.leave_free(j, OUT);
    }

    /// Selects column `j`; returns false if that overloads a row.
    fn include(&mut self, j: usize) -> bool {
        self.leave_free(j, IN);
        self.obj += self.pb.model.weights[j];
        let mut ok = true;
        for &(i, c) in &self.pb.cols[j] {
            let i = i as usize;
            self.load[i] += c;
            if self.load[i] > self.rhs {
                ok = false;
            }
        }
        if !ok {
            return false;
        }
        let pb = self.pb;
        for &(i, _) in &pb.cols[j] {
            let residual = self.rhs - self.load[i as usize];
            for &(k, ck) in &pb.rows[i as usize] {
                if ck > residual && self.state[k as usize] == FREE {
                    self.exclude(k as usize);
                }
            }
        }
        true
    }

    fn undo_to(&mut self, mark: usize) {
        let pb = self.pb;
        while self.trail.len() > mark {
            let j = self.trail.pop().unwrap() as usize;
            let was = self.state[j];
            self.state[j] = FREE;
            self.free_weight += pb.model.weights[j];
            for &(i, c) in &pb.cols[j] {
                let i = i as usize;
                if was == IN {
                    self.load[i] -= c;
                    self.free_sum[i] += c;
                } else {
                    let cap = self.load[i] + self.free_sum[i];
                    self.free_sum[i] += c;
                    self.cap_changed(i, cap, cap + c);
                }
            }
            if was == IN {
                self.obj -= pb.model.weights[j];
            }
        }
    }

    fn threshold(&self, shared: &Shared) -> u64 {
        self.best_obj
            .max(shared.best.load(Ordering::Relaxed))
            .max(self.floor)
    }

    /// True if the node cannot improve on `threshold`.
    fn prunable(&self, threshold: u64) -> bool {
        if self.obj + self.free_weight <= threshold {
            return true;
        }
        for (k, cert) in self.pb.certs.iter().enumerate() {
            let with = self.cert_with[k];
            let total = match cert.column.map(|j| self.state[j]) {
                None | Some(OUT) => with,
                Some(IN) => with - cert.column_coef,
                Some(_) => (with - cert.column_coef).max(self.cert_without[k]),
            };
            if total < 0 || (total as u64) / cert.scale <= threshold {
                return true;
            }
        }
        false
    }

    fn next_branch(&self) -> Option<usize> {
        self.pb
            .branch_order
            .iter()
            .map(|&j| j as usize)
            .find(|&j| self.state[j] == FREE)
    }

    fn record(&mut self, shared: &Shared) {
        if self.obj > self.best_obj {
            self.best_obj = self.obj;
            self.best_sel = Some(self.state.iter().map(|&s| s == IN).collect());
            shared.best.fetch_max(self.obj, Ordering::Relaxed);
            if shared.stop_at.is_some_and(|t| self.obj >= t) {
                shared.stop.store(true, Ordering::Relaxed);
            }
        }
    }

    fn out_of_budget(&mut self, cfg: &SolverConfig, shared: &Shared) -> bool {
        if shared.stop.load(Ordering::Relaxed) {
            return true;
        }
        let total = shared.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over = cfg.node_budget.is_some_and(|n| total > n)
            || (self.nodes.is_multiple_of(256)
                && cfg.time_budget.is_some_and(|t| shared.start.elapsed() >= t));
        if over {
            shared.stop.store(true, Ordering::Relaxed);
        }
        over
    }

    /// Evaluates the current node; returns the column to branch on, if any.
    fn visit(&mut self, shared: &Shared) -> Option<usize> {
        self.nodes += 1;
        self.record(shared);
        if self.prunable(self.threshold(shared)) {
            return None;
        }
        self.next_branch()
    }

    /// Depth-first search below the current state.
    fn run(&mut self, cfg: &SolverConfig, shared: &Shared) {
        struct Frame {
            col: usize,
            mark: usize,
            stage: u8,
        }
        let mut stack: Vec<Frame> = Vec::new();
        if self.out_of_budget(cfg, shared) {
            self.interrupted = true;
            return;
        }
        if let Some(col) = self.visit(shared) {
            stack.push(Frame {
                col,
                mark: self.trail.len(),
                stage: 0,
            });
        }
        while let Some(top) = stack.last_mut() {
            let (col, mark) = (top.col, top.mark);
            let stage = top.stage;
            top.stage += 1;
            if stage < 2 {
                self.undo_to(mark);
                let feasible = if stage == 0 {
                    self.include(col)
                } else {
                    self.exclude(col);
                    true
                };
                if !feasible {
                    continue;
                }
                if self.out_of_budget(cfg, shared) {
                    self.interrupted = true;
                    self.undo_to(mark);
                    break;
                }
                if let Some(next) = self.visit(shared) {
                    stack.push(Frame {
                        col: next,
                        mark: self.trail.len(),
                        stage: 0,
                    });
                }
            } else {
                self.undo_to(mark);
                stack.pop();
            }
        }
        if let Some(frame) = stack.first() {
            self.undo_to(frame.mark);
        }
    }
}

/// A subproblem of the split-root parallel mode.
struct Subproblem {
    decisions: Vec<(usize, bool)>,
}

fn split_root(
    search: &mut Search,
    shared: &Shared,
    depth: usize,
    out: &mut Vec<Subproblem>,
    path: &mut Vec<(usize, bool)>,
) {
    if search.prunable(search.threshold(shared)) {
        return;
    }
    let Some(col) = search.next_branch() else {
        out.push(Subproblem {
            decisions: path.clone(),
        });
        return;
    };
    if depth == 0 {
        out.push(Subproblem {
            decisions: path.clone(),
        });
        return;
    }
    for include in [true, false] {
        let mark = search.trail.len();
        let ok = if include {
            search.include(col)
        } else {
            search.exclude(col);
            true
        };
        if ok {
            path.push((col, include));
            split_root(search, shared, depth - 1, out, path);
            path.pop();
        }
        search.undo_to(mark);
    }
}

/// Exact branch-and-bound; see the module documentation for the rules.
pub fn solve(model: &PackingModel, cfg: &SolverConfig) -> Solution {
    let start = Instant::now();
    let pb = Problem::new(model, cfg.use_certificates);
    let shared = Shared {
        best: AtomicU64::new(0),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        start,
        stop_at: cfg.stop_at,
    };
    let infeasible = || Solution {
        selection: vec![false; model.num_cols()],
        objective: 0,
        status: SolveStatus::Infeasible,
        nodes_explored: 0,
        elapsed: start.elapsed(),
    };

    let mut root = Search::new(&pb);
    root.floor = cfg.initial_incumbent.map_or(0, |h| h.saturating_sub(1));
    for (j, forced) in model.forced_zero().into_iter().enumerate() {
        if forced {
            root.exclude(j);
        }
    }
    for &j in &cfg.fixed_zeros {
        match root.state.get(j) {
            Some(&FREE) => root.exclude(j),
            Some(_) => {}
            None => return infeasible(),
        }
    }
    for &j in &cfg.fixed_ones {
        match root.state.get(j) {
            Some(&FREE) => {
                if !root.include(j) {
                    return infeasible();
                }
            }
            Some(&IN) => {}
            _ => return infeasible(),
        }
    }

    let fixed = !cfg.fixed_ones.is_empty() || !cfg.fixed_zeros.is_empty();
    if cfg.warm_start && !fixed {
        let mut greedy = greedy_warm_start(model);
        if cfg.local_search_rounds > 0 {
            greedy = local_search(model, &greedy.selection, cfg.local_search_rounds, cfg.seed);
        }
        if greedy.objective > root.best_obj {
            root.best_obj = greedy.objective;
            root.best_sel = Some(greedy.selection);
            shared.best.store(greedy.objective, Ordering::Relaxed);
        }
        if cfg.stop_at.is_some_and(|t| greedy.objective >= t) {
            shared.stop.store(true, Ordering::Relaxed);
        }
    }

    let parallel = !cfg.deterministic && cfg.threads > 1;
    let (best_obj, best_sel, interrupted) = if parallel {
        let depth = (usize::BITS - (cfg.threads * 8).leading_zeros()) as usize;
        let mut subs = Vec::new();
        split_root(&mut root, &shared, depth, &mut subs, &mut Vec::new());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .expect("thread pool");
        let results: Vec<(u64, Option<Vec<bool>>, bool)> = pool.install(|| {
            subs.par_iter()
                .map(|sub| {
                    let mut s = Search::new(&pb);
                    s.floor = root.floor;
                    s.best_obj = 0;
                    for (j, &st) in root.state.iter().enumerate() {
                        if st == OUT {
                            s.exclude(j);
                        } else if st == IN {
                            s.include(j);
                        }
                    }
                    for &(j, inc) in &sub.decisions {
                        if inc {
                            s.include(j);
                        } else {
                            s.exclude(j);
                        }
                    }
                    s.run(cfg, &shared);
                    (s.best_obj, s.best_sel, s.interrupted)
                })
                .collect()
        });
        let mut best = (root.best_obj, root.best_sel.clone(), false);
        for (obj, sel, int) in results {
            best.2 |= int;
            if obj > best.0 {
                best.0 = obj;
                best.1 = sel;
            }
        }
        best
    } else {
        root.run(cfg, &shared);
        (root.best_obj, root.best_sel.clone(), root.interrupted)
    };

    let selection = best_sel.unwrap_or_else(|| vec![false; model.num_cols()]);
    let reached_hint = cfg.initial_incumbent.is_none_or(|h| best_obj >= h);
    let status = if interrupted || !reached_hint {
        SolveStatus::FeasibleBudgetExhausted
    } else {
        SolveStatus::Optimal
    };
    debug_assert!(model.is_feasible(&selection));
    Solution {
        objective: best_obj,
        selection,
        status,
        nodes_explored: shared.nodes.load(Ordering::Relaxed),
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> PackingModel {
        // three columns, pairwise conflicting at r = 1
        PackingModel::new(
            2,
            1,
            1,
            vec![1, 2, 3],
            vec![
                vec![(0, 1), (1, 1)],
                vec![(1, 1), (2, 1)],
                vec![(0, 1), (2, 1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(PackingModel::new(2, 1, 1, vec![0], vec![vec![(0, 1)]]).is_err());
        assert!(PackingModel::new(2, 1, 1, vec![1], vec![vec![]]).is_err());
        assert!(PackingModel::new(2, 1, 1, vec![1], vec![vec![(3, 1)]]).is_err());
        assert!(PackingModel::new(2, 1, 0, vec![1], vec![vec![(0, 1)]]).is_err());
    }

    #[test]
    fn solves_tiny() {
        let sol = solve(&tiny(), &SolverConfig::default());
        assert_eq!(sol.objective, 3);
        assert_eq!(sol.selection, vec![false, false, true]);
        assert_eq!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn forced_zero_columns() {
        let m = PackingModel::new(3, 1, 2, vec![5, 1], vec![vec![(0, 3), (1, 1)]]).unwrap();
        assert_eq!(m.forced_zero(), vec![true, false]);
        let sol = solve(&m, &SolverConfig::default());
        assert_eq!(sol.objective, 1);
    }

    #[test]
    fn user_fixing() {
        let m = tiny();
        let cfg = SolverConfig {
            fixed_ones: vec![0, 1],
            ..SolverConfig::default()
        };
        assert_eq!(solve(&m, &cfg).status, SolveStatus::Infeasible);
        let cfg = SolverConfig {
            fixed_ones: vec![0],
            ..SolverConfig::default()
        };
        let sol = solve(&m, &cfg);
        assert_eq!((sol.objective, sol.status), (1, SolveStatus::Optimal));
    }

    #[test]
    fn unreachable_hint_is_not_optimal() {
        let cfg = SolverConfig {
            initial_incumbent: Some(4),
            ..SolverConfig::default()
        };
        let sol = solve(&tiny(), &cfg);
        assert_eq!(sol.status, SolveStatus::FeasibleBudgetExhausted);
        assert!(tiny().is_feasible(&sol.selection));
    }

    #[test]
    fn stop_at_target() {
        let cfg = SolverConfig {
            stop_at: Some(1),
            ..SolverConfig::default()
        };
        let sol = solve(&tiny(), &cfg);
        assert!(sol.objective >= 1);
        assert_eq!(sol.status, SolveStatus::FeasibleBudgetExhausted);
    }

    #[test]
    fn node_budget_stops_search() {
        let cfg = SolverConfig::default().with_nodes(1);
        let sol = solve(
            &tiny(),
            &SolverConfig {
                warm_start: false,
                ..cfg
            },
        );
        assert_eq!(sol.status, SolveStatus::FeasibleBudgetExhausted);
    }

    #[test]
    fn dump_round_trip() {
        let m = tiny();
        let text = m.to_dump();
        assert_eq!(
            text,
            "2 1 1 3 3\n1 2 3\n0: 0:1 1:1\n1: 1:1 2:1\n2: 0:1 2:1\n"
        );
        assert_eq!(PackingModel::from_dump(&text).unwrap(), m);
        assert!(PackingModel::from_dump("1 2 3\n").is_err());
        assert!(PackingModel::from_dump("2 1 1 3 1\n1 2 3\n5: 0:1\n").is_err());
    }

    #[test]
    fn lp_text() {
        let lp = tiny().to_lp();
        assert!(lp.starts_with("\\ orbit packing model q=2 r=1"));
        assert!(lp.contains("Maximize\n obj: 1 x0 + 2 x1 + 3 x2\n"));
        assert!(lp.contains(" c0: 1 x0 + 1 x1 <= 1\n"));
        assert!(lp.ends_with("Binaries\n x0 x1 x2\nEnd\n"));
    }

    #[test]
    fn greedy_is_feasible() {
        let g = greedy_warm_start(&tiny());
        assert!(tiny().is_feasible(&g.selection));
        assert_eq!(g.objective, 3);
    }
}
