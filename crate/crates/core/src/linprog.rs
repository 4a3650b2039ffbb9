//! Dense two-phase primal simplex.
//!
//! Problems are stated as `maximize c·x` subject to rows `a·x {≥,=,≤} b`
//! and per-variable bounds. Free variables are split into a difference of
//! nonnegative columns, box variables are shifted to a zero lower bound with
//! an explicit upper-bound row. Bland's rule is used for both the entering
//! and the leaving variable, so the pivot sequence is fully determined by
//! the input.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PIVOT_TOL: f64 = 1e-9;
pub const DEFAULT_PIVOT_LIMIT: usize = 50_000;
const PHASE_ONE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Free,
    NonNegative,
    Box { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        LinearRow { coefficients, relation, rhs }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Signed slack: nonnegative iff satisfied (for `=`, minus the absolute gap).
    pub fn slack(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Ge => lhs - self.rhs,
            Relation::Le => self.rhs - lhs,
            Relation::Eq => -(lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LinearRow>,
    pub bounds: Vec<Bound>,
    pub pivot_limit: usize,
}

impl LpProblem {
    /// A problem over `objective.len()` variables, all nonnegative.
    pub fn new(objective: Vec<f64>) -> Self {
        let bounds = vec![Bound::NonNegative; objective.len()];
        LpProblem { objective, rows: Vec::new(), bounds, pivot_limit: DEFAULT_PIVOT_LIMIT }
    }

    pub fn with_bounds(mut self, bounds: Vec<Bound>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn push_row(&mut self, row: LinearRow) {
        self.rows.push(row);
    }

    pub fn add(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(LinearRow::new(coefficients, relation, rhs));
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::Lp("problem has no variables".into()));
        }
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.bounds.len() });
        }
        for row in &self.rows {
            if row.coefficients.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.coefficients.len() });
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(Error::Lp("non-finite coefficient".into()));
            }
        }
        for b in &self.bounds {
            if let Bound::Box { lo, hi } = *b {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Lp(alloc::format!("invalid box bound [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The pivot cap was reached. `last_row` is the constraint row of the
    /// last pivot, if it was one of the problem rows.
    PivotLimit {
        pivots: usize,
        last_row: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at `x` (meaningful when optimal).
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy)]
enum ColumnMap {
    Plain(usize),
    Split(usize, usize),
    Shifted(usize, f64),
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize, cost: &mut [f64]) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        for v in &mut self.data[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        self.data[pr * w + pc] = 1.0;
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
            }
        }
        let f = cost[pc];
        if f != 0.0 {
            for (v, &pv) in cost.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// `base − c_B·T` for every column (and the rhs slot).
    fn reduced_costs(&self, base: &[f64]) -> Vec<f64> {
        let mut cost = base.to_vec();
        for r in 0..self.rows {
            let cb = base[self.basis[r]];
            if cb != 0.0 {
                let row = &self.data[r * self.width..(r + 1) * self.width];
                for (c, v) in cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        cost
    }

    /// Minimum ratio; ties go to the row whose basic variable has the lowest index.
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows {
            let a = self.at(r, col);
            if a > PIVOT_TOL {
                let ratio = self.rhs(r).max(0.0) / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - 1e-12 || (ratio <= bratio + 1e-12 && self.basis[r] < self.basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
        }
        best.map(|(r, _)| r)
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    Limit,
}

/// Solves `p` to optimality, infeasibility or unboundedness.
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.variable_count();

    let mut maps = Vec::with_capacity(n);
    let mut structural = 0usize;
    for b in &p.bounds {
        maps.push(match *b {
            Bound::NonNegative => {
                structural += 1;
                ColumnMap::Plain(structural - 1)
            }
            Bound::Free => {
                structural += 2;
                ColumnMap::Split(structural - 2, structural - 1)
            }
            Bound::Box { lo, .. } => {
                structural += 1;
                ColumnMap::Shifted(structural - 1, lo)
            }
        });
    }

    // Rows over structural columns with rhs adjusted for shifts.
    struct Std {
        a: Vec<f64>,
        relation: Relation,
        rhs: f64,
        origin: Option<usize>,
    }
    let mut std_rows: Vec<Std> = Vec::with_capacity(p.rows.len() + n);
    for (idx, row) in p.rows.iter().enumerate() {
        let mut a = vec![0.0; structural];
        let mut rhs = row.rhs;
        for (j, &coef) in row.coefficients.iter().enumerate() {
            match maps[j] {
                ColumnMap::Plain(c) => a[c] += coef,
                ColumnMap::Split(c, d) => {
                    a[c] += coef;
                    a[d] -= coef;
                }
                ColumnMap::Shifted(c, lo) => {
                    a[c] += coef;
                    rhs -= coef * lo;
                }
            }
        }
        std_rows.push(Std { a, relation: row.relation, rhs, origin: Some(idx) });
    }
    for (j, b) in p.bounds.iter().enumerate() {
        if let (Bound::Box { lo, hi }, ColumnMap::Shifted(c, _)) = (*b, maps[j]) {
            let mut a = vec![0.0; structural];
            a[c] = 1.0;
            std_rows.push(Std { a, relation: Relation::Le, rhs: hi - lo, origin: None });
        }
    }
    // Nonnegative rhs everywhere; homogeneous `≥` rows are flipped too so
    // their slack can start basic instead of needing an artificial.
    for row in &mut std_rows {
        if row.rhs < 0.0 || (row.rhs == 0.0 && row.relation == Relation::Ge) {
            for v in &mut row.a {
                *v = -*v;
            }
            row.rhs = -row.rhs;
            row.relation = match row.relation {
                Relation::Ge => Relation::Le,
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = std_rows.len();
    let slack_count = std_rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let art_count = std_rows.iter().filter(|r| r.relation != Relation::Le).count();
    let art_start = structural + slack_count;
    let total = art_start + art_count;
    let width = total + 1;

    let mut t = Tableau { rows: m, width, data: vec![0.0; m * width], basis: vec![0; m] };
    let mut next_slack = structural;
    let mut next_art = art_start;
    for (r, row) in std_rows.iter().enumerate() {
        let base = r * width;
        t.data[base..base + structural].copy_from_slice(&row.a);
        t.data[base + total] = row.rhs;
        match row.relation {
            Relation::Le => {
                t.data[base + next_slack] = 1.0;
                t.basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t.data[base + next_slack] = -1.0;
                next_slack += 1;
                t.data[base + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t.data[base + next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            }
        }
    }
    let origins: Vec<Option<usize>> = std_rows.iter().map(|r| r.origin).collect();

    let mut pivots = 0usize;
    let mut last_row: Option<usize> = None;
    let limit = p.pivot_limit;

    // `base` is the phase objective over all tableau columns. When the
    // entering column has no eligible pivot, reduced costs are recomputed
    // from `base` to discard drift; a column that still has no pivot is
    // unbounded in phase two and numerically flat in phase one, where it is
    // excluded from entering.
    let mut run_phase = |t: &mut Tableau, base: &[f64], allowed: usize, phase_one: bool, pivots: &mut usize| {
        let mut cost = t.reduced_costs(base);
        let mut blocked = vec![false; allowed];
        let mut refreshed = false;
        loop {
            let Some(col) = (0..allowed).find(|&c| !blocked[c] && cost[c] > PIVOT_TOL) else {
                return PhaseOutcome::Optimal;
            };
            let Some(row) = t.leaving(col) else {
                if !refreshed {
                    cost = t.reduced_costs(base);
                    refreshed = true;
                    continue;
                }
                if phase_one {
                    blocked[col] = true;
                    continue;
                }
                return PhaseOutcome::Unbounded;
            };
            if *pivots >= limit {
                return PhaseOutcome::Limit;
            }
            t.pivot(row, col, &mut cost);
            refreshed = false;
            last_row = origins[row];
            *pivots += 1;
        }
    };

    // Phase one: maximize −Σ artificials.
    if art_count > 0 {
        let mut base = vec![0.0; width];
        base[art_start..total].fill(-1.0);
        match run_phase(&mut t, &base, total, true, &mut pivots) {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Limit => return Ok(limit_solution(n, pivots, last_row)),
            PhaseOutcome::Unbounded => unreachable!("phase one never reports unbounded"),
        }
        let infeasibility: f64 = (0..m).filter(|&r| t.basis[r] >= art_start).map(|r| t.rhs(r)).sum();
        if infeasibility > PHASE_ONE_TOL {
            return Ok(LpSolution { status: LpStatus::Infeasible, value: f64::NAN, x: vec![0.0; n], pivots });
        }
        // Drive zero-level artificials out of the basis where possible.
        let mut scratch = vec![0.0; width];
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t.at(r, c).abs() > PIVOT_TOL) {
                    t.pivot(r, c, &mut scratch);
                    pivots += 1;
                }
            }
        }
    }

    // Phase two on the original objective; artificial columns never enter.
    let mut base = vec![0.0; width];
    for (j, &cj) in p.objective.iter().enumerate() {
        match maps[j] {
            ColumnMap::Plain(c) | ColumnMap::Shifted(c, _) => base[c] = cj,
            ColumnMap::Split(c, d) => {
                base[c] = cj;
                base[d] = -cj;
            }
        }
    }
    match run_phase(&mut t, &base, art_start, false, &mut pivots) {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Limit => return Ok(limit_solution(n, pivots, last_row)),
        PhaseOutcome::Unbounded => {
            return Ok(LpSolution { status: LpStatus::Unbounded, value: f64::INFINITY, x: vec![0.0; n], pivots })
        }
    }

    let mut col_values = vec![0.0; total];
    for r in 0..m {
        col_values[t.basis[r]] = t.rhs(r).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            ColumnMap::Plain(c) => col_values[c],
            ColumnMap::Split(c, d) => col_values[c] - col_values[d],
            ColumnMap::Shifted(c, lo) => lo + col_values[c],
        })
        .collect();
    let value = p.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { status: LpStatus::Optimal, value, x, pivots })
}

fn limit_solution(n: usize, pivots: usize, last_row: Option<usize>) -> LpSolution {
    LpSolution { status: LpStatus::PivotLimit { pivots, last_row }, value: f64::NAN, x: vec![0.0; n], pivots }
}
