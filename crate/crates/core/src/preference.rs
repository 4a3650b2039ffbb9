//! Preference statements and their compilation into linear constraints over
//! Möbius coefficients.
//!
//! Columns follow the capacity layout (singletons, then pairs) with one extra
//! column for the shared strictness margin `ε`. Strict statements carry
//! `−1` in the `ε` column; every other row has `0` there.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::capacity::{self, choquet_features, mobius_len, pair_column, AlternativeId, CriteriaSet, CriterionId};
use crate::error::{Error, Result};
use crate::linprog::{self, Bound, LinearRow, LpProblem, LpStatus};

pub use crate::linprog::Relation;

/// Largest criterion count accepted by [`compile_mb`].
pub const MAX_CRITERIA: usize = 15;
/// Default compatibility threshold on `ε*`.
pub const DEFAULT_EPSILON_MIN: f64 = 1e-6;
/// Ceiling on `ε` that keeps the compatibility LP bounded.
pub const EPSILON_CAP: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    Strict,
    Weak,
    Equal,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::Strict => ">",
            Comparison::Weak => ">=",
            Comparison::Equal => "=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    /// Shapley importance of `first` compared with `second`.
    Importance { first: CriterionId, second: CriterionId, comparison: Comparison },
    /// Positive interaction, `m({i,j}) > 0`.
    Synergy { first: CriterionId, second: CriterionId },
    /// Negative interaction, `m({i,j}) < 0`.
    Redundancy { first: CriterionId, second: CriterionId },
    /// Choquet value of `first` compared with `second`.
    Alternatives { first: AlternativeId, second: AlternativeId, comparison: Comparison },
    /// `C(a) − C(b)` compared with `C(c) − C(d)`.
    Intensity { first: (AlternativeId, AlternativeId), second: (AlternativeId, AlternativeId), comparison: Comparison },
}

impl Statement {
    pub fn is_strict(&self) -> bool {
        match self {
            Statement::Synergy { .. } | Statement::Redundancy { .. } => true,
            Statement::Importance { comparison, .. }
            | Statement::Alternatives { comparison, .. }
            | Statement::Intensity { comparison, .. } => *comparison == Comparison::Strict,
        }
    }

    /// Whether the statement compares alternatives (and so depends on evaluations).
    pub fn references_alternatives(&self) -> bool {
        matches!(self, Statement::Alternatives { .. } | Statement::Intensity { .. })
    }

    fn check(&self, n: usize, alternatives: Option<usize>, index: usize) -> Result<()> {
        let crit = |c: CriterionId| {
            if c.0 >= n {
                Err(Error::CriterionOutOfRange { index: c.0, n })
            } else {
                Ok(())
            }
        };
        let alt = |a: AlternativeId| match alternatives {
            None => Err(Error::MissingEvaluations { statement: index }),
            Some(count) if a.0 >= count => Err(Error::AlternativeOutOfRange { index: a.0, count }),
            Some(_) => Ok(()),
        };
        match *self {
            Statement::Importance { first, second, .. }
            | Statement::Synergy { first, second }
            | Statement::Redundancy { first, second } => {
                crit(first)?;
                crit(second)?;
                if first == second {
                    return Err(Error::SameCriterion(first.0));
                }
            }
            Statement::Alternatives { first, second, .. } => {
                alt(first)?;
                alt(second)?;
            }
            Statement::Intensity { first, second, .. } => {
                for a in [first.0, first.1, second.0, second.1] {
                    alt(a)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Statement {
    /// Index-based surface form (`g1`, `a1` are one-based).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Statement::Importance { first, second, comparison } => {
                write!(f, "imp: g{} {} g{}", first.0 + 1, comparison.symbol(), second.0 + 1)
            }
            Statement::Synergy { first, second } => write!(f, "synergy: g{},g{}", first.0 + 1, second.0 + 1),
            Statement::Redundancy { first, second } => write!(f, "redundancy: g{},g{}", first.0 + 1, second.0 + 1),
            Statement::Alternatives { first, second, comparison } => {
                write!(f, "alt: a{} {} a{}", first.0 + 1, comparison.symbol(), second.0 + 1)
            }
            Statement::Intensity { first, second, comparison } => write!(
                f,
                "int: (a{},a{}) {} (a{},a{})",
                first.0 .0 + 1,
                first.1 .0 + 1,
                comparison.symbol(),
                second.0 .0 + 1,
                second.1 .0 + 1
            ),
        }
    }
}

/// Identifier of a statement within a statement list (its position).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StatementId(pub usize);

/// Where a constraint row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    /// Coefficients sum to one.
    Normalization,
    /// `m({i}) ≥ 0`.
    Nonnegativity {
        criterion: usize,
    },
    /// `m({i}) + Σ_{j∈T} m({i,j}) ≥ 0`.
    Monotonicity {
        criterion: usize,
        subset: CriteriaSet,
    },
    /// `m({i,j}) = 0`, when the model is restricted to additive capacities.
    Additive {
        first: usize,
        second: usize,
    },
    /// Upper bound on `ε` added by the compatibility LP.
    EpsilonCap,
    Statement {
        id: StatementId,
    },
}

impl Provenance {
    /// Block tag: `MB` for boundary and monotonicity rows, `C` for
    /// criterion statements, `A` for alternative statements.
    pub fn block(&self, statements: &[Statement]) -> &'static str {
        match self {
            Provenance::Normalization
            | Provenance::Nonnegativity { .. }
            | Provenance::Monotonicity { .. }
            | Provenance::Additive { .. } => "MB",
            Provenance::EpsilonCap => "EPS",
            Provenance::Statement { id } => match statements.get(id.0) {
                Some(s) if s.references_alternatives() => "A",
                _ => "C",
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    /// Length `mobius_len(n) + 1`; the last entry is the `ε` coefficient.
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub provenance: Provenance,
}

impl ConstraintRow {
    /// `a·m + a_ε·ε − rhs`, or minus its absolute value for equalities.
    pub fn slack(&self, mobius: &[f64], epsilon: f64) -> f64 {
        let k = self.coefficients.len() - 1;
        let lhs: f64 =
            self.coefficients[..k].iter().zip(mobius).map(|(a, b)| a * b).sum::<f64>() + self.coefficients[k] * epsilon;
        match self.relation {
            Relation::Ge => lhs - self.rhs,
            Relation::Le => self.rhs - lhs,
            Relation::Eq => -(lhs - self.rhs).abs(),
        }
    }

    pub fn is_strict(&self) -> bool {
        self.coefficients.last().is_some_and(|&v| v != 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraintSystem {
    n: usize,
    rows: Vec<ConstraintRow>,
}

impl LinearConstraintSystem {
    pub fn empty(n: usize) -> Self {
        LinearConstraintSystem { n, rows: Vec::new() }
    }

    pub fn criteria(&self) -> usize {
        self.n
    }

    /// Möbius columns plus the `ε` column.
    pub fn variable_count(&self) -> usize {
        mobius_len(self.n) + 1
    }

    pub fn epsilon_column(&self) -> usize {
        mobius_len(self.n)
    }

    pub fn rows(&self) -> &[ConstraintRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: ConstraintRow) -> Result<()> {
        if row.coefficients.len() != self.variable_count() {
            return Err(Error::DimensionMismatch { expected: self.variable_count(), got: row.coefficients.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: LinearConstraintSystem) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    /// Smallest row slack at `(mobius, epsilon)`; `+∞` for an empty system.
    pub fn min_slack(&self, mobius: &[f64], epsilon: f64) -> f64 {
        self.rows.iter().map(|r| r.slack(mobius, epsilon)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_satisfied(&self, mobius: &[f64], epsilon: f64, tol: f64) -> bool {
        self.min_slack(mobius, epsilon) >= -tol
    }

    pub fn has_strict_rows(&self) -> bool {
        self.rows.iter().any(ConstraintRow::is_strict)
    }
}

/// Boundary and monotonicity block: normalization, singleton
/// nonnegativity, and `m({i}) + Σ_{j∈T} m({i,j}) ≥ 0` for every criterion
/// `i` and nonempty `T ⊆ G \ {i}` (subsets in increasing bit-mask order).
pub fn compile_mb(n: usize) -> Result<LinearConstraintSystem> {
    if !(2..=MAX_CRITERIA).contains(&n) {
        return Err(Error::CriterionCount { n, max: MAX_CRITERIA });
    }
    let width = mobius_len(n) + 1;
    let mut sys = LinearConstraintSystem::empty(n);
    let mut sum = vec![1.0; width];
    sum[width - 1] = 0.0;
    sys.rows.push(ConstraintRow {
        coefficients: sum,
        relation: Relation::Eq,
        rhs: 1.0,
        provenance: Provenance::Normalization,
    });
    for i in 0..n {
        let mut a = vec![0.0; width];
        a[i] = 1.0;
        sys.rows.push(ConstraintRow {
            coefficients: a,
            relation: Relation::Ge,
            rhs: 0.0,
            provenance: Provenance::Nonnegativity { criterion: i },
        });
    }
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        for mask in 1u32..(1 << others.len()) {
            let mut a = vec![0.0; width];
            a[i] = 1.0;
            let mut subset = CriteriaSet::EMPTY;
            for (b, &j) in others.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    a[pair_column(n, i, j)] = 1.0;
                    subset = subset.insert(j);
                }
            }
            sys.rows.push(ConstraintRow {
                coefficients: a,
                relation: Relation::Ge,
                rhs: 0.0,
                provenance: Provenance::Monotonicity { criterion: i, subset },
            });
        }
    }
    Ok(sys)
}

/// Compiles each statement into one row, in statement order.
///
/// `evaluations` holds one point-valued row per alternative and is required
/// only when some statement compares alternatives.
pub fn compile_preferences(
    n: usize,
    statements: &[Statement],
    evaluations: Option<&[Vec<f64>]>,
) -> Result<LinearConstraintSystem> {
    if let Some(rows) = evaluations {
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            capacity::check_evaluations(row)?;
        }
    }
    let alternatives = evaluations.map(<[Vec<f64>]>::len);
    for (k, s) in statements.iter().enumerate() {
        s.check(n, alternatives, k)?;
    }
    let features: Vec<Vec<f64>> = if statements.iter().any(Statement::references_alternatives) {
        evaluations.unwrap_or(&[]).iter().map(|x| choquet_features(x)).collect()
    } else {
        Vec::new()
    };
    let mut sys = LinearConstraintSystem::empty(n);
    for (k, s) in statements.iter().enumerate() {
        sys.rows.push(statement_row(n, s, &features, StatementId(k)));
    }
    Ok(sys)
}

/// Same as [`compile_preferences`] with Choquet feature vectors supplied directly
/// (one per alternative, see [`capacity::choquet_features`]).
pub fn compile_with_features(n: usize, statements: &[Statement], features: &[Vec<f64>]) -> LinearConstraintSystem {
    let mut sys = LinearConstraintSystem::empty(n);
    for (k, s) in statements.iter().enumerate() {
        sys.rows.push(statement_row(n, s, features, StatementId(k)));
    }
    sys
}

/// Full system: boundary/monotonicity block followed by the statement rows.
pub fn compile_system(
    n: usize,
    statements: &[Statement],
    evaluations: Option<&[Vec<f64>]>,
) -> Result<LinearConstraintSystem> {
    let mut sys = compile_mb(n)?;
    sys.extend(compile_preferences(n, statements, evaluations)?)?;
    Ok(sys)
}

fn statement_row(n: usize, s: &Statement, features: &[Vec<f64>], id: StatementId) -> ConstraintRow {
    let width = mobius_len(n) + 1;
    let mut a = vec![0.0; width];
    let comparison = match *s {
        Statement::Importance { first, second, comparison } => {
            let (i, j) = (first.0, second.0);
            a[i] += 1.0;
            a[j] -= 1.0;
            for k in 0..n {
                if k != i {
                    a[pair_column(n, i, k)] += 0.5;
                }
                if k != j {
                    a[pair_column(n, j, k)] -= 0.5;
                }
            }
            comparison
        }
        Statement::Synergy { first, second } => {
            a[pair_column(n, first.0, second.0)] = 1.0;
            Comparison::Strict
        }
        Statement::Redundancy { first, second } => {
            a[pair_column(n, first.0, second.0)] = -1.0;
            Comparison::Strict
        }
        Statement::Alternatives { first, second, comparison } => {
            for (c, slot) in a[..width - 1].iter_mut().enumerate() {
                *slot = features[first.0][c] - features[second.0][c];
            }
            comparison
        }
        Statement::Intensity { first, second, comparison } => {
            for (c, slot) in a[..width - 1].iter_mut().enumerate() {
                *slot = (features[first.0 .0][c] - features[first.1 .0][c])
                    - (features[second.0 .0][c] - features[second.1 .0][c]);
            }
            comparison
        }
    };
    let relation = match comparison {
        Comparison::Strict => {
            a[width - 1] = -1.0;
            Relation::Ge
        }
        Comparison::Weak => Relation::Ge,
        Comparison::Equal => Relation::Eq,
    };
    ConstraintRow { coefficients: a, relation, rhs: 0.0, provenance: Provenance::Statement { id } }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    /// Optimal `ε`, or `None` when even the weak system is infeasible.
    pub epsilon: Option<f64>,
    pub compatible: bool,
    /// Optimal LP point (Möbius coordinates, without `ε`), if feasible.
    pub point: Option<Vec<f64>>,
    /// Per system row: whether it is tight at the optimum.
    pub binding: Vec<bool>,
}

/// Tightness threshold for reporting binding rows.
const BINDING_TOL: f64 = 1e-9;

/// Maximizes `ε` over the system (with `ε ≤ 1`); compatible iff
/// `ε* > epsilon_min`.
pub fn check_compatibility(system: &LinearConstraintSystem, epsilon_min: f64) -> Result<Compatibility> {
    let n = system.criteria();
    let width = system.variable_count();
    let mut objective = vec![0.0; width];
    objective[width - 1] = 1.0;
    let mut bounds = vec![Bound::Free; width];
    for b in bounds.iter_mut().take(n) {
        *b = Bound::NonNegative;
    }
    let mut lp = LpProblem::new(objective).with_bounds(bounds);
    for row in system.rows() {
        lp.push_row(LinearRow::new(row.coefficients.clone(), row.relation, row.rhs));
    }
    let mut cap = vec![0.0; width];
    cap[width - 1] = -1.0;
    lp.add(cap, Relation::Ge, -EPSILON_CAP);

    let sol = linprog::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let eps = sol.x[width - 1];
            let point = sol.x[..width - 1].to_vec();
            let binding = system.rows().iter().map(|r| r.slack(&point, eps).abs() <= BINDING_TOL).collect();
            Ok(Compatibility { epsilon: Some(eps), compatible: eps > epsilon_min, point: Some(point), binding })
        }
        LpStatus::Infeasible => {
            Ok(Compatibility { epsilon: None, compatible: false, point: None, binding: vec![false; system.len()] })
        }
        LpStatus::Unbounded => Err(Error::Lp("compatibility LP unbounded".into())),
        LpStatus::PivotLimit { pivots, last_row } => {
            let last_row = last_row.map(|r| system.rows().get(r).map_or(Provenance::EpsilonCap, |row| row.provenance));
            Err(Error::PivotLimit { pivots, last_row })
        }
    }
}
