//! Capacities (fuzzy measures) in set-function and Möbius form, and the
//! closed-form quantities built on them: Choquet integral, Shapley
//! importance and pairwise interaction.
//!
//! A 2-additive capacity is stored as its Möbius coefficients in a fixed
//! layout: the `n` singletons first, then the `n(n-1)/2` pairs in
//! lexicographic order `{0,1}, {0,2}, …, {n-2,n-1}`. The same layout is used
//! for the columns of every compiled constraint system.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for constraint satisfaction (normalization, monotonicity).
pub const CONSTRAINT_TOL: f64 = 1e-9;
/// Tolerance for algebraic round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-12;

/// Largest criterion count for set-function representations (2^n entries).
pub const MAX_SET_CRITERIA: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CriterionId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlternativeId(pub usize);

/// A subset of criteria, as a bit mask over criterion indices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct CriteriaSet(u32);

impl CriteriaSet {
    pub const EMPTY: CriteriaSet = CriteriaSet(0);

    pub fn from_bits(bits: u32) -> Self {
        CriteriaSet(bits)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 32);
        if n == 32 {
            CriteriaSet(u32::MAX)
        } else {
            CriteriaSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        CriteriaSet(1 << i)
    }

    pub fn pair(i: usize, j: usize) -> Self {
        CriteriaSet((1 << i) | (1 << j))
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        CriteriaSet(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn insert(self, i: usize) -> Self {
        CriteriaSet(self.0 | (1 << i))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: CriteriaSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Criterion indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        core::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    fn check(self, n: usize) -> Result<()> {
        if self.0 & !CriteriaSet::full(n).0 != 0 {
            Err(Error::SubsetOutOfRange { subset: self.0, n })
        } else {
            Ok(())
        }
    }
}

impl fmt::Debug for CriteriaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Number of unordered criterion pairs.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Number of Möbius coordinates of a 2-additive capacity on `n` criteria.
pub fn mobius_len(n: usize) -> usize {
    n + pair_count(n)
}

/// Column of `m({i,j})` in the Möbius layout. Order of `i` and `j` is irrelevant.
pub fn pair_column(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    n + i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)`, `i < j`, in layout order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Rejects evaluations the Choquet integral cannot take under the
/// `g_(0) = 0` convention.
pub fn check_evaluations(x: &[f64]) -> Result<()> {
    for &v in x {
        if !v.is_finite() {
            return Err(Error::NonFiniteEvaluation);
        }
        if v < 0.0 {
            return Err(Error::NegativeEvaluation { value: v });
        }
    }
    Ok(())
}

/// The vector `c(x)` such that the 2-additive Choquet integral is `m · c(x)`:
/// `x_i` in singleton columns and `min(x_i, x_j)` in pair columns.
pub fn choquet_features(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(mobius_len(n));
    out.extend_from_slice(x);
    for (i, j) in pairs(n) {
        out.push(x[i].min(x[j]));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Additivity {
    Additive,
    TwoAdditive,
}

impl Additivity {
    pub fn from_k(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Additivity::Additive),
            2 => Ok(Additivity::TwoAdditive),
            other => Err(Error::UnsupportedAdditivity(other)),
        }
    }

    pub fn k(self) -> u8 {
        match self {
            Additivity::Additive => 1,
            Additivity::TwoAdditive => 2,
        }
    }
}

/// Möbius representation of a 1- or 2-additive capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusCapacity {
    n: usize,
    additivity: Additivity,
    coefficients: Vec<f64>,
}

impl MobiusCapacity {
    /// Builds a 2-additive capacity from coefficients in layout order.
    /// Structure only; call [`MobiusCapacity::validate`] for 1c/2c.
    pub fn from_coefficients(n: usize, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != mobius_len(n) {
            return Err(Error::DimensionMismatch { expected: mobius_len(n), got: coefficients.len() });
        }
        Ok(MobiusCapacity { n, additivity: Additivity::TwoAdditive, coefficients })
    }

    pub fn new(singles: &[f64], pair_values: &[f64]) -> Result<Self> {
        let n = singles.len();
        if pair_values.len() != pair_count(n) {
            return Err(Error::DimensionMismatch { expected: pair_count(n), got: pair_values.len() });
        }
        let mut coefficients = singles.to_vec();
        coefficients.extend_from_slice(pair_values);
        Ok(MobiusCapacity { n, additivity: Additivity::TwoAdditive, coefficients })
    }

    /// Additive capacity (weighted sum); all pair terms are exactly zero.
    pub fn additive(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut coefficients = weights.to_vec();
        coefficients.resize(mobius_len(n), 0.0);
        MobiusCapacity { n, additivity: Additivity::Additive, coefficients }
    }

    pub fn uniform(n: usize) -> Self {
        MobiusCapacity::additive(&vec![1.0 / n as f64; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn additivity(&self) -> Additivity {
        self.additivity
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn singles(&self) -> &[f64] {
        &self.coefficients[..self.n]
    }

    pub fn pair_values(&self) -> &[f64] {
        &self.coefficients[self.n..]
    }

    pub fn single(&self, i: usize) -> f64 {
        self.coefficients[i]
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.coefficients[pair_column(self.n, i, j)]
    }

    fn check_criterion(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(Error::CriterionOutOfRange { index: i, n: self.n })
        } else {
            Ok(())
        }
    }

    /// `μ(S) = Σ_{i∈S} m({i}) + Σ_{{i,j}⊆S} m({i,j})`.
    pub fn mu(&self, subset: CriteriaSet) -> Result<f64> {
        subset.check(self.n)?;
        let members: Vec<usize> = subset.iter().collect();
        let mut total = 0.0;
        for (a, &i) in members.iter().enumerate() {
            total += self.coefficients[i];
            for &j in &members[a + 1..] {
                total += self.pair(i, j);
            }
        }
        Ok(total)
    }

    /// The set-function view over all `2^n` subsets.
    pub fn to_capacity(&self) -> Result<CapacityView> {
        if self.n > MAX_SET_CRITERIA {
            return Err(Error::CriterionCount { n: self.n, max: MAX_SET_CRITERIA });
        }
        let values = (0..1u32 << self.n).map(|bits| self.mu(CriteriaSet(bits))).collect::<Result<Vec<_>>>()?;
        Ok(CapacityView { n: self.n, values })
    }

    /// Shapley importance `m({i}) + Σ_{j≠i} m({i,j}) / 2`.
    pub fn shapley(&self, i: CriterionId) -> Result<f64> {
        self.check_criterion(i.0)?;
        let i = i.0;
        let half_pairs: f64 = (0..self.n).filter(|&j| j != i).map(|j| self.pair(i, j) / 2.0).sum();
        Ok(self.coefficients[i] + half_pairs)
    }

    pub fn shapley_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.shapley(CriterionId(i)).expect("index in range")).collect()
    }

    /// Interaction index of a pair; for 2-additive capacities this is `m({i,j})`.
    pub fn interaction(&self, i: CriterionId, j: CriterionId) -> Result<f64> {
        self.check_criterion(i.0)?;
        self.check_criterion(j.0)?;
        if i == j {
            return Err(Error::SameCriterion(i.0));
        }
        Ok(self.pair(i.0, j.0))
    }

    /// Choquet integral in Möbius form:
    /// `Σ_i m({i}) x_i + Σ_{i<j} m({i,j}) min(x_i, x_j)`.
    pub fn choquet(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        check_evaluations(x)?;
        Ok(choquet_unchecked(&self.coefficients, x))
    }

    /// Checks 1c, 2c and, for additive capacities, that pairs vanish.
    ///
    /// Monotonicity uses the shortcut `T* = {j : m({i,j}) < 0}`: the sum
    /// `m({i}) + Σ_{j∈T} m({i,j})` is smallest at `T*`, so one check per
    /// criterion covers every nonempty `T`.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.validate_common();
        for i in 0..self.n {
            let mut subset = CriteriaSet::EMPTY;
            let mut margin = self.coefficients[i];
            for j in (0..self.n).filter(|&j| j != i) {
                let v = self.pair(i, j);
                if v < 0.0 {
                    subset = subset.insert(j);
                    margin += v;
                }
            }
            if !subset.is_empty() && margin < -CONSTRAINT_TOL {
                report.violations.push(Violation::Monotonicity { criterion: i, subset, margin });
            }
        }
        report
    }

    /// Same as [`MobiusCapacity::validate`] but checks monotonicity over
    /// every `(i, T)` with `T ⊆ G \ {i}` nonempty; reports each violated pair.
    pub fn validate_exhaustive(&self) -> ValidationReport {
        let mut report = self.validate_common();
        for i in 0..self.n {
            let others = CriteriaSet::full(self.n).0 & !(1 << i);
            for_each_nonempty_submask(others, |t| {
                let subset = CriteriaSet(t);
                let margin = self.coefficients[i] + subset.iter().map(|j| self.pair(i, j)).sum::<f64>();
                if margin < -CONSTRAINT_TOL {
                    report.violations.push(Violation::Monotonicity { criterion: i, subset, margin });
                }
            });
        }
        report
    }

    fn validate_common(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let sum: f64 = self.coefficients.iter().sum();
        if (sum - 1.0).abs() > CONSTRAINT_TOL {
            violations.push(Violation::Normalization { sum });
        }
        for (i, &v) in self.singles().iter().enumerate() {
            if v < -CONSTRAINT_TOL {
                violations.push(Violation::NegativeSingleton { criterion: i, value: v });
            }
        }
        if self.additivity == Additivity::Additive {
            for (i, j) in pairs(self.n) {
                let v = self.pair(i, j);
                if v != 0.0 {
                    violations.push(Violation::NonzeroPair { i, j, value: v });
                }
            }
        }
        ValidationReport { violations }
    }
}

pub(crate) fn choquet_unchecked(coefficients: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for i in 0..n {
        total += coefficients[i] * x[i];
    }
    let mut col = n;
    for i in 0..n {
        for j in i + 1..n {
            total += coefficients[col] * x[i].min(x[j]);
            col += 1;
        }
    }
    total
}

fn for_each_nonempty_submask(mask: u32, mut f: impl FnMut(u32)) {
    let mut sub = mask;
    while sub != 0 {
        f(sub);
        sub = (sub - 1) & mask;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Coefficients do not sum to one.
    Normalization {
        sum: f64,
    },
    NegativeSingleton {
        criterion: usize,
        value: f64,
    },
    /// `m({i}) + Σ_{j∈T} m({i,j}) < 0`.
    Monotonicity {
        criterion: usize,
        subset: CriteriaSet,
        margin: f64,
    },
    /// Nonzero pair term on a capacity declared additive.
    NonzeroPair {
        i: usize,
        j: usize,
        value: f64,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A capacity as a set function over all subsets (indexed by bit mask).
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityView {
    n: usize,
    values: Vec<f64>,
}

impl CapacityView {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_SET_CRITERIA {
            return Err(Error::CriterionCount { n, max: MAX_SET_CRITERIA });
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: values.len() });
        }
        Ok(CapacityView { n, values })
    }

    /// Additive capacity with `μ({i}) = w_i`.
    pub fn additive(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        let values = (0..1u32 << n).map(|bits| CriteriaSet(bits).iter().map(|i| weights[i]).sum()).collect();
        CapacityView::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mu(&self, subset: CriteriaSet) -> Result<f64> {
        subset.check(self.n)?;
        Ok(self.values[subset.0 as usize])
    }

    /// Boundary conditions and monotonicity (checked on covering pairs `S ⊂ S ∪ {i}`).
    pub fn is_valid(&self) -> bool {
        let full = CriteriaSet::full(self.n).0 as usize;
        if self.values[0].abs() > CONSTRAINT_TOL || (self.values[full] - 1.0).abs() > CONSTRAINT_TOL {
            return false;
        }
        (0..=full).all(|s| {
            (0..self.n)
                .filter(|&i| s & (1 << i) == 0)
                .all(|i| self.values[s] <= self.values[s | (1 << i)] + CONSTRAINT_TOL)
        })
    }

    /// Choquet integral by the sorting formula
    /// `Σ_i [x_(i) − x_(i−1)] μ({(i), …, (n)})` with `x_(0) = 0`.
    /// Ties are ordered by criterion index.
    pub fn choquet(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        check_evaluations(x)?;
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let mut upper = CriteriaSet::full(self.n).0;
        let mut previous = 0.0;
        let mut total = 0.0;
        for &i in &order {
            total += (x[i] - previous) * self.values[upper as usize];
            previous = x[i];
            upper &= !(1 << i);
        }
        Ok(total)
    }

    /// `m(S) = Σ_{T⊆S} (−1)^{|S−T|} μ(T)` for every subset.
    pub fn to_mobius(&self) -> GeneralMobius {
        let size = 1usize << self.n;
        let mut values = vec![0.0; size];
        for (s, slot) in values.iter_mut().enumerate() {
            let s = s as u32;
            let mut acc = self.values[0] * sign(s.count_ones());
            for_each_nonempty_submask(s, |t| {
                acc += sign((s & !t).count_ones()) * self.values[t as usize];
            });
            *slot = acc;
        }
        GeneralMobius { n: self.n, values }
    }
}

fn sign(k: u32) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Möbius representation over all subsets (any order of additivity).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralMobius {
    n: usize,
    values: Vec<f64>,
}

impl GeneralMobius {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n > MAX_SET_CRITERIA {
            return Err(Error::CriterionCount { n, max: MAX_SET_CRITERIA });
        }
        if values.len() != 1 << n {
            return Err(Error::DimensionMismatch { expected: 1 << n, got: values.len() });
        }
        Ok(GeneralMobius { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self, subset: CriteriaSet) -> Result<f64> {
        subset.check(self.n)?;
        Ok(self.values[subset.0 as usize])
    }

    /// `μ(S) = Σ_{T⊆S} m(T)`.
    pub fn mu(&self, subset: CriteriaSet) -> Result<f64> {
        subset.check(self.n)?;
        let mut acc = self.values[0];
        for_each_nonempty_submask(subset.0, |t| acc += self.values[t as usize]);
        Ok(acc)
    }

    pub fn to_capacity(&self) -> CapacityView {
        let values = (0..1u32 << self.n).map(|s| self.mu(CriteriaSet(s)).expect("in range")).collect();
        CapacityView { n: self.n, values }
    }

    /// `Σ_T m(T) min_{i∈T} x_i`.
    pub fn choquet(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        check_evaluations(x)?;
        let mut total = 0.0;
        for (t, &m) in self.values.iter().enumerate().skip(1) {
            let min = CriteriaSet(t as u32).iter().map(|i| x[i]).fold(f64::INFINITY, f64::min);
            total += m * min;
        }
        Ok(total)
    }

    /// Largest `|m(T)|` over subsets with more than two criteria.
    pub fn higher_order_mass(&self) -> f64 {
        self.values.iter().enumerate().filter(|(t, _)| t.count_ones() > 2).map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Restriction to singletons and pairs, if higher-order terms vanish.
    pub fn to_two_additive(&self) -> Result<MobiusCapacity> {
        let mass = self.higher_order_mass();
        if mass > ROUND_TRIP_TOL {
            return Err(Error::InvalidInput(alloc::format!(
                "capacity is not 2-additive (higher-order Möbius mass {mass:e})"
            )));
        }
        let singles: Vec<f64> = (0..self.n).map(|i| self.values[1 << i]).collect();
        let pair_values: Vec<f64> = pairs(self.n).map(|(i, j)| self.values[(1 << i) | (1 << j)]).collect();
        MobiusCapacity::new(&singles, &pair_values)
    }
}

impl From<&MobiusCapacity> for GeneralMobius {
    fn from(m: &MobiusCapacity) -> Self {
        let mut values = vec![0.0; 1 << m.n];
        for i in 0..m.n {
            values[1 << i] = m.single(i);
        }
        for (i, j) in pairs(m.n) {
            values[(1 << i) | (1 << j)] = m.pair(i, j);
        }
        GeneralMobius { n: m.n, values }
    }
}
