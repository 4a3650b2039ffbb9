use alloc::string::String;

use crate::preference::Provenance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("criterion index {index} out of range for {n} criteria")]
    CriterionOutOfRange { index: usize, n: usize },
    #[error("alternative index {index} out of range for {count} alternatives")]
    AlternativeOutOfRange { index: usize, count: usize },
    #[error("criterion subset {subset:#b} is not contained in a set of {n} criteria")]
    SubsetOutOfRange { subset: u32, n: usize },
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("evaluation {value} is negative; shift the scale so every evaluation is >= 0")]
    NegativeEvaluation { value: f64 },
    #[error("evaluation is not a finite number")]
    NonFiniteEvaluation,
    #[error("interaction index needs two distinct criteria, got {0} twice")]
    SameCriterion(usize),
    #[error("unsupported additivity {0}; only 1 and 2 are supported")]
    UnsupportedAdditivity(u8),
    #[error("{n} criteria: need between 2 and {max}")]
    CriterionCount { n: usize, max: usize },
    #[error("statement {statement} compares alternatives but no point evaluations were supplied")]
    MissingEvaluations { statement: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] contains no integer")]
    NoIntegerInInterval { lo: f64, hi: f64 },
    #[error("linear program: {0}")]
    Lp(String),
    #[error("LP exceeded {pivots} pivots (last pivot row: {last_row:?})")]
    PivotLimit { pivots: usize, last_row: Option<Provenance> },
    #[error("preference statements are incompatible (epsilon* = {epsilon:?})")]
    Incompatible { epsilon: Option<f64> },
    #[error("hit-and-run found no feasible chord after {retries} directions")]
    EmptyChord { retries: usize },
    #[error("hit-and-run chord is unbounded; the polytope is not bounded")]
    UnboundedChord,
    #[error("point does not satisfy the polytope (worst violation {violation:e})")]
    InfeasiblePoint { violation: f64 },
    #[error("no feasible iteration out of {iterations}")]
    NoFeasibleIteration { iterations: u64 },
    #[error("empty sample")]
    EmptySample,
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
