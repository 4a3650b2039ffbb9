//! Monte Carlo engine and acceptability indices.
//!
//! A run draws capacities from the compatible polytope (and, when the
//! evaluations are uncertain, evaluation matrices or common scales), ranks
//! the alternatives by their Choquet values and accumulates integer tallies.
//! Work is split across workers with independent streams; per-worker
//! [`Tally`] values merge exactly, so the result does not depend on how the
//! workers are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::capacity::{choquet_features, mobius_len, pairs, Additivity, CriterionId};
use crate::error::{Error, Result};
use crate::preference::{
    check_compatibility, compile_mb, compile_preferences, compile_with_features, ConstraintRow, LinearConstraintSystem,
    Provenance, Relation, Statement, DEFAULT_EPSILON_MIN,
};
use crate::rng::{self, CONFIDENCE_STREAM_BASE};
use crate::sampling::evaluations::{
    sample_eval_matrix_into, sample_scale_column, Direction, EvalSampling, IntervalMatrix,
};
use crate::sampling::polytope::{freeze_epsilon, seed_point, HitAndRun, Polytope};

/// Fixed-point scale for Möbius sums (exact, order-independent merging).
const FIXED_SCALE: f64 = (1u64 << 52) as f64;
/// Tolerance of the "necessarily preferred" approximation, in percent.
pub const NECESSARY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub iterations: u64,
    pub seed: u64,
    pub burn_in: u64,
    /// Chain steps between stored capacities.
    pub thinning: u64,
    pub workers: usize,
    pub eval_sampling: EvalSampling,
    pub epsilon_min: f64,
    /// Chain steps per iteration when the constraint system changes every
    /// iteration (uncertain evaluations with alternative statements).
    pub inner_steps: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            iterations: 100_000,
            seed: 0,
            burn_in: 1_000,
            thinning: 1,
            workers: 1,
            eval_sampling: EvalSampling::Continuous,
            epsilon_min: DEFAULT_EPSILON_MIN,
            inner_steps: 20,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidInput("workers must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidInput("thinning must be at least 1".into()));
        }
        if !(self.epsilon_min.is_finite() && self.epsilon_min >= 0.0) {
            return Err(Error::InvalidInput("epsilon_min must be a nonnegative number".into()));
        }
        Ok(())
    }

    /// Iterations assigned to `worker`: `N / W`, plus one for the first `N % W` workers.
    pub fn iterations_for(&self, worker: usize) -> u64 {
        let w = self.workers as u64;
        self.iterations / w + u64::from((worker as u64) < self.iterations % w)
    }
}

/// How the evaluations are known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluationData {
    /// Precise evaluations on a common scale.
    Points { matrix: Vec<Vec<f64>> },
    /// Interval evaluations on a common scale.
    Intervals { matrix: IntervalMatrix },
    /// Precise evaluations on heterogeneous scales; a common scale is sampled.
    Raw { matrix: Vec<Vec<f64>>, directions: Vec<Direction> },
}

impl EvaluationData {
    pub fn alternatives(&self) -> usize {
        match self {
            EvaluationData::Points { matrix } | EvaluationData::Raw { matrix, .. } => matrix.len(),
            EvaluationData::Intervals { matrix } => matrix.alternatives(),
        }
    }

    pub fn case(&self) -> Case {
        match self {
            EvaluationData::Points { .. } => Case::Precise,
            EvaluationData::Intervals { .. } => Case::Interval,
            EvaluationData::Raw { .. } => Case::Scale,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// Point evaluations on a common scale.
    Precise,
    /// Interval evaluations.
    Interval,
    /// Heterogeneous scales, sampled jointly with the capacity.
    Scale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmaaProblem {
    pub criteria: usize,
    pub data: EvaluationData,
    pub statements: Vec<Statement>,
    pub additivity: Additivity,
}

impl SmaaProblem {
    pub fn new(criteria: usize, data: EvaluationData, statements: Vec<Statement>) -> Self {
        SmaaProblem { criteria, data, statements, additivity: Additivity::TwoAdditive }
    }

    fn validate(&self) -> Result<()> {
        let n = self.criteria;
        if self.data.alternatives() == 0 {
            return Err(Error::InvalidInput("no alternatives".into()));
        }
        let check_rows = |m: &Vec<Vec<f64>>| -> Result<()> {
            for row in m {
                if row.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: row.len() });
                }
                crate::capacity::check_evaluations(row)?;
            }
            Ok(())
        };
        match &self.data {
            EvaluationData::Points { matrix } => check_rows(matrix),
            EvaluationData::Raw { matrix, directions } => {
                if directions.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: directions.len() });
                }
                for row in matrix {
                    if row.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: row.len() });
                    }
                    if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::NonFiniteEvaluation);
                    }
                }
                Ok(())
            }
            EvaluationData::Intervals { matrix } => {
                if matrix.criteria() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: matrix.criteria() });
                }
                Ok(())
            }
        }
    }
}

/// Rank of alternative `k`: one plus the number of strictly larger values.
pub fn rank_of(values: &[f64], k: usize) -> usize {
    1 + values.iter().filter(|&&v| v > values[k]).count()
}

/// Ranks of all alternatives.
pub fn ranks(values: &[f64]) -> Vec<usize> {
    (0..values.len()).map(|k| rank_of(values, k)).collect()
}

fn to_fixed(v: f64) -> i128 {
    libm::round(v * FIXED_SCALE) as i128
}

fn from_fixed(sum: i128, count: u64) -> f64 {
    (sum as f64 / FIXED_SCALE) / count as f64
}

/// Integer counters accumulated by one worker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub alternatives: usize,
    pub dim: usize,
    /// `rank_counts[k * l + (r - 1)]`.
    pub rank_counts: Vec<u64>,
    /// Fixed-point Möbius sums over iterations where `k` ranks first.
    pub first_sums: Vec<i128>,
    /// Fixed-point Möbius sum over all counted iterations.
    pub sum: Vec<i128>,
    /// `strict[h * l + k]`: iterations with `C(a_h) > C(a_k)`.
    pub strict: Vec<u64>,
    /// `indifferent[h * l + k]`: iterations with `C(a_h) = C(a_k)`.
    pub indifferent: Vec<u64>,
    pub total: u64,
    pub feasible: u64,
}

impl Tally {
    pub fn new(alternatives: usize, dim: usize) -> Self {
        let l = alternatives;
        Tally {
            alternatives,
            dim,
            rank_counts: vec![0; l * l],
            first_sums: vec![0; l * dim],
            sum: vec![0; dim],
            strict: vec![0; l * l],
            indifferent: vec![0; l * l],
            total: 0,
            feasible: 0,
        }
    }

    /// Counts an iteration without a compatible capacity.
    pub fn record_infeasible(&mut self) {
        self.total += 1;
    }

    /// Counts one feasible iteration with capacity `mobius` and Choquet `values`.
    pub fn record(&mut self, mobius: &[f64], values: &[f64]) {
        let l = self.alternatives;
        self.total += 1;
        self.feasible += 1;
        let fixed: Vec<i128> = mobius.iter().map(|&v| to_fixed(v)).collect();
        for (s, f) in self.sum.iter_mut().zip(&fixed) {
            *s += f;
        }
        for k in 0..l {
            let r = rank_of(values, k);
            self.rank_counts[k * l + r - 1] += 1;
            if r == 1 {
                for (s, f) in self.first_sums[k * self.dim..(k + 1) * self.dim].iter_mut().zip(&fixed) {
                    *s += f;
                }
            }
            for h in 0..l {
                if values[h] > values[k] {
                    self.strict[h * l + k] += 1;
                } else if values[h] == values[k] && h != k {
                    self.indifferent[h * l + k] += 1;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &Tally) -> Result<()> {
        if other.alternatives != self.alternatives || other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.alternatives, got: other.alternatives });
        }
        let add = |a: &mut [u64], b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.rank_counts, &other.rank_counts);
        add(&mut self.strict, &other.strict);
        add(&mut self.indifferent, &other.indifferent);
        self.first_sums.iter_mut().zip(&other.first_sums).for_each(|(x, y)| *x += y);
        self.sum.iter_mut().zip(&other.sum).for_each(|(x, y)| *x += y);
        self.total += other.total;
        self.feasible += other.feasible;
        Ok(())
    }

    pub fn first_count(&self, k: usize) -> u64 {
        self.rank_counts[k * self.alternatives]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmaaResults {
    pub case: Case,
    pub alternatives: usize,
    pub criteria: usize,
    pub iterations_total: u64,
    pub iterations_feasible: u64,
    /// `rank_acceptability[k][r - 1]`, percent.
    pub rank_acceptability: Vec<Vec<f64>>,
    pub first_rank_counts: Vec<u64>,
    /// Mean capacity over iterations where the alternative ranks first.
    pub central: Vec<Option<Vec<f64>>>,
    /// Percent of evaluation draws where the alternative ranks first under its central capacity.
    pub confidence: Vec<Option<f64>>,
    pub barycenter: Vec<f64>,
    /// `pref_strict[h][k]`: percent of iterations with `C(a_h) > C(a_k)`.
    pub pref_strict: Vec<Vec<f64>>,
    pub pref_indiff: Vec<Vec<f64>>,
    /// LP optimum of the fixed system (absent when the system changes per iteration).
    pub epsilon_star: Option<f64>,
    /// Strictness margin used while sampling the fixed system.
    pub epsilon_freeze: Option<f64>,
}

impl SmaaResults {
    pub fn central_capacity(&self, k: usize) -> Option<&[f64]> {
        self.central.get(k).and_then(|c| c.as_deref())
    }

    /// Approximation of the necessary relation: `a_h` is at least as good
    /// as `a_k` in every counted iteration.
    pub fn necessary_approx(&self) -> Vec<Vec<bool>> {
        naror_approx(&self.pref_strict, &self.pref_indiff).0
    }

    /// Approximation of the possible relation: `a_h` beats `a_k` at least once.
    pub fn possible_approx(&self) -> Vec<Vec<bool>> {
        naror_approx(&self.pref_strict, &self.pref_indiff).1
    }

    pub fn extreme_ranks(&self) -> Vec<Option<(usize, usize)>> {
        extreme_ranks(&self.rank_acceptability)
    }
}

/// `(necessary, possible)` approximations from preference frequencies.
pub fn naror_approx(pref_strict: &[Vec<f64>], pref_indiff: &[Vec<f64>]) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
    let necessary = pref_strict
        .iter()
        .zip(pref_indiff)
        .map(|(s, i)| s.iter().zip(i).map(|(a, b)| a + b >= 100.0 - NECESSARY_TOL).collect())
        .collect();
    let possible = pref_strict.iter().map(|s| s.iter().map(|&a| a > 0.0).collect()).collect();
    (necessary, possible)
}

/// Best and worst rank with positive acceptability, one-based.
pub fn extreme_ranks(rank_acceptability: &[Vec<f64>]) -> Vec<Option<(usize, usize)>> {
    rank_acceptability
        .iter()
        .map(|row| {
            let best = row.iter().position(|&b| b > 0.0)?;
            let worst = row.iter().rposition(|&b| b > 0.0)?;
            Some((best + 1, worst + 1))
        })
        .collect()
}

/// Componentwise mean of capacities.
pub fn barycenter(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = samples.first().ok_or(Error::EmptySample)?;
    let mut sum = vec![0i128; first.len()];
    for s in samples {
        if s.len() != sum.len() {
            return Err(Error::DimensionMismatch { expected: sum.len(), got: s.len() });
        }
        sum.iter_mut().zip(s).for_each(|(a, &v)| *a += to_fixed(v));
    }
    Ok(sum.iter().map(|&v| from_fixed(v, samples.len() as u64)).collect())
}

/// How capacities are drawn.
#[derive(Clone, Debug)]
enum Plan {
    /// One system for the whole run.
    Fixed { polytope: Polytope, start: Vec<f64>, epsilon_star: f64, epsilon_freeze: f64 },
    /// Alternative statements over uncertain evaluations: the system is
    /// recompiled for every sampled matrix.
    PerIteration { base: LinearConstraintSystem },
}

/// A problem compiled for sampling; workers share it read-only.
#[derive(Clone, Debug)]
pub struct PreparedRun {
    problem: SmaaProblem,
    config: RunConfig,
    plan: Plan,
    /// Choquet feature vectors for point data.
    features: Vec<Vec<f64>>,
    alt_statements: Vec<Statement>,
}

fn additivity_rows(n: usize) -> LinearConstraintSystem {
    let width = mobius_len(n) + 1;
    let mut sys = LinearConstraintSystem::empty(n);
    for (i, j) in pairs(n) {
        let mut a = vec![0.0; width];
        a[crate::capacity::pair_column(n, i, j)] = 1.0;
        sys.push(ConstraintRow {
            coefficients: a,
            relation: Relation::Eq,
            rhs: 0.0,
            provenance: Provenance::Additive { first: i, second: j },
        })
        .expect("row width matches");
    }
    sys
}

/// Boundary, monotonicity and criterion-statement rows, plus the additive
/// restriction when requested.
fn base_system(problem: &SmaaProblem, criterion_statements: &[Statement]) -> Result<LinearConstraintSystem> {
    let n = problem.criteria;
    let mut sys = compile_mb(n)?;
    if problem.additivity == Additivity::Additive {
        sys.extend(additivity_rows(n))?;
    }
    sys.extend(compile_preferences(n, criterion_statements, None)?)?;
    Ok(sys)
}

/// Compiles the problem and finds a starting point.
pub fn prepare(problem: &SmaaProblem, config: &RunConfig) -> Result<PreparedRun> {
    config.validate()?;
    problem.validate()?;
    let n = problem.criteria;
    let l = problem.data.alternatives();
    if let EvaluationData::Intervals { matrix } = &problem.data {
        matrix.check_mode(config.eval_sampling)?;
    }
    // Statement ids must stay positions in the full list, so criterion rows
    // are compiled from the full list with alternative rows dropped.
    let alternatives = Some(l);
    for (k, s) in problem.statements.iter().enumerate() {
        check_statement(s, n, alternatives, k)?;
    }
    let alt_statements: Vec<Statement> =
        problem.statements.iter().copied().filter(Statement::references_alternatives).collect();

    let features: Vec<Vec<f64>> = match &problem.data {
        EvaluationData::Points { matrix } => matrix.iter().map(|x| choquet_features(x)).collect(),
        _ => Vec::new(),
    };

    let fixed_system = match &problem.data {
        EvaluationData::Points { matrix } => {
            let mut sys = base_system(problem, &[])?;
            sys.extend(compile_preferences(n, &problem.statements, Some(matrix))?)?;
            Some(sys)
        }
        _ if alt_statements.is_empty() => {
            let mut sys = base_system(problem, &[])?;
            sys.extend(compile_preferences(n, &problem.statements, None)?)?;
            Some(sys)
        }
        _ => None,
    };

    let plan = match fixed_system {
        Some(system) => {
            let seed = seed_point(&system, config.epsilon_min)?;
            let polytope = Polytope::from_system(&system, seed.epsilon_freeze)?;
            Plan::Fixed {
                polytope,
                start: seed.point,
                epsilon_star: seed.epsilon_star,
                epsilon_freeze: seed.epsilon_freeze,
            }
        }
        None => {
            let criterion_statements: Vec<Statement> =
                problem.statements.iter().copied().filter(|s| !s.references_alternatives()).collect();
            let base = base_system(problem, &criterion_statements)?;
            let compat = check_compatibility(&base, config.epsilon_min)?;
            if !compat.compatible {
                return Err(Error::Incompatible { epsilon: compat.epsilon });
            }
            Plan::PerIteration { base }
        }
    };

    Ok(PreparedRun { problem: problem.clone(), config: config.clone(), plan, features, alt_statements })
}

fn check_statement(s: &Statement, n: usize, alternatives: Option<usize>, index: usize) -> Result<()> {
    // Reuse the compiler's id checks on a throwaway single-statement list.
    let dummy = alternatives.map(|l| vec![vec![0.0; n]; l]);
    compile_preferences(n, core::slice::from_ref(s), dummy.as_deref()).map(|_| ()).map_err(|e| match e {
        Error::MissingEvaluations { .. } => Error::MissingEvaluations { statement: index },
        other => other,
    })
}

/// Per-worker sampling state for uncertain evaluations.
struct EvalState {
    matrix: Vec<Vec<f64>>,
    features: Vec<Vec<f64>>,
}

impl PreparedRun {
    pub fn problem(&self) -> &SmaaProblem {
        &self.problem
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn alternatives(&self) -> usize {
        self.problem.data.alternatives()
    }

    pub fn dim(&self) -> usize {
        mobius_len(self.problem.criteria)
    }

    pub fn epsilon_star(&self) -> Option<f64> {
        match &self.plan {
            Plan::Fixed { epsilon_star, .. } => Some(*epsilon_star),
            Plan::PerIteration { .. } => None,
        }
    }

    pub fn epsilon_freeze(&self) -> Option<f64> {
        match &self.plan {
            Plan::Fixed { epsilon_freeze, .. } => Some(*epsilon_freeze),
            Plan::PerIteration { .. } => None,
        }
    }

    /// Draws a fresh evaluation matrix (or scale) into `state`.
    fn sample_evaluations<R: rand::Rng + ?Sized>(&self, rng: &mut R, state: &mut EvalState) -> Result<()> {
        match &self.problem.data {
            EvaluationData::Points { .. } => return Ok(()),
            EvaluationData::Intervals { matrix } => {
                sample_eval_matrix_into(matrix, self.config.eval_sampling, rng, &mut state.matrix)?;
            }
            EvaluationData::Raw { matrix, directions } => {
                for (i, &dir) in directions.iter().enumerate() {
                    let column: Vec<f64> = matrix.iter().map(|r| r[i]).collect();
                    let scale = sample_scale_column(&column, dir, rng);
                    for (dst, &raw) in state.matrix.iter_mut().zip(&column) {
                        dst[i] = scale.value_of(raw).expect("level present");
                    }
                }
            }
        }
        for (f, x) in state.features.iter_mut().zip(&state.matrix) {
            *f = choquet_features(x);
        }
        Ok(())
    }

    fn new_eval_state(&self) -> EvalState {
        let l = self.alternatives();
        let n = self.problem.criteria;
        EvalState { matrix: vec![vec![0.0; n]; l], features: vec![vec![0.0; mobius_len(n)]; l] }
    }

    /// Runs worker `worker` on its share of the iterations.
    pub fn run_worker(&self, worker: usize) -> Result<Tally> {
        let iterations = self.config.iterations_for(worker);
        let mut rng = rng::worker_rng(self.config.seed, worker);
        let l = self.alternatives();
        let mut tally = Tally::new(l, self.dim());
        if iterations == 0 {
            return Ok(tally);
        }
        let mut values = vec![0.0; l];
        let mut state = self.new_eval_state();
        match &self.plan {
            Plan::Fixed { polytope, start, .. } => {
                let mut chain = HitAndRun::new(polytope.clone(), start.clone())?;
                for _ in 0..self.config.burn_in {
                    chain.step(&mut rng)?;
                }
                for _ in 0..iterations {
                    self.sample_evaluations(&mut rng, &mut state)?;
                    for _ in 0..self.config.thinning {
                        chain.step(&mut rng)?;
                    }
                    let m = chain.point();
                    let features = if self.features.is_empty() { &state.features } else { &self.features };
                    for (v, f) in values.iter_mut().zip(features) {
                        *v = dot(m, f);
                    }
                    tally.record(m, &values);
                }
            }
            Plan::PerIteration { base } => {
                let mut previous: Option<Vec<f64>> = None;
                for _ in 0..iterations {
                    self.sample_evaluations(&mut rng, &mut state)?;
                    let mut system = base.clone();
                    system.extend(compile_with_features(
                        self.problem.criteria,
                        &self.alt_statements,
                        &state.features,
                    ))?;
                    let compat = check_compatibility(&system, self.config.epsilon_min)?;
                    let eps = match compat.epsilon {
                        Some(e) if compat.compatible => e,
                        _ => {
                            tally.record_infeasible();
                            continue;
                        }
                    };
                    let freeze = freeze_epsilon(eps, self.config.epsilon_min);
                    let polytope = Polytope::from_system(&system, freeze)?;
                    let lp_point = compat.point.as_deref().expect("optimal LP has a point");
                    let lp_point = &lp_point[..self.dim()];
                    // Carry the previous draw over, repaired towards the LP point if the
                    // new system cuts it off; start afresh only when that fails.
                    let carried = previous.take().and_then(|p| {
                        if polytope.contains(&p) {
                            Some(p)
                        } else {
                            polytope.blend_towards(&p, lp_point)
                        }
                    });
                    let (start, steps) = match carried {
                        Some(p) => (p, self.config.inner_steps),
                        None => {
                            let start = match polytope.interior_point()? {
                                Some(p) if polytope.contains(&p) => p,
                                _ => lp_point.to_vec(),
                            };
                            (start, self.config.inner_steps.max(self.config.burn_in.min(100)))
                        }
                    };
                    let mut chain = HitAndRun::new(polytope, start)?;
                    for _ in 0..steps.max(1) {
                        chain.step(&mut rng)?;
                    }
                    let m = chain.point();
                    for (v, f) in values.iter_mut().zip(&state.features) {
                        *v = dot(m, f);
                    }
                    tally.record(m, &values);
                    previous = Some(m.to_vec());
                }
            }
        }
        Ok(tally)
    }

    /// Turns merged tallies into percentages, central capacities and the barycenter.
    /// Confidence factors are left empty; see [`PreparedRun::confidence`].
    pub fn summarize(&self, tally: &Tally) -> Result<SmaaResults> {
        if tally.feasible == 0 {
            return Err(Error::NoFeasibleIteration { iterations: tally.total });
        }
        let l = self.alternatives();
        let dim = self.dim();
        let denom = tally.feasible as f64;
        let percent = |c: u64| c as f64 * 100.0 / denom;
        let matrix = |counts: &[u64]| -> Vec<Vec<f64>> {
            (0..l).map(|h| (0..l).map(|k| percent(counts[h * l + k])).collect()).collect()
        };
        let first_rank_counts: Vec<u64> = (0..l).map(|k| tally.first_count(k)).collect();
        let central = (0..l)
            .map(|k| {
                let c = first_rank_counts[k];
                (c > 0).then(|| tally.first_sums[k * dim..(k + 1) * dim].iter().map(|&s| from_fixed(s, c)).collect())
            })
            .collect();
        Ok(SmaaResults {
            case: self.problem.data.case(),
            alternatives: l,
            criteria: self.problem.criteria,
            iterations_total: tally.total,
            iterations_feasible: tally.feasible,
            rank_acceptability: matrix(&tally.rank_counts),
            first_rank_counts,
            central,
            confidence: vec![None; l],
            barycenter: tally.sum.iter().map(|&s| from_fixed(s, tally.feasible)).collect(),
            pref_strict: matrix(&tally.strict),
            pref_indiff: matrix(&tally.indifferent),
            epsilon_star: self.epsilon_star(),
            epsilon_freeze: self.epsilon_freeze(),
        })
    }

    /// Confidence factor of alternative `k` under capacity `central`.
    ///
    /// With precise evaluations this is 100 or 0. Otherwise evaluation
    /// matrices (or scales) are redrawn `iterations` times from a stream
    /// reserved for `k`, with the capacity held fixed.
    pub fn confidence(&self, k: usize, central: &[f64]) -> Result<f64> {
        let l = self.alternatives();
        if k >= l {
            return Err(Error::AlternativeOutOfRange { index: k, count: l });
        }
        if central.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: central.len() });
        }
        let mut values = vec![0.0; l];
        if !self.features.is_empty() {
            for (v, f) in values.iter_mut().zip(&self.features) {
                *v = dot(central, f);
            }
            return Ok(if rank_of(&values, k) == 1 { 100.0 } else { 0.0 });
        }
        let mut rng = rng::substream(self.config.seed, CONFIDENCE_STREAM_BASE + k as u64);
        let mut state = self.new_eval_state();
        let mut wins = 0u64;
        for _ in 0..self.config.iterations {
            self.sample_evaluations(&mut rng, &mut state)?;
            for (v, f) in values.iter_mut().zip(&state.features) {
                *v = dot(central, f);
            }
            if rank_of(&values, k) == 1 {
                wins += 1;
            }
        }
        Ok(wins as f64 * 100.0 / self.config.iterations as f64)
    }

    /// Fills `results.confidence` for every alternative with a central capacity.
    pub fn fill_confidence(&self, results: &mut SmaaResults) -> Result<()> {
        for k in 0..results.alternatives {
            results.confidence[k] = match &results.central[k] {
                Some(c) => Some(self.confidence(k, c)?),
                None => None,
            };
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Runs every worker in sequence, merges, and computes all indices.
pub fn run(problem: &SmaaProblem, config: &RunConfig) -> Result<SmaaResults> {
    let prepared = prepare(problem, config)?;
    let mut tally = Tally::new(prepared.alternatives(), prepared.dim());
    for w in 0..config.workers {
        tally.merge(&prepared.run_worker(w)?)?;
    }
    let mut results = prepared.summarize(&tally)?;
    prepared.fill_confidence(&mut results)?;
    Ok(results)
}

/// Shapley values of a capacity, as reported next to central capacities.
pub fn shapley_of(n: usize, mobius: &[f64]) -> Result<Vec<f64>> {
    let m = crate::capacity::MobiusCapacity::from_coefficients(n, mobius.to_vec())?;
    (0..n).map(|i| m.shapley(CriterionId(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{AlternativeId, MobiusCapacity};
    use crate::preference::Comparison;
    use crate::sampling::Interval;

    fn small_config(iterations: u64) -> RunConfig {
        RunConfig { iterations, seed: 42, burn_in: 50, ..RunConfig::default() }
    }

    #[test]
    fn rank_function() {
        assert_eq!(ranks(&[3.0, 5.0, 5.0, 1.0]), [3, 1, 1, 4]);
        assert_eq!(ranks(&[2.0; 4]), [1, 1, 1, 1]);
        assert_eq!(ranks(&[4.0, 3.0, 2.0, 1.0]), [1, 2, 3, 4]);
    }

    #[test]
    fn single_alternative() {
        let p = SmaaProblem::new(2, EvaluationData::Points { matrix: vec![vec![1.0, 2.0]] }, vec![]);
        let r = run(&p, &small_config(100)).unwrap();
        assert_eq!(r.rank_acceptability, vec![vec![100.0]]);
        assert_eq!(r.pref_strict, vec![vec![0.0]]);
        assert_eq!(r.extreme_ranks(), vec![Some((1, 1))]);
        assert_eq!(r.confidence, vec![Some(100.0)]);
    }

    #[test]
    fn dominance() {
        let m = vec![vec![5.0, 6.0, 7.0], vec![4.0, 6.0, 2.0]];
        let p = SmaaProblem::new(3, EvaluationData::Points { matrix: m }, vec![]);
        let r = run(&p, &small_config(500)).unwrap();
        assert_eq!(r.pref_strict[0][1], 100.0);
        assert_eq!(r.pref_strict[1][0], 0.0);
        assert!(r.necessary_approx()[0][1]);
        assert!(!r.possible_approx()[1][0]);
        assert_eq!(r.central_capacity(1), None);
        assert_eq!(r.confidence[1], None);
    }

    #[test]
    fn tally_merge_is_order_independent() {
        let mut a = Tally::new(2, 3);
        let mut b = Tally::new(2, 3);
        a.record(&[0.2, 0.3, 0.5], &[1.0, 2.0]);
        b.record(&[0.1, 0.1, 0.8], &[2.0, 2.0]);
        b.record_infeasible();
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab, ba);
        assert_eq!((ab.total, ab.feasible), (3, 2));
        assert_eq!(ab.rank_counts, [1, 1, 2, 0]);
        assert_eq!(ab.indifferent, [0, 1, 1, 0]);
    }

    #[test]
    fn central_is_mean_of_first_rank_samples() {
        let p = SmaaProblem::new(2, EvaluationData::Points { matrix: vec![vec![1.0; 2], vec![1.0; 2]] }, vec![]);
        let prepared = prepare(&p, &small_config(1)).unwrap();
        let mut t = Tally::new(2, 3);
        t.record(&[0.25, 0.75, 0.0], &[2.0, 1.0]);
        t.record(&[0.75, 0.25, 0.0], &[3.0, 1.0]);
        t.record(&[0.5, 0.5, 0.0], &[0.0, 1.0]);
        let r = prepared.summarize(&t).unwrap();
        assert_eq!(r.central[0], Some(vec![0.5, 0.5, 0.0]));
        assert_eq!(r.central[1], Some(vec![0.5, 0.5, 0.0]));
        assert_eq!(r.first_rank_counts, [2, 1]);
        assert!((r.rank_acceptability[0][0] - 200.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn barycenter_of_samples() {
        let single = barycenter(&[vec![0.3, 0.7]]).unwrap();
        assert!((single[0] - 0.3).abs() < 1e-15 && (single[1] - 0.7).abs() < 1e-15);
        let mid = barycenter(&[vec![0.2, 0.8], vec![0.4, 0.6]]).unwrap();
        assert!((mid[0] - 0.3).abs() < 1e-15 && (mid[1] - 0.7).abs() < 1e-15);
        assert!(matches!(barycenter(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn naror_and_extremes() {
        let strict = vec![vec![0.0, 50.0], vec![50.0, 0.0]];
        let indiff = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let (nec, pos) = naror_approx(&strict, &indiff);
        assert_eq!(nec, vec![vec![false, false], vec![false, false]]);
        assert_eq!(pos, vec![vec![false, true], vec![true, false]]);
        assert_eq!(extreme_ranks(&[vec![0.0, 30.0, 70.0], vec![100.0, 0.0, 0.0]]), vec![Some((2, 3)), Some((1, 1))]);
    }

    #[test]
    fn worker_split() {
        let c = RunConfig { iterations: 10, workers: 4, ..RunConfig::default() };
        let split: Vec<u64> = (0..4).map(|w| c.iterations_for(w)).collect();
        assert_eq!(split, [3, 3, 2, 2]);
    }

    #[test]
    fn point_intervals_give_degenerate_confidence() {
        let m = IntervalMatrix::from_points(&[vec![3.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let p = SmaaProblem::new(2, EvaluationData::Intervals { matrix: m }, vec![]);
        let r = run(&p, &small_config(300)).unwrap();
        for c in r.confidence.iter().flatten() {
            assert!(*c == 0.0 || *c == 100.0);
        }
        assert_eq!(r.iterations_feasible, r.iterations_total);
    }

    #[test]
    fn bernoulli_confidence() {
        // a1 = (1, [0,2]), a2 = (1, 1) with an additive capacity on criterion 2 only:
        // a1 wins exactly when its draw exceeds 1, which has probability 1/2.
        let rows = vec![
            vec![Interval::point(1.0).unwrap(), Interval::new(0.0, 2.0).unwrap()],
            vec![Interval::point(1.0).unwrap(), Interval::point(1.0).unwrap()],
        ];
        let m = IntervalMatrix::new(2, rows).unwrap();
        let p = SmaaProblem::new(2, EvaluationData::Intervals { matrix: m }, vec![]);
        let config = RunConfig { iterations: 10_000, seed: 1, ..RunConfig::default() };
        let prepared = prepare(&p, &config).unwrap();
        let c = prepared.confidence(0, &[0.0, 1.0, 0.0]).unwrap();
        assert!((c - 50.0).abs() < 1.5, "{c}");
    }

    #[test]
    fn alternative_statements_with_intervals_count_infeasible() {
        // a1 ≻ a2 holds only when a1's first evaluation is drawn above a2's.
        let rows = vec![
            vec![Interval::new(0.0, 2.0).unwrap(), Interval::point(1.0).unwrap()],
            vec![Interval::point(1.0).unwrap(), Interval::point(1.0).unwrap()],
        ];
        let m = IntervalMatrix::new(2, rows).unwrap();
        let st = vec![Statement::Alternatives {
            first: AlternativeId(0),
            second: AlternativeId(1),
            comparison: Comparison::Strict,
        }];
        let p = SmaaProblem::new(2, EvaluationData::Intervals { matrix: m }, st);
        let r = run(&p, &small_config(400)).unwrap();
        assert!(r.iterations_feasible < r.iterations_total);
        assert!(r.iterations_feasible > 100);
        assert_eq!(r.rank_acceptability[0][0], 100.0);
        assert!(MobiusCapacity::from_coefficients(2, r.barycenter.clone()).unwrap().validate().is_valid());
    }

    #[test]
    fn incompatible_problem_fails() {
        let st = vec![
            Statement::Importance { first: CriterionId(0), second: CriterionId(1), comparison: Comparison::Strict },
            Statement::Importance { first: CriterionId(1), second: CriterionId(0), comparison: Comparison::Strict },
        ];
        let p = SmaaProblem::new(2, EvaluationData::Points { matrix: vec![vec![1.0, 2.0]] }, st);
        assert!(matches!(run(&p, &small_config(10)), Err(Error::Incompatible { .. })));
    }

    #[test]
    fn additive_model_has_zero_pairs() {
        let mut p = SmaaProblem::new(
            3,
            EvaluationData::Points { matrix: vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0]] },
            vec![],
        );
        p.additivity = Additivity::Additive;
        let r = run(&p, &small_config(200)).unwrap();
        assert!(r.barycenter[3..].iter().all(|v| v.abs() < 1e-9));
    }
}
