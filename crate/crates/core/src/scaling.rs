//! Common scales for criteria on heterogeneous units: the most
//! discriminant scale search and the fixed-scale rerun.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preference::{check_compatibility, compile_system, Statement};
use crate::rng;
use crate::sampling::evaluations::{sample_common_scale, CommonScale, Direction};
use crate::smaa::{self, EvaluationData, RunConfig, SmaaProblem, SmaaResults};

/// Outcome of one candidate scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub scale: CommonScale,
    /// LP optimum, `None` when even the weak system is infeasible.
    pub epsilon: Option<f64>,
    pub compatible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSearchResult {
    /// `ε*` of every candidate, by candidate index.
    pub epsilons: Vec<Option<f64>>,
    pub winner: Option<usize>,
    pub winner_scale: Option<CommonScale>,
    pub winner_epsilon: Option<f64>,
    /// Candidates whose system is not compatible.
    pub infeasible: usize,
    /// No statement compares alternatives, so every candidate has the same `ε*`.
    pub scale_independent: bool,
}

impl ScaleSearchResult {
    pub fn all_infeasible(&self) -> bool {
        self.winner.is_none()
    }
}

/// Samples candidate `index` (from its own stream) and solves its LP.
pub fn evaluate_candidate(
    raw: &[Vec<f64>],
    directions: &[Direction],
    statements: &[Statement],
    seed: u64,
    index: usize,
    epsilon_min: f64,
) -> Result<Candidate> {
    let mut rng = rng::substream(seed, index as u64);
    let scale = sample_common_scale(raw, directions, &mut rng)?;
    let matrix = scale.apply(raw)?;
    let system = compile_system(directions.len(), statements, Some(&matrix))?;
    let compat = check_compatibility(&system, epsilon_min)?;
    Ok(Candidate { scale, epsilon: compat.epsilon, compatible: compat.compatible })
}

/// Folds candidates (in index order) into a search result. The winner is
/// the first compatible candidate with the largest `ε*`.
pub fn select_winner<I>(candidates: I, scale_independent: bool) -> ScaleSearchResult
where
    I: IntoIterator<Item = Candidate>,
{
    let mut result = ScaleSearchResult {
        epsilons: Vec::new(),
        winner: None,
        winner_scale: None,
        winner_epsilon: None,
        infeasible: 0,
        scale_independent,
    };
    for (index, c) in candidates.into_iter().enumerate() {
        result.epsilons.push(c.epsilon);
        if !c.compatible {
            result.infeasible += 1;
            continue;
        }
        let eps = c.epsilon.expect("compatible candidates have an optimum");
        if result.winner_epsilon.is_none_or(|best| eps > best) {
            result.winner = Some(index);
            result.winner_epsilon = Some(eps);
            result.winner_scale = Some(c.scale);
        }
    }
    result
}

/// Samples `num_candidates` common scales and keeps the one whose system
/// admits the largest strictness margin.
pub fn most_discriminant_scale(
    raw: &[Vec<f64>],
    directions: &[Direction],
    statements: &[Statement],
    num_candidates: usize,
    seed: u64,
    epsilon_min: f64,
) -> Result<ScaleSearchResult> {
    if num_candidates == 0 {
        return Err(Error::InvalidInput("at least one candidate scale is needed".into()));
    }
    let candidates = (0..num_candidates)
        .map(|c| evaluate_candidate(raw, directions, statements, seed, c, epsilon_min))
        .collect::<Result<Vec<_>>>()?;
    let independent = !statements.iter().any(Statement::references_alternatives);
    Ok(select_winner(candidates, independent))
}

/// Precise-evaluation run on the raw matrix mapped through `scale`.
pub fn fixed_scale_rerun(
    raw: &[Vec<f64>],
    scale: &CommonScale,
    statements: &[Statement],
    config: &RunConfig,
) -> Result<SmaaResults> {
    let matrix = scale.apply(raw)?;
    let problem = SmaaProblem::new(scale.columns.len(), EvaluationData::Points { matrix }, statements.to_vec());
    smaa::run(&problem, config)
}
