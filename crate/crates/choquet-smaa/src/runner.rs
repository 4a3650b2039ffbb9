//! Thread-backed execution of the engine.
//!
//! Workers own disjoint random streams and return integer tallies that are
//! merged in worker order, so a threaded run is bit-identical to the
//! sequential [`choquet_smaa_core::smaa::run`] with the same worker count.

use std::thread;

use choquet_smaa_core::preference::Statement;
use choquet_smaa_core::sampling::Direction;
use choquet_smaa_core::scaling::{evaluate_candidate, select_winner, Candidate, ScaleSearchResult};
use choquet_smaa_core::smaa::{prepare, RunConfig, SmaaProblem, SmaaResults, Tally};
use choquet_smaa_core::{Error, Result};

/// Splits `0..len` into at most `parts` contiguous ranges.
fn ranges(len: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    let parts = parts.clamp(1, len.max(1));
    (0..parts).map(|p| (p * len / parts)..((p + 1) * len / parts)).collect()
}

pub fn run_parallel(problem: &SmaaProblem, config: &RunConfig) -> Result<SmaaResults> {
    let prepared = prepare(problem, config)?;
    let tallies: Vec<Result<Tally>> = thread::scope(|s| {
        let handles: Vec<_> = (0..config.workers)
            .map(|w| {
                let prepared = &prepared;
                s.spawn(move || prepared.run_worker(w))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
    });
    let mut tally = Tally::new(prepared.alternatives(), prepared.dim());
    for t in tallies {
        tally.merge(&t?)?;
    }
    let mut results = prepared.summarize(&tally)?;

    let jobs: Vec<(usize, Vec<f64>)> =
        results.central.iter().enumerate().filter_map(|(k, c)| c.clone().map(|c| (k, c))).collect();
    let factors: Vec<Result<Vec<(usize, f64)>>> = thread::scope(|s| {
        let handles: Vec<_> = ranges(jobs.len(), config.workers)
            .into_iter()
            .map(|r| {
                let (prepared, jobs) = (&prepared, &jobs);
                s.spawn(move || jobs[r].iter().map(|(k, c)| prepared.confidence(*k, c).map(|v| (*k, v))).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("confidence thread panicked")).collect()
    });
    for chunk in factors {
        for (k, v) in chunk? {
            results.confidence[k] = Some(v);
        }
    }
    Ok(results)
}

/// Evaluates `candidates` scales on `workers` threads; the outcome does not
/// depend on the worker count.
pub fn search_scales(
    raw: &[Vec<f64>],
    directions: &[Direction],
    statements: &[Statement],
    candidates: usize,
    seed: u64,
    epsilon_min: f64,
    workers: usize,
) -> Result<ScaleSearchResult> {
    if candidates == 0 {
        return Err(Error::InvalidInput("at least one candidate scale is needed".into()));
    }
    let chunks: Vec<Result<Vec<Candidate>>> = thread::scope(|s| {
        let handles: Vec<_> = ranges(candidates, workers)
            .into_iter()
            .map(|r| {
                s.spawn(move || {
                    r.map(|c| evaluate_candidate(raw, directions, statements, seed, c, epsilon_min)).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scale thread panicked")).collect()
    });
    let mut all = Vec::with_capacity(candidates);
    for chunk in chunks {
        all.extend(chunk?);
    }
    let independent = !statements.iter().any(Statement::references_alternatives);
    Ok(select_winner(all, independent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use choquet_smaa_core::capacity::{AlternativeId, CriterionId};
    use choquet_smaa_core::preference::Comparison;
    use choquet_smaa_core::scaling::most_discriminant_scale;
    use choquet_smaa_core::smaa::{run, EvaluationData};

    #[test]
    fn ranges_cover_everything() {
        assert_eq!(ranges(10, 3), vec![0..3, 3..6, 6..10]);
        assert_eq!(ranges(2, 5), vec![0..1, 1..2]);
        assert_eq!(ranges(0, 4), vec![0..0]);
    }

    #[test]
    fn threaded_equals_sequential() {
        let matrix = vec![vec![1.0, 5.0, 2.0], vec![3.0, 1.0, 4.0], vec![2.0, 2.0, 2.0]];
        let statements = vec![Statement::Synergy { first: CriterionId(0), second: CriterionId(2) }];
        let problem = SmaaProblem::new(3, EvaluationData::Points { matrix }, statements);
        let config = RunConfig { iterations: 3001, seed: 5, burn_in: 20, workers: 3, ..RunConfig::default() };
        assert_eq!(run_parallel(&problem, &config).unwrap(), run(&problem, &config).unwrap());
    }

    #[test]
    fn threaded_scale_search_matches_core() {
        let raw = vec![vec![10.0, 3.0], vec![12.0, 1.0], vec![11.0, 2.0]];
        let dirs = [Direction::Maximize, Direction::Minimize];
        let st = [Statement::Alternatives {
            first: AlternativeId(0),
            second: AlternativeId(2),
            comparison: Comparison::Strict,
        }];
        let threaded = search_scales(&raw, &dirs, &st, 40, 8, 1e-6, 3).unwrap();
        assert_eq!(threaded, most_discriminant_scale(&raw, &dirs, &st, 40, 8, 1e-6).unwrap());
    }
}
