#![allow(dead_code)]

use choquet_smaa_core::capacity::{AlternativeId, CriterionId};
use choquet_smaa_core::preference::{Comparison, Statement};

/// Eighteen alternatives on four criteria sharing a 0-20 scale.
pub fn students() -> Vec<Vec<f64>> {
    [
        [15, 12, 10, 7],
        [7, 8, 14, 16],
        [18, 8, 4, 12],
        [9, 16, 4, 16],
        [12, 5, 14, 14],
        [8, 3, 7, 20],
        [14, 20, 5, 10],
        [8, 13, 15, 6],
        [3, 17, 2, 14],
        [4, 20, 8, 9],
        [16, 7, 14, 10],
        [8, 11, 5, 19],
        [17, 12, 6, 8],
        [8, 6, 7, 19],
        [20, 7, 4, 12],
        [12, 4, 15, 13],
        [14, 11, 12, 9],
        [9, 13, 12, 6],
    ]
    .iter()
    .map(|r| r.iter().map(|&v| v as f64).collect())
    .collect()
}

pub fn g(i: usize) -> CriterionId {
    CriterionId(i - 1)
}

pub fn a(i: usize) -> AlternativeId {
    AlternativeId(i - 1)
}

pub fn student_statements() -> Vec<Statement> {
    vec![
        Statement::Importance { first: g(1), second: g(2), comparison: Comparison::Strict },
        Statement::Importance { first: g(3), second: g(4), comparison: Comparison::Strict },
        Statement::Synergy { first: g(1), second: g(2) },
        Statement::Synergy { first: g(2), second: g(3) },
        Statement::Redundancy { first: g(2), second: g(4) },
    ]
}

pub fn student_comparisons() -> Vec<Statement> {
    vec![
        Statement::Alternatives { first: a(16), second: a(2), comparison: Comparison::Strict },
        Statement::Alternatives { first: a(3), second: a(14), comparison: Comparison::Strict },
        Statement::Alternatives { first: a(13), second: a(8), comparison: Comparison::Strict },
    ]
}

/// Ten city cars: price, acceleration time, top speed, consumption.
pub fn cars() -> Vec<Vec<f64>> {
    vec![
        vec![17800.0, 10.9, 185.0, 3.8],
        vec![15750.0, 13.5, 163.0, 3.8],
        vec![15050.0, 11.0, 173.0, 4.0],
        vec![15260.0, 14.2, 172.0, 3.4],
        vec![16300.0, 11.4, 183.0, 3.8],
        vec![16050.0, 11.3, 176.0, 4.0],
        vec![15700.0, 14.6, 173.0, 3.4],
        vec![17500.0, 12.9, 174.0, 3.5],
        vec![17800.0, 11.8, 165.0, 3.2],
        vec![17060.0, 13.9, 173.0, 3.4],
    ]
}

pub fn car_statements() -> Vec<Statement> {
    vec![
        Statement::Alternatives { first: a(5), second: a(1), comparison: Comparison::Strict },
        Statement::Alternatives { first: a(7), second: a(6), comparison: Comparison::Strict },
        Statement::Alternatives { first: a(2), second: a(3), comparison: Comparison::Strict },
        Statement::Importance { first: g(1), second: g(2), comparison: Comparison::Strict },
        Statement::Importance { first: g(4), second: g(3), comparison: Comparison::Strict },
        Statement::Synergy { first: g(3), second: g(4) },
        Statement::Redundancy { first: g(2), second: g(3) },
    ]
}

/// One-based alternative indices sorted by decreasing value.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    order.into_iter().map(|k| k + 1).collect()
}
