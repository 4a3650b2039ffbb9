//! Compatibility reports: `ε*`, the verdict, and which statements bind.

use choquet_smaa_core::preference::{
    check_compatibility, compile_mb, compile_preferences, Provenance, Statement, StatementId,
};
use choquet_smaa_core::sampling::Direction;
use serde::{Deserialize, Serialize};

use crate::problem::{ProblemError, ProblemFile, ScaleMode};
use crate::statement::format_statement;

/// Which statements entered the LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckScope {
    /// Every statement, against the point evaluations.
    All,
    /// Criterion statements only: the evaluations are uncertain, so
    /// alternative statements are checked again for every sampled matrix.
    CriterionStatements,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementStatus {
    pub id: usize,
    pub text: String,
    /// `C` for criterion statements, `A` for alternative comparisons.
    pub block: String,
    pub checked: bool,
    /// Tight at the LP optimum.
    pub binding: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub epsilon_star: Option<f64>,
    pub epsilon_min: f64,
    pub compatible: bool,
    pub scope: CheckScope,
    pub statements: Vec<StatementStatus>,
}

impl CompatibilityReport {
    /// Human-readable summary, one statement per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self.epsilon_star {
            Some(e) => out.push_str(&format!("epsilon* = {e:.4}\n")),
            None => out.push_str("epsilon* = none (the weak system is infeasible)\n"),
        }
        out.push_str(if self.compatible { "verdict: compatible\n" } else { "verdict: incompatible\n" });
        if self.scope == CheckScope::CriterionStatements {
            out.push_str("note: evaluations are uncertain; alternative statements are checked per sampled matrix\n");
        }
        for s in &self.statements {
            let state = match (s.checked, s.binding) {
                (false, _) => "not checked",
                (true, true) => "binding",
                (true, false) => "slack",
            };
            out.push_str(&format!("[{}] {} {:<40} {}\n", s.id + 1, s.block, s.text, state));
        }
        out
    }
}

pub fn check_problem(
    file: &ProblemFile,
    mode: ScaleMode,
    epsilon_min: f64,
) -> Result<CompatibilityReport, ProblemError> {
    let statements = file.statements()?;
    let n = file.criteria.len();
    if mode == ScaleMode::Given {
        if let Some(c) = file.criteria.iter().find(|c| c.direction == Direction::Minimize) {
            return Err(ProblemError::MinimizedOnGivenScale(c.label.clone()));
        }
    }
    let points = !file.has_intervals() && mode == ScaleMode::Given;
    let mut system = compile_mb(n)?;
    let scope = if points {
        system.extend(compile_preferences(n, &statements, Some(&file.point_matrix()))?)?;
        CheckScope::All
    } else {
        // Keep statement ids as positions in the full list.
        let mut criterion_rows = compile_preferences(n, &[], None)?;
        for (k, s) in statements.iter().enumerate() {
            if !s.references_alternatives() {
                for mut row in compile_preferences(n, core::slice::from_ref(s), None)?.rows().iter().cloned() {
                    row.provenance = Provenance::Statement { id: StatementId(k) };
                    criterion_rows.push(row)?;
                }
            }
        }
        system.extend(criterion_rows)?;
        CheckScope::CriterionStatements
    };
    let compat = check_compatibility(&system, epsilon_min)?;
    let labels = file.labels();
    let statuses = statements
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let checked = points || !s.references_alternatives();
            let binding = checked
                && compat.epsilon.is_some()
                && system
                    .rows()
                    .iter()
                    .zip(&compat.binding)
                    .any(|(row, &b)| b && matches!(row.provenance, Provenance::Statement { id } if id.0 == k));
            StatementStatus { id: k, text: format_statement(s, &labels), block: block(s).into(), checked, binding }
        })
        .collect();
    Ok(CompatibilityReport {
        epsilon_star: compat.epsilon,
        epsilon_min,
        compatible: compat.compatible,
        scope,
        statements: statuses,
    })
}

fn block(s: &Statement) -> &'static str {
    if s.references_alternatives() {
        "A"
    } else {
        "C"
    }
}
