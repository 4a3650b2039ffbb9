//! Surface syntax of preference statements.
//!
//! ```text
//! imp: g1 > g2        imp: g1 >= g2       imp: g1 = g2
//! synergy: g1,g2      redundancy: g2,g4
//! alt: a16 > a2       alt: a1 >= a2       alt: a1 = a2
//! int: (a1,a2) > (a3,a4)                  int: (a1,a2) = (a3,a4)
//! ```
//!
//! Whitespace is ignored. Criteria and alternatives are named by label;
//! `gK` and `aK` (one-based) also work when no label takes that name.

use choquet_smaa_core::capacity::{AlternativeId, CriterionId};
use choquet_smaa_core::preference::{Comparison, Statement};

use crate::problem::ProblemFile;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StatementError {
    #[error("missing ':' after the statement kind in {0:?}")]
    MissingKind(String),
    #[error("unknown statement kind {0:?} (expected imp, synergy, redundancy, alt or int)")]
    UnknownKind(String),
    #[error("expected two {what} separated by {separator:?} in {text:?}")]
    Shape { what: &'static str, separator: &'static str, text: String },
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error("unknown alternative {0:?}")]
    UnknownAlternative(String),
    #[error("a criterion cannot be compared with itself ({0:?})")]
    SameCriterion(String),
    #[error("intensity statements take '>', '>=' or '='")]
    IntensityRelation,
}

/// Criterion and alternative labels, as used to resolve statement ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Labels {
    pub criteria: Vec<String>,
    pub alternatives: Vec<String>,
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn resolve(token: &str, labels: &[String], prefix: char) -> Option<usize> {
    if let Some(i) = labels.iter().position(|l| squash(l) == token) {
        return Some(i);
    }
    let rest = token.strip_prefix(prefix).or_else(|| token.strip_prefix(prefix.to_ascii_uppercase()))?;
    let k: usize = rest.parse().ok()?;
    (1..=labels.len()).contains(&k).then(|| k - 1)
}

impl Labels {
    pub fn of(file: &ProblemFile) -> Self {
        Labels {
            criteria: file.criteria.iter().map(|c| c.label.clone()).collect(),
            alternatives: file.alternatives.iter().map(|a| a.label.clone()).collect(),
        }
    }

    fn criterion(&self, token: &str) -> Result<CriterionId, StatementError> {
        resolve(token, &self.criteria, 'g')
            .map(CriterionId)
            .ok_or_else(|| StatementError::UnknownCriterion(token.into()))
    }

    fn alternative(&self, token: &str) -> Result<AlternativeId, StatementError> {
        resolve(token, &self.alternatives, 'a')
            .map(AlternativeId)
            .ok_or_else(|| StatementError::UnknownAlternative(token.into()))
    }
}

/// Splits `lhs OP rhs` on the first relation symbol.
fn split_relation(body: &str) -> Option<(&str, Comparison, &str)> {
    let (at, op) = body.char_indices().find(|&(_, c)| c == '>' || c == '=')?;
    let lhs = &body[..at];
    let rest = &body[at + 1..];
    match op {
        '>' => match rest.strip_prefix('=') {
            Some(rhs) => Some((lhs, Comparison::Weak, rhs)),
            None => Some((lhs, Comparison::Strict, rest)),
        },
        _ => Some((lhs, Comparison::Equal, rest)),
    }
}

fn pair(text: &str, what: &'static str) -> Result<(String, String), StatementError> {
    let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(text);
    match inner.split_once(',') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(',') => Ok((a.into(), b.into())),
        _ => Err(StatementError::Shape { what, separator: ",", text: text.into() }),
    }
}

pub fn parse_statement(text: &str, labels: &Labels) -> Result<Statement, StatementError> {
    let squashed = squash(text);
    let (kind, body) = squashed.split_once(':').ok_or_else(|| StatementError::MissingKind(text.into()))?;
    let relation = || {
        split_relation(body).filter(|(l, _, r)| !l.is_empty() && !r.is_empty()).ok_or(StatementError::Shape {
            what: "operands",
            separator: ">, >= or =",
            text: body.into(),
        })
    };
    let distinct = |first: CriterionId, second: CriterionId| {
        if first == second {
            Err(StatementError::SameCriterion(labels.criteria[first.0].clone()))
        } else {
            Ok((first, second))
        }
    };
    match kind.to_ascii_lowercase().as_str() {
        "imp" | "importance" => {
            let (l, comparison, r) = relation()?;
            let (first, second) = distinct(labels.criterion(l)?, labels.criterion(r)?)?;
            Ok(Statement::Importance { first, second, comparison })
        }
        "synergy" | "syn" => {
            let (a, b) = pair(body, "criteria")?;
            let (first, second) = distinct(labels.criterion(&a)?, labels.criterion(&b)?)?;
            Ok(Statement::Synergy { first, second })
        }
        "redundancy" | "red" => {
            let (a, b) = pair(body, "criteria")?;
            let (first, second) = distinct(labels.criterion(&a)?, labels.criterion(&b)?)?;
            Ok(Statement::Redundancy { first, second })
        }
        "alt" | "alternatives" => {
            let (l, comparison, r) = relation()?;
            Ok(Statement::Alternatives { first: labels.alternative(l)?, second: labels.alternative(r)?, comparison })
        }
        "int" | "intensity" => {
            let (l, comparison, r) = relation()?;
            if !(l.starts_with('(') && r.starts_with('(')) {
                return Err(StatementError::Shape { what: "pairs", separator: ">, >= or =", text: body.into() });
            }
            let (a, b) = pair(l, "alternatives")?;
            let (c, d) = pair(r, "alternatives")?;
            Ok(Statement::Intensity {
                first: (labels.alternative(&a)?, labels.alternative(&b)?),
                second: (labels.alternative(&c)?, labels.alternative(&d)?),
                comparison,
            })
        }
        other => Err(StatementError::UnknownKind(other.into())),
    }
}

fn symbol(c: Comparison) -> &'static str {
    match c {
        Comparison::Strict => ">",
        Comparison::Weak => ">=",
        Comparison::Equal => "=",
    }
}

/// Canonical text of a statement, naming ids by label.
pub fn format_statement(s: &Statement, labels: &Labels) -> String {
    let g = |c: CriterionId| labels.criteria[c.0].as_str();
    let a = |k: AlternativeId| labels.alternatives[k.0].as_str();
    match *s {
        Statement::Importance { first, second, comparison } => {
            format!("imp: {} {} {}", g(first), symbol(comparison), g(second))
        }
        Statement::Synergy { first, second } => format!("synergy: {},{}", g(first), g(second)),
        Statement::Redundancy { first, second } => format!("redundancy: {},{}", g(first), g(second)),
        Statement::Alternatives { first, second, comparison } => {
            format!("alt: {} {} {}", a(first), symbol(comparison), a(second))
        }
        Statement::Intensity { first, second, comparison } => {
            format!("int: ({},{}) {} ({},{})", a(first.0), a(first.1), symbol(comparison), a(second.0), a(second.1))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Labels {
        Labels {
            criteria: vec!["price".into(), "top speed".into(), "g2".into()],
            alternatives: (1..=4).map(|k| format!("a{k}")).collect(),
        }
    }

    #[test]
    fn every_form_parses() {
        let l = labels();
        let p = |s: &str| parse_statement(s, &l).unwrap();
        assert_eq!(
            p("imp: price >= top speed"),
            Statement::Importance { first: CriterionId(0), second: CriterionId(1), comparison: Comparison::Weak }
        );
        // A label named "g2" shadows the positional form.
        assert_eq!(
            p("imp:g1=g2"),
            Statement::Importance { first: CriterionId(0), second: CriterionId(2), comparison: Comparison::Equal }
        );
        assert_eq!(p(" synergy : g1 , g3 "), Statement::Synergy { first: CriterionId(0), second: CriterionId(2) });
        assert_eq!(
            p("redundancy: price,topspeed"),
            Statement::Redundancy { first: CriterionId(0), second: CriterionId(1) }
        );
        assert_eq!(
            p("alt: a4 > a2"),
            Statement::Alternatives {
                first: AlternativeId(3),
                second: AlternativeId(1),
                comparison: Comparison::Strict
            }
        );
        assert_eq!(
            p("int: (a1,a2) > (a3, a4)"),
            Statement::Intensity {
                first: (AlternativeId(0), AlternativeId(1)),
                second: (AlternativeId(2), AlternativeId(3)),
                comparison: Comparison::Strict
            }
        );
    }

    #[test]
    fn errors_are_specific() {
        let l = labels();
        let e = |s: &str| parse_statement(s, &l).unwrap_err();
        assert_eq!(e("imp g1 > g2"), StatementError::MissingKind("imp g1 > g2".into()));
        assert!(matches!(e("pref: a1 > a2"), StatementError::UnknownKind(_)));
        assert!(matches!(e("imp: g1 > g9"), StatementError::UnknownCriterion(_)));
        assert!(matches!(e("alt: a1 > a5"), StatementError::UnknownAlternative(_)));
        assert!(matches!(e("synergy: g1,g1"), StatementError::SameCriterion(_)));
        assert!(matches!(e("synergy: g1"), StatementError::Shape { .. }));
        assert!(matches!(e("imp: > g1"), StatementError::Shape { .. }));
        assert!(matches!(e("int: a1 > a2"), StatementError::Shape { .. }));
    }

    #[test]
    fn format_round_trips() {
        let l = labels();
        for text in ["imp: price >= top speed", "synergy: price,g2", "alt: a1 = a2", "int: (a1,a2) > (a3,a4)"] {
            let s = parse_statement(text, &l).unwrap();
            assert_eq!(format_statement(&s, &l), text);
            assert_eq!(parse_statement(&format_statement(&s, &l), &l).unwrap(), s);
        }
    }
}
