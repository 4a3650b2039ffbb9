//! Problem files: the JSON container for criteria, evaluations, preference
//! statements and run settings, plus the CSV import path for bare matrices.

use std::collections::HashMap;
use std::fmt;

use choquet_smaa_core::preference::{Statement, MAX_CRITERIA};
use choquet_smaa_core::sampling::{Direction, EvalSampling, Interval, IntervalMatrix};
use choquet_smaa_core::smaa::{EvaluationData, RunConfig, SmaaProblem};
use serde::{Deserialize, Serialize};

use crate::statement::{parse_statement, Labels};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub criteria: Vec<CriterionSpec>,
    pub alternatives: Vec<AlternativeSpec>,
    #[serde(default)]
    pub preferences: Vec<String>,
    #[serde(default, skip_serializing_if = "ConfigOverrides::is_empty")]
    pub config: ConfigOverrides,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSpec {
    pub label: String,
    #[serde(default)]
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeSpec {
    pub label: String,
    pub evaluations: Vec<Evaluation>,
}

/// A number, or a `[lo, hi]` pair for an imprecise evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evaluation {
    Point(f64),
    Interval([f64; 2]),
}

impl Evaluation {
    pub fn is_interval(&self) -> bool {
        matches!(self, Evaluation::Interval(_))
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            Evaluation::Point(v) => (v, v),
            Evaluation::Interval([lo, hi]) => (lo, hi),
        }
    }
}

/// How evaluations relate to a common scale.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScaleMode {
    /// Evaluations already share a common scale where more is better.
    #[default]
    Given,
    /// Evaluations are in heterogeneous units; common scales are sampled.
    Search,
}

/// Run settings stored in a problem file; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thinning: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_sampling: Option<EvalSampling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_mode: Option<ScaleMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
}

impl ConfigOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ConfigOverrides::default()
    }

    /// `other` wins wherever it is set.
    pub fn merged_with(&self, other: &ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            iterations: other.iterations.or(self.iterations),
            seed: other.seed.or(self.seed),
            burn_in: other.burn_in.or(self.burn_in),
            thinning: other.thinning.or(self.thinning),
            workers: other.workers.or(self.workers),
            eval_sampling: other.eval_sampling.or(self.eval_sampling),
            epsilon_min: other.epsilon_min.or(self.epsilon_min),
            inner_steps: other.inner_steps.or(self.inner_steps),
            scale_mode: other.scale_mode.or(self.scale_mode),
            candidates: other.candidates.or(self.candidates),
        }
    }

    pub fn run_config(&self) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            iterations: self.iterations.unwrap_or(d.iterations),
            seed: self.seed.unwrap_or(d.seed),
            burn_in: self.burn_in.unwrap_or(d.burn_in),
            thinning: self.thinning.unwrap_or(d.thinning),
            workers: self.workers.unwrap_or(d.workers),
            eval_sampling: self.eval_sampling.unwrap_or(d.eval_sampling),
            epsilon_min: self.epsilon_min.unwrap_or(d.epsilon_min),
            inner_steps: self.inner_steps.unwrap_or(d.inner_steps),
        }
    }

    pub fn scale_mode(&self) -> ScaleMode {
        self.scale_mode.unwrap_or_default()
    }
}

/// An error tied to a position in the source text (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |nl| before[nl + 1..].chars().count()) + 1;
    (line, column)
}

/// Start offsets of the elements of the top-level arrays of a JSON object.
/// Only called on text that serde already accepted.
fn element_offsets(text: &str) -> HashMap<String, Vec<usize>> {
    struct Walker<'a> {
        bytes: &'a [u8],
        pos: usize,
    }
    impl Walker<'_> {
        fn ws(&mut self) {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
        }
        fn string(&mut self) -> String {
            let start = self.pos + 1;
            self.pos += 1;
            while self.bytes[self.pos] != b'"' {
                if self.bytes[self.pos] == b'\\' {
                    self.pos += 1;
                }
                self.pos += 1;
            }
            self.pos += 1;
            serde_json::from_slice(&self.bytes[start - 1..self.pos]).unwrap_or_default()
        }
        /// Skips one value; returns element offsets if it was an array.
        fn value(&mut self) -> Vec<usize> {
            self.ws();
            let mut elements = Vec::new();
            match self.bytes[self.pos] {
                b'"' => {
                    self.string();
                }
                b'{' => {
                    self.pos += 1;
                    loop {
                        self.ws();
                        match self.bytes[self.pos] {
                            b'}' => break,
                            b',' => self.pos += 1,
                            _ => {
                                self.string();
                                self.ws();
                                self.pos += 1; // ':'
                                self.value();
                            }
                        }
                    }
                    self.pos += 1;
                }
                b'[' => {
                    self.pos += 1;
                    loop {
                        self.ws();
                        match self.bytes[self.pos] {
                            b']' => break,
                            b',' => self.pos += 1,
                            _ => {
                                elements.push(self.pos);
                                self.value();
                            }
                        }
                    }
                    self.pos += 1;
                }
                _ => {
                    while self.pos < self.bytes.len() && !matches!(self.bytes[self.pos], b',' | b']' | b'}') {
                        self.pos += 1;
                    }
                }
            }
            elements
        }
    }

    let mut w = Walker { bytes: text.as_bytes(), pos: 0 };
    let mut out = HashMap::new();
    w.ws();
    if w.bytes.get(w.pos) != Some(&b'{') {
        return out;
    }
    w.pos += 1;
    loop {
        w.ws();
        match w.bytes.get(w.pos) {
            None | Some(b'}') => break,
            Some(b',') => w.pos += 1,
            Some(_) => {
                let key = w.string();
                w.ws();
                w.pos += 1;
                let elements = w.value();
                out.insert(key, elements);
            }
        }
    }
    out
}

/// Characters that would make a label ambiguous in statement syntax.
const RESERVED: &[char] = &[',', '>', '=', '(', ')', ':'];

/// Parses and validates a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemFile, Diagnostic> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Diagnostic {
        line: e.line().max(1),
        column: e.column().max(1),
        message: e.to_string(),
    })?;
    let offsets = element_offsets(text);
    let at = |key: &str, index: usize, message: String| {
        let offset = offsets.get(key).and_then(|v| v.get(index)).copied().unwrap_or(0);
        let (line, column) = position(text, offset);
        Diagnostic { line, column, message }
    };
    let top = |message: String| Diagnostic { line: 1, column: 1, message };

    let n = file.criteria.len();
    if n < 2 {
        return Err(top(format!("at least two criteria are needed, found {n}")));
    }
    if n > MAX_CRITERIA {
        return Err(top(format!("at most {MAX_CRITERIA} criteria are supported, found {n}")));
    }
    if file.alternatives.is_empty() {
        return Err(top("no alternatives".into()));
    }
    let mut seen = HashMap::new();
    for (i, c) in file.criteria.iter().enumerate() {
        check_label(&c.label).map_err(|m| at("criteria", i, m))?;
        if seen.insert(c.label.as_str(), i).is_some() {
            return Err(at("criteria", i, format!("duplicate criterion label {:?}", c.label)));
        }
    }
    seen.clear();
    for (k, a) in file.alternatives.iter().enumerate() {
        check_label(&a.label).map_err(|m| at("alternatives", k, m))?;
        if seen.insert(a.label.as_str(), k).is_some() {
            return Err(at("alternatives", k, format!("duplicate alternative label {:?}", a.label)));
        }
        if a.evaluations.len() != n {
            return Err(at(
                "alternatives",
                k,
                format!("alternative {:?} has {} evaluations, expected {n}", a.label, a.evaluations.len()),
            ));
        }
        for (i, e) in a.evaluations.iter().enumerate() {
            let (lo, hi) = e.bounds();
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(at("alternatives", k, format!("evaluation {} of {:?} is not finite", i + 1, a.label)));
            }
            if lo > hi {
                return Err(at(
                    "alternatives",
                    k,
                    format!("interval [{lo}, {hi}] of {:?} has its bounds reversed", a.label),
                ));
            }
        }
    }
    let labels = Labels::of(&file);
    for (j, p) in file.preferences.iter().enumerate() {
        parse_statement(p, &labels).map_err(|e| at("preferences", j, e.to_string()))?;
    }
    Ok(file)
}

fn check_label(label: &str) -> Result<(), String> {
    if label.trim().is_empty() {
        return Err("empty label".into());
    }
    if let Some(c) = label.chars().find(|c| RESERVED.contains(c)) {
        return Err(format!("label {label:?} contains {c:?}, which is reserved for statements"));
    }
    Ok(())
}

/// Errors raised when turning a validated file into an engine problem.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("statement {index}: {message}")]
    Statement { index: usize, message: String },
    #[error("criterion {0:?} is minimized; evaluations on a given common scale must be maximized (use scale mode \"search\")")]
    MinimizedOnGivenScale(String),
    #[error("interval evaluations cannot be combined with scale mode \"search\"")]
    IntervalsWithSearch,
    #[error("{0}")]
    Engine(#[from] choquet_smaa_core::Error),
}

impl ProblemFile {
    pub fn labels(&self) -> Labels {
        Labels::of(self)
    }

    pub fn statements(&self) -> Result<Vec<Statement>, ProblemError> {
        let labels = self.labels();
        self.preferences
            .iter()
            .enumerate()
            .map(|(index, p)| {
                parse_statement(p, &labels).map_err(|e| ProblemError::Statement { index, message: e.to_string() })
            })
            .collect()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.criteria.iter().map(|c| c.direction).collect()
    }

    pub fn has_intervals(&self) -> bool {
        self.alternatives.iter().any(|a| a.evaluations.iter().any(Evaluation::is_interval))
    }

    /// Point evaluations as a matrix (interval midpoints are not taken:
    /// callers check `has_intervals` first).
    pub fn point_matrix(&self) -> Vec<Vec<f64>> {
        self.alternatives.iter().map(|a| a.evaluations.iter().map(|e| e.bounds().0).collect()).collect()
    }

    /// Builds the engine problem; the case follows from the data shape and `mode`.
    pub fn to_smaa_problem(&self, mode: ScaleMode) -> Result<SmaaProblem, ProblemError> {
        let statements = self.statements()?;
        let n = self.criteria.len();
        let data = match mode {
            ScaleMode::Search => {
                if self.has_intervals() {
                    return Err(ProblemError::IntervalsWithSearch);
                }
                EvaluationData::Raw { matrix: self.point_matrix(), directions: self.directions() }
            }
            ScaleMode::Given => {
                if let Some(c) = self.criteria.iter().find(|c| c.direction == Direction::Minimize) {
                    return Err(ProblemError::MinimizedOnGivenScale(c.label.clone()));
                }
                if self.has_intervals() {
                    let rows = self
                        .alternatives
                        .iter()
                        .map(|a| {
                            a.evaluations
                                .iter()
                                .map(|e| {
                                    let (lo, hi) = e.bounds();
                                    Interval::new(lo, hi)
                                })
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    EvaluationData::Intervals { matrix: IntervalMatrix::new(n, rows)? }
                } else {
                    EvaluationData::Points { matrix: self.point_matrix() }
                }
            }
        };
        Ok(SmaaProblem::new(n, data, statements))
    }
}

/// Reads a bare matrix: a header row of criterion labels (the first cell
/// names the label column), an optional `direction` row, then one row per
/// alternative. Imprecise cells are written `lo..hi`.
pub fn import_csv(text: &str) -> Result<ProblemFile, Diagnostic> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| {
            let line = e.position().map_or(1, |p| p.line() as usize);
            Diagnostic { line, column: 1, message: e.to_string() }
        })?;
        let line = r.position().map_or(1, |p| p.line() as usize);
        records.push((line, r));
    }
    let Some((_, header)) = records.first() else {
        return Err(Diagnostic { line: 1, column: 1, message: "empty file".into() });
    };
    let mut criteria: Vec<CriterionSpec> =
        header.iter().skip(1).map(|l| CriterionSpec { label: l.to_string(), direction: Direction::Maximize }).collect();
    let n = criteria.len();
    let mut rows = records.iter().skip(1).peekable();
    if let Some((line, r)) = rows.peek() {
        if r.get(0).is_some_and(|c| c.eq_ignore_ascii_case("direction")) {
            for (i, cell) in r.iter().skip(1).enumerate() {
                let direction = match cell.to_ascii_lowercase().as_str() {
                    "max" | "maximize" => Direction::Maximize,
                    "min" | "minimize" => Direction::Minimize,
                    other => {
                        return Err(Diagnostic {
                            line: *line,
                            column: i + 2,
                            message: format!("unknown direction {other:?}"),
                        })
                    }
                };
                if let Some(c) = criteria.get_mut(i) {
                    c.direction = direction;
                }
            }
            rows.next();
        }
    }
    let mut alternatives = Vec::new();
    for (line, r) in rows {
        if r.len() != n + 1 {
            return Err(Diagnostic {
                line: *line,
                column: 1,
                message: format!("expected {} cells, found {}", n + 1, r.len()),
            });
        }
        let evaluations = r
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, cell)| {
                parse_cell(cell).ok_or_else(|| Diagnostic {
                    line: *line,
                    column: i + 2,
                    message: format!("cannot read {cell:?} as a number or lo..hi interval"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        alternatives.push(AlternativeSpec { label: r[0].to_string(), evaluations });
    }
    let file = ProblemFile { criteria, alternatives, preferences: Vec::new(), config: ConfigOverrides::default() };
    // Re-validate through the JSON path so both routes accept the same files.
    let json = serde_json::to_string_pretty(&file).expect("serializable");
    parse_problem(&json).map_err(|d| Diagnostic { line: 1, column: 1, message: d.message })
}

fn parse_cell(cell: &str) -> Option<Evaluation> {
    match cell.split_once("..") {
        Some((lo, hi)) => Some(Evaluation::Interval([lo.trim().parse().ok()?, hi.trim().parse().ok()?])),
        None => cell.parse().ok().map(Evaluation::Point),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json(file: &ProblemFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("problem files serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
  "criteria": [{"label": "g1"}, {"label": "g2", "direction": "maximize"}],
  "alternatives": [
    {"label": "a1", "evaluations": [1, 2]},
    {"label": "a2", "evaluations": [[1, 3], 2]}
  ],
  "preferences": ["imp: g1 > g2"]
}"#;

    #[test]
    fn parses_points_and_intervals() {
        let f = parse_problem(SMALL).unwrap();
        assert_eq!(f.alternatives[1].evaluations[0], Evaluation::Interval([1.0, 3.0]));
        assert!(f.has_intervals());
        let p = f.to_smaa_problem(ScaleMode::Given).unwrap();
        assert!(matches!(p.data, EvaluationData::Intervals { .. }));
        assert!(matches!(f.to_smaa_problem(ScaleMode::Search), Err(ProblemError::IntervalsWithSearch)));
    }

    #[test]
    fn ragged_rows_point_at_the_alternative() {
        let text = SMALL.replace("[[1, 3], 2]", "[3]");
        let d = parse_problem(&text).unwrap_err();
        assert_eq!((d.line, d.column), (5, 5));
        assert!(d.message.contains("expected 2"), "{d}");
    }

    #[test]
    fn bad_statement_points_at_the_string() {
        let text = SMALL.replace("imp: g1 > g2", "imp: g1 > g9");
        let d = parse_problem(&text).unwrap_err();
        assert_eq!((d.line, d.column), (7, 19));
    }

    #[test]
    fn syntax_errors_carry_serde_positions() {
        let d = parse_problem("{\n  \"criteria\": [,]\n}").unwrap_err();
        assert_eq!(d.line, 2);
        let d = parse_problem("{\"criteria\": [], \"alternatives\": [], \"extra\": 1}").unwrap_err();
        assert!(d.message.contains("unknown field"));
    }

    #[test]
    fn reversed_interval_and_reserved_label() {
        assert!(parse_problem(&SMALL.replace("[1, 3]", "[3, 1]")).unwrap_err().message.contains("reversed"));
        assert!(parse_problem(&SMALL.replace("\"a1\"", "\"a,1\"")).unwrap_err().message.contains("reserved"));
    }

    #[test]
    fn round_trip_is_identity() {
        let f = parse_problem(SMALL).unwrap();
        assert_eq!(parse_problem(&to_json(&f)).unwrap(), f);
    }

    #[test]
    fn minimized_criteria_need_search_mode() {
        let text = SMALL
            .replace("\"direction\": \"maximize\"", "\"direction\": \"minimize\"")
            .replace("[[1, 3], 2]", "[1, 3]");
        let f = parse_problem(&text).unwrap();
        assert!(matches!(f.to_smaa_problem(ScaleMode::Given), Err(ProblemError::MinimizedOnGivenScale(_))));
        assert!(matches!(f.to_smaa_problem(ScaleMode::Search).unwrap().data, EvaluationData::Raw { .. }));
    }

    #[test]
    fn csv_import() {
        let f = import_csv("name,price,speed\ndirection,min,max\ncar1,100,5\ncar2,120,4..6\n").unwrap();
        assert_eq!(f.criteria[0].direction, Direction::Minimize);
        assert_eq!(f.alternatives[1].evaluations[1], Evaluation::Interval([4.0, 6.0]));
        let d = import_csv("name,a,b\nx,1,oops\n").unwrap_err();
        assert_eq!((d.line, d.column), (2, 3));
    }
}
