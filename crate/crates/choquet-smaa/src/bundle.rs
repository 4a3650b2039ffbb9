//! Result bundles: `results.json` with everything needed to reproduce the
//! run, plus CSV tables laid out like the usual acceptability tables.

use std::fs;
use std::path::Path;

use choquet_smaa_core::capacity::pairs;
use choquet_smaa_core::rng::RNG_IDENTITY;
use choquet_smaa_core::sampling::CommonScale;
use choquet_smaa_core::smaa::{Case, EvaluationData, RunConfig, SmaaProblem, SmaaResults};
use serde::{Deserialize, Serialize};

use crate::problem::{ProblemError, ProblemFile, ScaleMode};
use crate::runner::run_parallel;

pub const RESULTS_FILE: &str = "results.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub rng: String,
    pub seed: u64,
    pub iterations: u64,
    pub config: RunConfig,
    pub scale_mode: ScaleMode,
    pub case: Case,
    pub epsilon_star: Option<f64>,
    pub epsilon_freeze: Option<f64>,
    pub iterations_total: u64,
    pub iterations_feasible: u64,
    /// The problem as run, statements included.
    pub problem: ProblemFile,
    /// Common scale the raw evaluations were mapped through, if any.
    pub scale: Option<CommonScale>,
}

/// Frequency-based stand-ins for the robust relations. They only hold in
/// one direction: a necessary preference yields 100, not the reverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approximations {
    pub necessary: Vec<Vec<bool>>,
    pub possible: Vec<Vec<bool>>,
    /// `[best, worst]` rank with nonzero acceptability.
    pub extreme_ranks: Vec<Option<(usize, usize)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: RunMetadata,
    pub results: SmaaResults,
    pub approximations: Approximations,
}

/// What to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub problem: ProblemFile,
    pub config: RunConfig,
    pub scale_mode: ScaleMode,
    pub scale: Option<CommonScale>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Engine(#[from] choquet_smaa_core::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("cannot read bundle: {0}")]
    Json(#[from] serde_json::Error),
}

impl RunRequest {
    pub fn problem(&self) -> Result<SmaaProblem, RunError> {
        match &self.scale {
            Some(scale) => {
                if self.problem.has_intervals() {
                    return Err(ProblemError::IntervalsWithSearch.into());
                }
                let matrix = scale.apply(&self.problem.point_matrix())?;
                Ok(SmaaProblem::new(
                    self.problem.criteria.len(),
                    EvaluationData::Points { matrix },
                    self.problem.statements()?,
                ))
            }
            None => Ok(self.problem.to_smaa_problem(self.scale_mode)?),
        }
    }
}

pub fn execute(request: &RunRequest) -> Result<ResultBundle, RunError> {
    let problem = request.problem()?;
    let results = run_parallel(&problem, &request.config)?;
    Ok(assemble(request, results))
}

pub fn assemble(request: &RunRequest, results: SmaaResults) -> ResultBundle {
    let approximations = Approximations {
        necessary: results.necessary_approx(),
        possible: results.possible_approx(),
        extreme_ranks: results.extreme_ranks(),
    };
    let metadata = RunMetadata {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        core_version: choquet_smaa_core::VERSION.into(),
        rng: RNG_IDENTITY.into(),
        seed: request.config.seed,
        iterations: request.config.iterations,
        config: request.config.clone(),
        scale_mode: request.scale_mode,
        case: results.case,
        epsilon_star: results.epsilon_star,
        epsilon_freeze: results.epsilon_freeze,
        iterations_total: results.iterations_total,
        iterations_feasible: results.iterations_feasible,
        problem: request.problem.clone(),
        scale: request.scale.clone(),
    };
    ResultBundle { metadata, results, approximations }
}

impl ResultBundle {
    pub fn request(&self) -> RunRequest {
        RunRequest {
            problem: self.metadata.problem.clone(),
            config: self.metadata.config.clone(),
            scale_mode: self.metadata.scale_mode,
            scale: self.metadata.scale.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundles serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, RunError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads `results.json` from a bundle directory (or the file itself).
    pub fn read(path: &Path) -> Result<Self, RunError> {
        let file = if path.is_dir() { path.join(RESULTS_FILE) } else { path.to_path_buf() };
        Self::from_json(&fs::read_to_string(file)?)
    }

    /// Every file of the bundle as `(name, contents)`.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        let alts: Vec<&str> = self.metadata.problem.alternatives.iter().map(|a| a.label.as_str()).collect();
        let crits: Vec<&str> = self.metadata.problem.criteria.iter().map(|c| c.label.as_str()).collect();
        let r = &self.results;
        let l = alts.len();
        let mobius_names: Vec<String> = crits
            .iter()
            .map(|c| format!("m({{{c}}})"))
            .chain(pairs(crits.len()).map(|(i, j)| format!("m({{{},{}}})", crits[i], crits[j])))
            .collect();

        let rank_header: Vec<String> =
            std::iter::once("alternative".to_string()).chain((1..=l).map(|k| format!("b{k}"))).collect();
        let square = |m: &[Vec<f64>]| {
            let header: Vec<String> =
                std::iter::once("alternative").chain(alts.iter().copied()).map(String::from).collect();
            table(&header, alts.iter().zip(m).map(|(a, row)| labelled(a, row.iter().map(|v| percent(*v)))))
        };

        let mut central_header = vec!["alternative".to_string(), "first_rank_count".into(), "confidence".into()];
        central_header.extend(mobius_names.iter().cloned());
        let central_rows = alts.iter().enumerate().filter_map(|(k, a)| {
            r.central[k].as_ref().map(|c| {
                let mut row = vec![a.to_string(), r.first_rank_counts[k].to_string()];
                row.push(r.confidence[k].map_or(String::new(), percent));
                row.extend(c.iter().map(|v| mobius(*v)));
                row
            })
        });

        let extreme_rows = alts.iter().zip(&self.approximations.extreme_ranks).map(|(a, e)| match e {
            Some((best, worst)) => vec![a.to_string(), best.to_string(), worst.to_string()],
            None => vec![a.to_string(), String::new(), String::new()],
        });

        let mut files = vec![
            (RESULTS_FILE, self.to_json()),
            (
                "rank_acceptability.csv",
                table(
                    &rank_header,
                    alts.iter().zip(&r.rank_acceptability).map(|(a, row)| labelled(a, row.iter().map(|v| percent(*v)))),
                ),
            ),
            ("preference_strict.csv", square(&r.pref_strict)),
            ("preference_indifference.csv", square(&r.pref_indiff)),
            ("central_capacities.csv", table(&central_header, central_rows)),
            (
                "barycenter.csv",
                table(&mobius_names, std::iter::once(r.barycenter.iter().map(|v| mobius(*v)).collect())),
            ),
            ("extreme_ranks.csv", table(&["alternative".into(), "best".into(), "worst".into()], extreme_rows)),
        ];
        if let Some(scale) = &self.metadata.scale {
            let raw = self.metadata.problem.point_matrix();
            if let Ok(mapped) = scale.apply(&raw) {
                let header: Vec<String> =
                    std::iter::once("alternative").chain(crits.iter().copied()).map(String::from).collect();
                let rows = alts.iter().zip(&mapped).map(|(a, row)| labelled(a, row.iter().map(|v| mobius(*v))));
                files.push(("scale.csv", table(&header, rows)));
            }
        }
        files
    }

    /// Writes every bundle file into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(), RunError> {
        fs::create_dir_all(dir)?;
        for (name, contents) in self.files() {
            fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn labelled(label: &str, values: impl Iterator<Item = String>) -> Vec<String> {
    std::iter::once(label.to_string()).chain(values).collect()
}

/// Fixed decimals without a sign on zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn percent(v: f64) -> String {
    fixed(v, 2)
}

pub fn mobius(v: f64) -> String {
    fixed(v, 4)
}

/// Comma-separated, header first, LF line endings.
fn table(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
