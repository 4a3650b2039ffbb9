//! The `smaa-choquet` command line.
//!
//! Exit codes: 0 on success (for `check`, only when compatible), 1 when the
//! statements are incompatible or no iteration or scale is feasible, 2 for
//! unreadable input and invalid settings.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use choquet_smaa_core::sampling::{CommonScale, EvalSampling};
use choquet_smaa_core::smaa::RunConfig;
use choquet_smaa_core::Error as EngineError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bundle::{execute, ResultBundle, RunError, RunRequest};
use crate::compat::check_problem;
use crate::problem::{
    import_csv, parse_problem, to_json, ConfigOverrides, Diagnostic, ProblemError, ProblemFile, ScaleMode,
};
use crate::runner::search_scales;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Default number of candidate scales in a search.
pub const DEFAULT_CANDIDATES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "smaa-choquet", version, about = "SMAA with a 2-additive Choquet integral")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the compatibility LP and report epsilon* per statement.
    Check {
        file: PathBuf,
        #[arg(long)]
        epsilon_min: Option<f64>,
        #[arg(long, value_enum)]
        scale_mode: Option<ScaleMode>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the Monte Carlo analysis and write a result bundle.
    Rank {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Map raw evaluations through a scale written by `scale`.
        #[arg(long)]
        scale: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for the most discriminant common scale.
    Scale {
        file: PathBuf,
        #[arg(long)]
        candidates: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
        /// Continue with a ranking on the winning scale.
        #[arg(long)]
        rank: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a bundle from its embedded metadata.
    Rerun {
        bundle: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a CSV matrix into a problem file.
    Import {
        csv: PathBuf,
        /// Text file with one preference statement per line.
        #[arg(long)]
        preferences: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Keep one JSON file per session here.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Continuous,
    Integer,
}

impl From<SamplingArg> for EvalSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Continuous => EvalSampling::Continuous,
            SamplingArg::Integer => EvalSampling::Integer,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Chain steps between stored capacities.
    #[arg(long = "thin")]
    pub thinning: Option<u64>,
    #[arg(long, env = "SMAA_CHOQUET_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub eval_sampling: Option<SamplingArg>,
    #[arg(long, value_enum)]
    pub scale_mode: Option<ScaleMode>,
    #[arg(long)]
    pub epsilon_min: Option<f64>,
    /// Chain steps per iteration when the constraints change every iteration.
    #[arg(long)]
    pub inner_steps: Option<u64>,
}

impl RunArgs {
    pub fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            iterations: self.iterations,
            seed: self.seed,
            burn_in: self.burn_in,
            thinning: self.thinning,
            workers: self.workers,
            eval_sampling: self.eval_sampling.map(Into::into),
            epsilon_min: self.epsilon_min,
            inner_steps: self.inner_steps,
            scale_mode: self.scale_mode,
            candidates: None,
        }
    }
}

/// Winner of a scale search, as written by `scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleFile {
    pub seed: u64,
    pub candidates: usize,
    pub winner: usize,
    pub epsilon: f64,
    pub infeasible: usize,
    pub scale_independent: bool,
    pub scale: CommonScale,
    /// The raw matrix mapped through the scale, one row per alternative.
    pub evaluations: Vec<ScaledRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledRow {
    pub label: String,
    pub values: Vec<f64>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure::input(d.to_string())
    }
}

impl From<ProblemError> for Failure {
    fn from(e: ProblemError) -> Self {
        match e {
            ProblemError::Engine(e) => e.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::Incompatible { .. } | EngineError::NoFeasibleIteration { .. } => EXIT_INFEASIBLE,
            EngineError::InvalidInput(_)
            | EngineError::NoIntegerInInterval { .. }
            | EngineError::InvalidInterval { .. }
            | EngineError::NegativeEvaluation { .. }
            | EngineError::NonFiniteEvaluation
            | EngineError::DimensionMismatch { .. }
            | EngineError::MissingEvaluations { .. }
            | EngineError::CriterionCount { .. } => EXIT_INPUT,
            _ => EXIT_INFEASIBLE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Problem(p) => p.into(),
            RunError::Engine(e) => e.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<ProblemFile, Failure> {
    let text = read(path)?;
    parse_problem(&text).map_err(|d| Failure::input(format!("{}: {d}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn settings(file: &ProblemFile, args: &RunArgs) -> (RunConfig, ConfigOverrides) {
    let merged = file.config.merged_with(&args.overrides());
    (merged.run_config(), merged)
}

fn summary(bundle: &ResultBundle) -> String {
    let r = &bundle.results;
    let mut out =
        format!("case: {:?}\niterations: {} feasible of {}\n", r.case, r.iterations_feasible, r.iterations_total);
    if let Some(e) = r.epsilon_star {
        out.push_str(&format!("epsilon* = {e:.4}\n"));
    }
    let ranks = bundle.files().into_iter().find(|(n, _)| *n == "rank_acceptability.csv").map(|(_, c)| c);
    out.push_str("rank acceptability (percent):\n");
    out.push_str(&ranks.unwrap_or_default());
    out
}

fn emit_bundle(bundle: &ResultBundle, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            bundle.write(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            let _ = writeln!(stdout, "wrote {}", dir.display());
        }
        None => {
            let _ = write!(stdout, "{}", summary(bundle));
        }
    }
    Ok(())
}

/// Runs a parsed command line, writing normal output to `stdout`.
pub fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Check { file, epsilon_min, scale_mode, json } => {
            let problem = load_problem(&file)?;
            let eps = epsilon_min.or(problem.config.epsilon_min).unwrap_or(RunConfig::default().epsilon_min);
            let mode = scale_mode.or(problem.config.scale_mode).unwrap_or_default();
            let report = check_problem(&problem, mode, eps)?;
            let text = if json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                report.render()
            };
            let _ = write!(stdout, "{text}");
            Ok(if report.compatible { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Rank { file, run, scale, out } => {
            let problem = load_problem(&file)?;
            let (config, merged) = settings(&problem, &run);
            let scale = match scale {
                Some(path) => {
                    let text = read(&path)?;
                    let f: ScaleFile = serde_json::from_str(&text).map_err(|e| {
                        Failure::input(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
                    })?;
                    Some(f.scale)
                }
                None => None,
            };
            let request = RunRequest { problem, config, scale_mode: merged.scale_mode(), scale };
            let bundle = execute(&request)?;
            emit_bundle(&bundle, out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Scale { file, candidates, run, rank, out } => {
            let problem = load_problem(&file)?;
            if problem.has_intervals() {
                return Err(ProblemError::IntervalsWithSearch.into());
            }
            let (config, _) = settings(&problem, &run);
            let candidates = candidates.or(problem.config.candidates).unwrap_or(DEFAULT_CANDIDATES);
            let statements = problem.statements()?;
            let raw = problem.point_matrix();
            let result = search_scales(
                &raw,
                &problem.directions(),
                &statements,
                candidates,
                config.seed,
                config.epsilon_min,
                config.workers,
            )?;
            let (Some(winner), Some(scale), Some(epsilon)) =
                (result.winner, result.winner_scale.clone(), result.winner_epsilon)
            else {
                let _ = writeln!(stdout, "all {candidates} candidate scales are incompatible");
                return Ok(EXIT_INFEASIBLE);
            };
            let mapped = scale.apply(&raw)?;
            let scale_file = ScaleFile {
                seed: config.seed,
                candidates,
                winner,
                epsilon,
                infeasible: result.infeasible,
                scale_independent: result.scale_independent,
                scale: scale.clone(),
                evaluations: problem
                    .alternatives
                    .iter()
                    .zip(mapped)
                    .map(|(a, values)| ScaledRow { label: a.label.clone(), values })
                    .collect(),
            };
            let mut report = format!(
                "winner: candidate {winner} of {candidates}\nepsilon = {epsilon:.6}\nincompatible candidates: {}\n",
                result.infeasible
            );
            if result.scale_independent {
                report.push_str("note: no statement compares alternatives, so every scale gives the same epsilon\n");
            }
            let scale_json = serde_json::to_string_pretty(&scale_file).expect("serializable") + "\n";
            match &out {
                Some(dir) => write_file(&dir.join("scale.json"), &scale_json)?,
                None if !rank => report.push_str(&scale_json),
                None => {}
            }
            let _ = write!(stdout, "{report}");
            if rank {
                let request = RunRequest { problem, config, scale_mode: ScaleMode::Search, scale: Some(scale) };
                let bundle = execute(&request)?;
                emit_bundle(&bundle, out.as_deref(), stdout)?;
            }
            Ok(EXIT_OK)
        }
        Command::Rerun { bundle, out } => {
            let original =
                ResultBundle::read(&bundle).map_err(|e| Failure::input(format!("{}: {e}", bundle.display())))?;
            let again = execute(&original.request())?;
            let same = again.to_json() == original.to_json();
            emit_bundle(&again, out.as_deref(), stdout)?;
            let _ = writeln!(stdout, "{}", if same { "reproduced: identical" } else { "reproduced: DIFFERENT" });
            Ok(if same { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Import { csv, preferences, out } => {
            let mut problem =
                import_csv(&read(&csv)?).map_err(|d| Failure::input(format!("{}: {d}", csv.display())))?;
            if let Some(path) = preferences {
                problem.preferences = read(&path)?
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(String::from)
                    .collect();
                // Validate statements against the imported labels.
                problem = parse_problem(&to_json(&problem)).map_err(|d| Failure::input(d.message))?;
            }
            let json = to_json(&problem);
            match out {
                Some(path) => write_file(&path, &json)?,
                None => {
                    let _ = write!(stdout, "{json}");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Serve { port, bind, data_dir } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::input(e.to_string()))?;
            runtime
                .block_on(crate::service::serve(&bind, port, data_dir))
                .map_err(|e| Failure::input(format!("server: {e}")))?;
            Ok(EXIT_OK)
        }
    }
}
