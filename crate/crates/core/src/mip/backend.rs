//! External solver exchange.
//!
//! A backend is an executable that reads an MPS file and writes a solution
//! file. Its argument template may use `{mps}`, `{sol}` and `{time_limit}`.
//! The solution file holds one `name value` pair per line, using mangled
//! names, plus optional header lines:
//!
//! ```text
//! @status optimal|feasible|infeasible|unknown
//! @objective 12.5
//! @bound 12.1
//! ```
//!
//! A missing `@status` line means `feasible` when values are present and
//! `unknown` otherwise. A crash, timeout or unreadable file maps to `unknown`
//! with the captured diagnostics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, TOL};
use crate::preprocess::separate_sec;

use super::{build_m1, build_m2, evaluate_assignment, export_mps, mangle, mip_gap, Assignment, Formulation};
use super::{MipModel, Sense, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    #[serde(skip)]
    pub assignment: Option<Assignment>,
    pub diagnostics: String,
}

impl SolveResult {
    pub fn unknown(diagnostics: impl Into<String>) -> Self {
        SolveResult {
            status: SolveStatus::Unknown,
            objective: None,
            bound: None,
            assignment: None,
            diagnostics: diagnostics.into(),
        }
    }

    /// Gap in percent between objective and bound, when both exist and the
    /// objective is nonzero.
    pub fn gap(&self) -> Option<f64> {
        mip_gap(self.objective?, self.bound?).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub program: PathBuf,
    #[serde(default = "default_args")]
    pub args: Vec<String>,
    /// Directory for exchange files; a temporary directory when absent.
    #[serde(default)]
    pub workdir: Option<PathBuf>,
}

fn default_args() -> Vec<String> {
    vec!["{mps}".into(), "{sol}".into(), "{time_limit}".into()]
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("no solver backend is configured")]
    Unsupported,
    #[error("cannot read backend config: {0}")]
    Config(String),
    #[error("beta escalation applies to the node-copy models only")]
    Formulation,
}

impl BackendConfig {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        BackendConfig { program: program.into(), args: default_args(), workdir: None }
    }

    /// Reads `ELRP_BACKEND` (program) and `ELRP_BACKEND_ARGS`
    /// (whitespace-separated template). `None` when unset.
    pub fn from_env() -> Option<Self> {
        let program = std::env::var_os("ELRP_BACKEND").filter(|p| !p.is_empty())?;
        let args = std::env::var("ELRP_BACKEND_ARGS")
            .ok()
            .map(|a| a.split_whitespace().map(String::from).collect())
            .unwrap_or_else(default_args);
        Some(BackendConfig { program: program.into(), args, workdir: None })
    }

    /// Reads a JSON config such as `{"program": "solve.sh", "args": ["{mps}", "{sol}"]}`.
    pub fn from_file(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Config(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| BackendError::Config(e.to_string()))
    }
}

fn parse_solution(model: &MipModel, text: &str) -> SolveResult {
    let by_mangled: BTreeMap<String, VarId> = model
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (mangle(&v.name), VarId(i)))
        .collect();
    let mut status = None;
    let (mut objective, mut bound) = (None, None);
    let mut a = Assignment::default();
    let mut notes = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        let (Some(key), Some(value)) = (it.next(), it.next()) else { continue };
        match key {
            "@status" => {
                status = match value {
                    "optimal" => Some(SolveStatus::Optimal),
                    "feasible" => Some(SolveStatus::Feasible),
                    "infeasible" => Some(SolveStatus::Infeasible),
                    _ => Some(SolveStatus::Unknown),
                }
            }
            "@objective" => objective = value.parse().ok(),
            "@bound" => bound = value.parse().ok(),
            name => match (by_mangled.get(name), value.parse::<f64>()) {
                (Some(&id), Ok(v)) => a.set(id, v),
                _ => notes.push(format!("line {}: ignored `{}`", ln + 1, line.trim())),
            },
        }
    }
    let has_values = !a.values.is_empty();
    let status = status.unwrap_or(if has_values { SolveStatus::Feasible } else { SolveStatus::Unknown });
    if has_values && objective.is_none() {
        objective = Some(evaluate_assignment(model, &a).objective);
    }
    if status == SolveStatus::Optimal && bound.is_none() {
        bound = objective;
    }
    SolveResult {
        status,
        objective: objective.filter(|_| status != SolveStatus::Infeasible),
        bound,
        assignment: has_values.then_some(a),
        diagnostics: notes.join("\n"),
    }
}

/// Solves `model` with the configured backend. Without a backend the result
/// is `unknown` with an explanatory diagnostic.
pub fn backend_solve(model: &MipModel, config: Option<&BackendConfig>, time_limit: f64) -> SolveResult {
    let Some(config) = config else {
        return SolveResult::unknown("no backend configured (set ELRP_BACKEND)");
    };
    let tmp;
    let dir = match &config.workdir {
        Some(d) => d.clone(),
        None => match tempfile::tempdir() {
            Ok(d) => {
                tmp = d;
                tmp.path().to_path_buf()
            }
            Err(e) => return SolveResult::unknown(format!("cannot create work directory: {e}")),
        },
    };
    let mps_path = dir.join("model.mps");
    let sol_path = dir.join("model.sol");
    let mps = match export_mps(model) {
        Ok(b) => b,
        Err(e) => return SolveResult::unknown(format!("export failed: {e}")),
    };
    if let Err(e) = std::fs::write(&mps_path, mps) {
        return SolveResult::unknown(format!("cannot write {}: {e}", mps_path.display()));
    }
    let _ = std::fs::remove_file(&sol_path);
    let args: Vec<String> = config
        .args
        .iter()
        .map(|a| {
            a.replace("{mps}", &mps_path.to_string_lossy())
                .replace("{sol}", &sol_path.to_string_lossy())
                .replace("{time_limit}", &time_limit.to_string())
        })
        .collect();
    let mut child = match Command::new(&config.program)
        .args(&args)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return SolveResult::unknown(format!("cannot start {}: {e}", config.program.display())),
    };
    let deadline = Instant::now() + Duration::from_secs_f64(time_limit.max(0.0) + 5.0);
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break s,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return SolveResult::unknown(format!("backend timed out after {time_limit} s"));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(20)),
            Err(e) => return SolveResult::unknown(format!("wait failed: {e}")),
        }
    };
    let output = child.wait_with_output();
    let captured = output
        .map(|o| {
            format!(
                "{}{}",
                String::from_utf8_lossy(&o.stdout),
                String::from_utf8_lossy(&o.stderr)
            )
        })
        .unwrap_or_default();
    if !status.success() {
        return SolveResult::unknown(format!("backend exited with {status}\n{captured}"));
    }
    match std::fs::read_to_string(&sol_path) {
        Ok(text) => {
            let mut r = parse_solution(model, &text);
            if !captured.is_empty() {
                r.diagnostics = format!("{}\n{captured}", r.diagnostics).trim().to_string();
            }
            r
        }
        Err(e) => SolveResult::unknown(format!("no solution file: {e}\n{captured}")),
    }
}

/// One step of beta escalation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaStep {
    pub beta: usize,
    pub status: SolveStatus,
    pub objective: Option<f64>,
}

/// Solves the node-copy model for `beta = 0, 1, ...` and stops at the first
/// `beta` that does not improve the incumbent, or at `max_beta`. Returns the
/// best result, its `beta` and the sequence of steps.
pub fn solve_with_beta_escalation(
    inst: &Instance,
    formulation: Formulation,
    config: Option<&BackendConfig>,
    time_limit: f64,
    strengthen: bool,
    max_beta: usize,
) -> Result<(SolveResult, usize, Vec<BetaStep>), BackendError> {
    let config = config.ok_or(BackendError::Unsupported)?;
    let build = match formulation {
        Formulation::M1 { .. } => build_m1,
        Formulation::M2 { .. } => build_m2,
        _ => return Err(BackendError::Formulation),
    };
    let mut best: Option<(SolveResult, usize)> = None;
    let mut steps = Vec::new();
    for beta in 0..=max_beta {
        let model = build(inst, beta, strengthen);
        let r = backend_solve(&model, Some(config), time_limit);
        log::info!("beta {beta}: {:?} {:?}", r.status, r.objective);
        steps.push(BetaStep { beta, status: r.status, objective: r.objective });
        let improves = match (&best, r.objective) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some((b, _)), Some(o)) => b.objective.is_none_or(|bo| o < bo - TOL),
        };
        let infeasible_so_far = r.status == SolveStatus::Infeasible && best.is_none();
        if improves {
            best = Some((r, beta));
        } else if !infeasible_so_far {
            break;
        }
    }
    let (r, beta) = best.unwrap_or_else(|| {
        (SolveResult::unknown("no beta produced a solution"), steps.last().map_or(0, |s| s.beta))
    });
    Ok((r, beta, steps))
}

/// Adds subtour cuts `Σ_{a,b ∈ S} x_ab ≤ |S| − 1` for the node sets in
/// `cuts`, given as indices into the model's arc graph. Returns the number of
/// rows added.
pub fn add_sec_cuts(model: &mut MipModel, cuts: &[Vec<usize>]) -> usize {
    let Some(graph) = model.graph.clone() else { return 0 };
    let start = model.family("c39").count();
    for (n, set) in cuts.iter().enumerate() {
        let terms: Vec<(VarId, f64)> = graph
            .arcs
            .iter()
            .filter(|(a, b, _)| set.contains(a) && set.contains(b))
            .map(|&(_, _, v)| (v, 1.0))
            .collect();
        model.add_row(format!("c39[{}]", start + n), terms, Sense::Le, set.len() as f64 - 1.0);
    }
    cuts.len()
}

/// Upper bound on cutting-plane rounds in [`solve_with_sec_loop`].
pub const SEC_MAX_ROUNDS: usize = 50;

/// Solves repeatedly, adding violated subtour cuts found in the incumbent,
/// until none is violated or [`SEC_MAX_ROUNDS`] is reached.
pub fn solve_with_sec_loop(
    model: &mut MipModel,
    config: Option<&BackendConfig>,
    time_limit: f64,
) -> (SolveResult, usize) {
    let mut rounds = 0;
    loop {
        let r = backend_solve(model, config, time_limit);
        let (Some(a), Some(graph)) = (&r.assignment, &model.graph) else { return (r, rounds) };
        let x: BTreeMap<(usize, usize), f64> = graph
            .arcs
            .iter()
            .map(|&(i, j, v)| ((i, j), a.get(v)))
            .filter(|(_, v)| *v > 1e-9)
            .collect();
        let cuts: Vec<Vec<usize>> = separate_sec(graph.nodes.len(), &x).into_iter().map(|c| c.nodes).collect();
        if cuts.is_empty() || rounds >= SEC_MAX_ROUNDS {
            return (r, rounds);
        }
        add_sec_cuts(model, &cuts);
        rounds += 1;
    }
}
