//! Plain-text scenario and problem files (TOML).
//!
//! A scenario file:
//!
//! ```toml
//! state = "singlet"              # or 16 [re, im] pairs, row-major
//! weights = [[0.5, 0.5], [0.5, 0.5]]   # optional, one row per Bob
//!
//! [alice]
//! settings = [[1.5707963267948966, 0.0], [0.0, 0.0]]
//!
//! [[bobs]]
//! settings = [[0.7853981633974483, 0.0], [2.356194490192345, 0.0]]
//! lambda = 0.74
//! ```
//!
//! A problem file has the same fields plus `inequality`, `objective`,
//! `constraints`, `free`, `budget`, `seed` and an optional `sweep` table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::TwoQubitState;
use crate::error::{Error, Result};
use crate::inequalities::InequalityKind;
use crate::model::{AliceConfig, BobConfig, Direction, Scenario, Sharpness};
use crate::optimizer::{
    Budget, Constraint, ConstraintKind, DirectionFamily, Objective, OptimizationProblem, SweepSpec,
};
use num_complex::Complex64;
use nalgebra::Matrix4;

/// Margin above the classical bound demanded by a `violated = true`
/// constraint.
pub const VIOLATION_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Matrix(Vec<[f64; 2]>),
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Named("singlet".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliceFile {
    pub settings: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BobFile {
    pub settings: Vec<[f64; 2]>,
    pub lambda: f64,
}

/// Serialized form of a [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub state: StateSpec,
    pub alice: AliceFile,
    pub bobs: Vec<BobFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let angles = |ds: &[Direction]| ds.iter().map(|d| [d.theta(), d.phi()]).collect();
        let state = if s.state().is_singlet() {
            StateSpec::default()
        } else {
            StateSpec::Matrix(s.state().matrix().transpose().iter().map(|c| [c.re, c.im]).collect())
        };
        let n = s.n_settings() as f64;
        let uniform = s.weights().iter().flatten().all(|w| *w == 1.0 / n);
        Self {
            state,
            alice: AliceFile { settings: angles(s.alice().settings()) },
            bobs: s
                .bobs()
                .iter()
                .map(|b| BobFile { settings: angles(b.settings()), lambda: b.sharpness().value() })
                .collect(),
            weights: (!uniform).then(|| s.weights().to_vec()),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let state = match &self.state {
            StateSpec::Named(name) if name == "singlet" => TwoQubitState::singlet(),
            StateSpec::Named(name) => {
                return Err(field_error("state", format!("unknown state {name:?}; use \"singlet\" or 16 [re, im] pairs")))
            }
            StateSpec::Matrix(entries) => {
                if entries.len() != 16 {
                    return Err(field_error("state", format!("expected 16 [re, im] pairs, found {}", entries.len())));
                }
                let m = Matrix4::from_row_iterator(entries.iter().map(|[re, im]| Complex64::new(*re, *im)));
                TwoQubitState::from_matrix(m).map_err(|e| at("state", e))?
            }
        };
        let alice = directions(&self.alice.settings, "alice.settings")
            .and_then(|d| AliceConfig::new(d).map_err(|e| at("alice.settings", e)))?;
        let bobs = self
            .bobs
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let field = format!("bobs[{i}]");
                let dirs = directions(&b.settings, &format!("{field}.settings"))?;
                let lambda = Sharpness::new(b.lambda).map_err(|e| at(&format!("{field}.lambda"), e))?;
                BobConfig::new(dirs, lambda).map_err(|e| at(&field, e))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = alice.len();
        let weights = self
            .weights
            .clone()
            .unwrap_or_else(|| vec![vec![1.0 / n as f64; n]; bobs.len()]);
        Scenario::with_weights(state, alice, bobs, weights).map_err(|e| at("scenario", e))
    }
}

fn directions(angles: &[[f64; 2]], field: &str) -> Result<Vec<Direction>> {
    angles
        .iter()
        .enumerate()
        .map(|(i, [t, p])| Direction::from_angles(*t, *p).map_err(|e| at(&format!("{field}[{i}]"), e)))
        .collect()
}

/// Prefixes the offending field to a validation error.
fn at(field: &str, e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{field}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("{field}: {m}")),
        other => other,
    }
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::Parse { context: format!("field `{field}`"), message: message.into() }
}

fn toml_error(origin: &str, src: &str, e: toml::de::Error) -> Error {
    let context = match e.span() {
        Some(span) => {
            let before = &src[..span.start.min(src.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("{origin} line {line}, column {column}")
        }
        None => origin.to_string(),
    };
    Error::Parse { context, message: e.message().trim().to_string() }
}

pub fn parse_scenario(src: &str, origin: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(src).map_err(|e| toml_error(origin, src, e))?;
    file.to_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let src = std::fs::read_to_string(path)?;
    parse_scenario(&src, &path.display().to_string())
}

pub fn scenario_to_toml(s: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(s)).expect("scenario files always serialize")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum ObjectiveFile {
    Bob(usize),
    WorstMargin(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintFile {
    bob: usize,
    target: Option<f64>,
    at_least: Option<f64>,
    violated: Option<bool>,
    maximal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum FamilySpec {
    All(DirectionFamily),
    PerBob(Vec<DirectionFamily>),
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeFile {
    /// 1-based Bobs whose sharpness is optimized.
    lambdas: Option<Vec<usize>>,
    alice: Option<DirectionFamily>,
    bobs: Option<FamilySpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    bob: usize,
    start: f64,
    stop: f64,
    step: f64,
    tracked: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    #[serde(default)]
    state: StateSpec,
    alice: AliceFile,
    bobs: Vec<BobFile>,
    weights: Option<Vec<Vec<f64>>>,
    inequality: InequalityKind,
    objective: ObjectiveFile,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
    #[serde(default)]
    free: FreeFile,
    budget: Option<Budget>,
    seed: Option<u64>,
    sweep: Option<SweepFile>,
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub problem: OptimizationProblem,
    pub budget: Option<Budget>,
    pub seed: Option<u64>,
    pub sweep: Option<SweepSpec>,
}

pub fn parse_problem(src: &str, origin: &str) -> Result<ProblemConfig> {
    let file: ProblemFile = toml::from_str(src).map_err(|e| toml_error(origin, src, e))?;
    let template = ScenarioFile {
        state: file.state,
        alice: file.alice,
        bobs: file.bobs,
        weights: file.weights,
    }
    .to_scenario()?;
    let m = template.chain_len();
    let objective = match file.objective {
        ObjectiveFile::Bob(b) => Objective::Bob(b),
        ObjectiveFile::WorstMargin(bs) => Objective::WorstMargin(bs),
    };
    let mut problem = OptimizationProblem::new(template, file.inequality, objective);

    for (i, c) in file.constraints.iter().enumerate() {
        let field = format!("constraints[{i}]");
        let kinds = [
            c.target.map(ConstraintKind::Target),
            c.at_least.map(ConstraintKind::AtLeast),
            c.violated
                .filter(|v| *v)
                .map(|_| ConstraintKind::AtLeast(file.inequality.bound() + VIOLATION_MARGIN)),
            c.maximal.filter(|v| *v).map(|_| ConstraintKind::Maximal),
        ];
        let mut set = kinds.into_iter().flatten();
        let kind = match (set.next(), set.next()) {
            (Some(k), None) => k,
            _ => {
                return Err(field_error(
                    &field,
                    "give exactly one of target, at_least, violated = true, maximal = true",
                ))
            }
        };
        problem.constraints.push(Constraint { bob: c.bob, kind });
    }

    if let Some(lambdas) = &file.free.lambdas {
        let mut free = vec![false; m];
        for b in lambdas {
            let slot = b
                .checked_sub(1)
                .and_then(|i| free.get_mut(i))
                .ok_or_else(|| field_error("free.lambdas", format!("no Bob {b} in the {m}-Bob chain")))?;
            *slot = true;
        }
        problem.free_lambdas = free;
    }
    if let Some(alice) = file.free.alice {
        problem.alice = alice;
    }
    match file.free.bobs {
        Some(FamilySpec::All(f)) => problem.bob_directions = vec![f; m],
        Some(FamilySpec::PerBob(fs)) if fs.len() == m => problem.bob_directions = fs,
        Some(FamilySpec::PerBob(fs)) => {
            return Err(field_error("free.bobs", format!("{} entries for a {m}-Bob chain", fs.len())))
        }
        None => {}
    }
    problem.validate().map_err(|e| at("problem", e))?;

    let sweep = file
        .sweep
        .map(|s| SweepSpec::linear(s.bob, s.start, s.stop, s.step, s.tracked).map_err(|e| at("sweep", e)))
        .transpose()?;
    if let Some(b) = file.budget {
        if b.restarts == 0 || b.iterations == 0 {
            return Err(field_error("budget", "restarts and iterations must be positive"));
        }
    }
    Ok(ProblemConfig { problem, budget: file.budget, seed: file.seed, sweep })
}

pub fn load_problem(path: &Path) -> Result<ProblemConfig> {
    let src = std::fs::read_to_string(path)?;
    parse_problem(&src, &path.display().to_string())
}
