//! Named, pinned experiments.
//!
//! Every entry fixes its scenario or problem, its seed and the values it
//! must reproduce, so a full reproduction needs no user input.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use serde::Serialize;

use crate::error::{domain, Result};
use crate::inequalities::InequalityKind;
use crate::model::{AliceConfig, BobConfig, Direction, Scenario, Sharpness};
use crate::optimizer::{
    conjecture_probe, maximize, singlet_template, sweep_lambda, Budget, Constraint, DirectionSet, Objective,
    OptimizationProblem, SweepSpec,
};
use crate::report::{run_report, to_json, OptimizeReport};
use crate::verify::{verify, VerifyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Run,
    Optimize,
    Sweep,
    Verify,
    Conjecture,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Run(Scenario),
    Optimize(OptimizationProblem),
    Sweep { problem: OptimizationProblem, spec: SweepSpec },
    Conjecture { n_settings: usize, chain: usize, family: DirectionSet },
    Verify(VerifyOptions),
}

/// What a check reads from the experiment's result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Steering value of one Bob.
    Value { bob: usize, inequality: InequalityKind },
    RegionLow,
    RegionHigh,
    /// 1 if every property of the verification suite passed, else 0.
    SuitePassed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Within { value: f64, tolerance: f64 },
    Below(f64),
}

impl Expectation {
    pub fn holds(&self, x: f64) -> bool {
        match *self {
            Expectation::Within { value, tolerance } => (x - value).abs() <= tolerance,
            Expectation::Below(limit) => x < limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: Quantity,
    pub expectation: Expectation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub payload: Payload,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ExperimentSpec {
    pub fn kind(&self) -> ExperimentKind {
        match self.payload {
            Payload::Run(_) => ExperimentKind::Run,
            Payload::Optimize(_) => ExperimentKind::Optimize,
            Payload::Sweep { .. } => ExperimentKind::Sweep,
            Payload::Conjecture { .. } => ExperimentKind::Conjecture,
            Payload::Verify(_) => ExperimentKind::Verify,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub quantity: Quantity,
    pub expectation: Expectation,
    /// NaN when the result has no such quantity (e.g. an empty region).
    pub observed: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub name: String,
    pub kind: ExperimentKind,
    pub measurements: Vec<Measurement>,
    pub passed: bool,
    /// Full result as JSON text.
    #[serde(skip)]
    pub report: String,
}

fn within(value: f64, tolerance: f64) -> Expectation {
    Expectation::Within { value, tolerance }
}

fn value(bob: usize, inequality: InequalityKind) -> Quantity {
    Quantity::Value { bob, inequality }
}

fn check(quantity: Quantity, expectation: Expectation) -> Check {
    Check { quantity, expectation }
}

fn dir(theta: f64, phi: f64) -> Direction {
    Direction::from_angles(theta, phi).expect("registry angles are finite")
}

/// Alice on x and z, every Bob on the x–z diagonals at the given sharpness.
fn diagonal_chain(lambdas: &[f64]) -> Result<Scenario> {
    let alice = AliceConfig::new(vec![dir(FRAC_PI_2, 0.0), dir(0.0, 0.0)])?;
    let bobs = lambdas
        .iter()
        .map(|l| BobConfig::new(vec![dir(FRAC_PI_4, 0.0), dir(3.0 * FRAC_PI_4, 0.0)], Sharpness::new(*l)?))
        .collect::<Result<Vec<_>>>()?;
    Scenario::singlet(alice, bobs)
}

fn targets_problem(kind: InequalityKind, n: usize, targets: &[f64]) -> Result<OptimizationProblem> {
    let chain = targets.len() + 1;
    let mut p = OptimizationProblem::new(singlet_template(n, chain)?, kind, Objective::Bob(chain));
    for (i, t) in targets.iter().enumerate() {
        p = p.with_constraint(Constraint::target(i + 1, *t));
    }
    Ok(p)
}

/// The bundled experiments, in reproduction order.
pub fn registry() -> Result<Vec<ExperimentSpec>> {
    use InequalityKind::{Cffw, Cjwr};
    let spec = |name: &str, payload: Payload, checks: Vec<Check>| ExperimentSpec {
        name: name.to_string(),
        payload,
        seed: 1,
        checks,
    };
    let sqrt3 = 3f64.sqrt();

    let cjwr_window = |lambda1: f64| -> Result<Payload> {
        let p = OptimizationProblem::new(singlet_template(3, 3)?, Cjwr, Objective::Bob(3)).fix_lambda(1, lambda1)?;
        Ok(Payload::Sweep { problem: p, spec: SweepSpec::linear(2, 0.60, 0.92, 0.01, vec![2, 3])? })
    };
    let cffw_window = {
        let p = OptimizationProblem::new(singlet_template(2, 2)?, Cffw, Objective::Bob(2));
        Payload::Sweep { problem: p, spec: SweepSpec::linear(1, 0.70, 0.92, 0.01, vec![1, 2])? }
    };
    // one grid step, with room for the grid's own rounding
    let step = 0.01 + 1e-9;

    Ok(vec![
        spec(
            "sharp_singlet_chsh",
            Payload::Run(diagonal_chain(&[1.0])?),
            vec![check(value(1, Cffw), within(2.0 * SQRT_2, 1e-9))],
        ),
        spec(
            "diagonal_two_bobs",
            Payload::Run(diagonal_chain(&[0.74, 1.0])?),
            vec![check(value(1, Cffw), within(2.10, 0.01)), check(value(2, Cffw), within(2.36, 0.01))],
        ),
        spec(
            "sharp_repeat",
            Payload::Run(diagonal_chain(&[1.0, 1.0])?),
            vec![check(value(2, Cffw), Expectation::Below(2.0 * SQRT_2))],
        ),
        spec(
            "cffw_single_bob",
            Payload::Optimize(targets_problem(Cffw, 2, &[])?),
            vec![check(value(1, Cffw), within(2.0 * SQRT_2, 1e-6))],
        ),
        spec(
            "cffw_two_bobs",
            Payload::Optimize(targets_problem(Cffw, 2, &[2.10])?),
            vec![check(value(2, Cffw), within(2.36, 0.02))],
        ),
        spec("cffw_two_bobs_window", cffw_window, vec![
            check(Quantity::RegionLow, within(0.71, step)),
            check(Quantity::RegionHigh, within(0.91, step)),
        ]),
        spec(
            "cffw_three_bobs_at_2.10",
            Payload::Optimize(targets_problem(Cffw, 2, &[2.10, 2.10])?),
            vec![check(value(3, Cffw), within(1.72, 0.02)), check(value(3, Cffw), Expectation::Below(2.0))],
        ),
        spec(
            "cffw_three_bobs_at_2",
            Payload::Optimize(targets_problem(Cffw, 2, &[2.0, 2.0])?),
            vec![check(value(3, Cffw), within(1.88, 0.02)), check(value(3, Cffw), Expectation::Below(2.0))],
        ),
        spec(
            "cjwr3_single_bob",
            Payload::Optimize(targets_problem(Cjwr, 3, &[])?),
            vec![check(value(1, Cjwr), within(sqrt3, 1e-6))],
        ),
        spec(
            "cjwr3_three_bobs",
            Payload::Optimize(targets_problem(Cjwr, 3, &[1.05, 1.05])?),
            vec![check(value(3, Cjwr), within(1.21, 0.02))],
        ),
        spec("cjwr3_window_at_0.58", cjwr_window(0.58)?, vec![
            check(Quantity::RegionLow, within(0.66, step)),
            check(Quantity::RegionHigh, within(0.86, step)),
        ]),
        spec("cjwr3_window_at_0.64", cjwr_window(0.64)?, vec![
            check(Quantity::RegionLow, within(0.68, step)),
            check(Quantity::RegionHigh, within(0.84, step)),
        ]),
        spec(
            "cjwr3_four_bobs",
            Payload::Conjecture { n_settings: 3, chain: 4, family: DirectionSet::Free },
            vec![check(value(4, Cjwr), within(0.94, 0.02)), check(value(4, Cjwr), Expectation::Below(1.0))],
        ),
        spec(
            "cjwr2_three_bobs",
            Payload::Conjecture { n_settings: 2, chain: 3, family: DirectionSet::Free },
            vec![check(value(3, Cjwr), Expectation::Below(1.0))],
        ),
        spec(
            "property_suite",
            Payload::Verify(VerifyOptions::default()),
            vec![check(Quantity::SuitePassed, within(1.0, 0.0))],
        ),
    ])
}

pub fn find(name: &str) -> Result<ExperimentSpec> {
    registry()?
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| domain(format!("no bundled experiment named {name:?}")))
}

/// Scenarios of every bundled `run` experiment.
pub fn bundled_scenarios() -> Result<Vec<(String, Scenario)>> {
    Ok(registry()?
        .into_iter()
        .filter_map(|e| match e.payload {
            Payload::Run(s) => Some((e.name, s)),
            _ => None,
        })
        .collect())
}

/// Runs one experiment and evaluates its checks.
pub fn run_experiment(spec: &ExperimentSpec, budget: Budget) -> Result<ExperimentOutcome> {
    let mut values: Vec<(usize, InequalityKind, f64)> = Vec::new();
    let mut region = None;
    let mut suite_passed = None;
    let report = match &spec.payload {
        Payload::Run(s) => {
            let r = run_report(s)?;
            for b in &r.bobs {
                values.extend(b.evaluations.iter().map(|e| (b.bob, e.kind.inequality(), e.value)));
            }
            to_json(&r)
        }
        Payload::Optimize(p) => {
            let r = maximize(p, budget, spec.seed)?;
            values.extend(r.evaluations.iter().map(|e| (e.bob_index, e.kind.inequality(), e.value)));
            to_json(&OptimizeReport::from(&r))
        }
        Payload::Sweep { problem, spec: sweep } => {
            let r = sweep_lambda(problem, sweep, budget, spec.seed)?;
            region = r.region;
            to_json(&r)
        }
        Payload::Conjecture { n_settings, chain, family } => {
            let r = conjecture_probe(*n_settings, *chain, *family, budget, spec.seed)?;
            values.extend(r.values.iter().enumerate().map(|(i, v)| (i + 1, InequalityKind::Cjwr, *v)));
            to_json(&r)
        }
        Payload::Verify(opts) => {
            let r = verify(opts)?;
            suite_passed = Some(r.passed);
            to_json(&r)
        }
    };

    let measurements: Vec<Measurement> = spec
        .checks
        .iter()
        .map(|c| {
            let observed = match c.quantity {
                Quantity::Value { bob, inequality } => values
                    .iter()
                    .find(|(b, k, _)| *b == bob && *k == inequality)
                    .map_or(f64::NAN, |v| v.2),
                Quantity::RegionLow => region.map_or(f64::NAN, |r| r.0),
                Quantity::RegionHigh => region.map_or(f64::NAN, |r| r.1),
                Quantity::SuitePassed => suite_passed.map_or(f64::NAN, |p| if p { 1.0 } else { 0.0 }),
            };
            Measurement { quantity: c.quantity, expectation: c.expectation, observed, passed: c.expectation.holds(observed) }
        })
        .collect();
    Ok(ExperimentOutcome {
        name: spec.name.clone(),
        kind: spec.kind(),
        passed: measurements.iter().all(|m| m.passed),
        measurements,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_are_unique() {
        let r = registry().unwrap();
        let names: HashSet<_> = r.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names.len(), r.len());
        assert!(find("diagonal_two_bobs").is_ok());
        assert!(find("nope").is_err());
    }

    #[test]
    fn run_experiments_pass() {
        for e in registry().unwrap().iter().filter(|e| e.kind() == ExperimentKind::Run) {
            let o = run_experiment(e, Budget::default()).unwrap();
            assert!(o.passed, "{}: {:?}", e.name, o.measurements);
        }
    }

    #[test]
    fn missing_quantities_fail() {
        assert!(!within(1.0, 0.1).holds(f64::NAN));
        assert!(!Expectation::Below(1.0).holds(f64::NAN));
        assert!(Expectation::Below(1.0).holds(0.999));
        assert!(!Expectation::Below(1.0).holds(1.0));
    }
}
