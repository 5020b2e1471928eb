//! Machine-readable results: JSON text and CSV.
//!
//! Angles are rounded to 12 significant digits; steering values and
//! correlations are written at full precision.

use std::fmt::Write as _;

use serde::Serialize;

use crate::analytic::correlation_tables;
use crate::config::ScenarioFile;
use crate::error::Result;
use crate::inequalities::{InequalityKind, SteeringEvaluation};
use crate::model::Scenario;
use crate::optimizer::{ConjectureReport, OptimizationResult, SweepResult};

pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Scenario file with every angle rounded to 12 significant digits.
pub fn rounded_scenario(s: &Scenario) -> ScenarioFile {
    let mut f = ScenarioFile::from_scenario(s);
    let round = |v: &mut Vec<[f64; 2]>| {
        for a in v.iter_mut().flatten() {
            *a = round_significant(*a, 12);
        }
    };
    round(&mut f.alice.settings);
    for b in &mut f.bobs {
        round(&mut b.settings);
    }
    f
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobReport {
    pub bob: usize,
    pub lambda: f64,
    /// Rows are Alice's settings, columns Bob's.
    pub correlations: Vec<Vec<f64>>,
    pub evaluations: Vec<SteeringEvaluation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioFile,
    pub bobs: Vec<BobReport>,
}

impl RunReport {
    pub fn evaluation(&self, bob: usize, kind: InequalityKind) -> Option<&SteeringEvaluation> {
        let b = self.bobs.get(bob.checked_sub(1)?)?;
        b.evaluations.iter().find(|e| e.kind.inequality() == kind)
    }
}

/// Averaged correlations of every Bob with Alice, and every applicable
/// inequality (CFFW only for two settings).
pub fn run_report(s: &Scenario) -> Result<RunReport> {
    let tables = correlation_tables(s)?;
    let mut bobs = Vec::with_capacity(tables.len());
    for (t, b) in tables.iter().zip(s.bobs()) {
        let mut evaluations = Vec::new();
        if s.n_settings() == 2 {
            evaluations.push(InequalityKind::Cffw.evaluate(t)?);
        }
        evaluations.push(InequalityKind::Cjwr.evaluate(t)?);
        let e = t.entries();
        bobs.push(BobReport {
            bob: t.bob_index(),
            lambda: b.sharpness().value(),
            correlations: (0..e.nrows()).map(|i| e.row(i).iter().copied().collect()).collect(),
            evaluations,
        });
    }
    Ok(RunReport { scenario: rounded_scenario(s), bobs })
}

pub fn run_csv(r: &RunReport) -> String {
    let mut out = String::from("bob,lambda,inequality,value,bound,violated\n");
    for b in &r.bobs {
        for e in &b.evaluations {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{},{}",
                b.bob,
                b.lambda,
                e.kind.inequality(),
                e.value,
                e.bound,
                e.violated
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub best_value: f64,
    pub argmax: ScenarioFile,
    pub evaluations: Vec<SteeringEvaluation>,
    pub residuals: Vec<f64>,
    pub restarts: usize,
    pub function_evaluations: usize,
    pub converged: bool,
}

impl From<&OptimizationResult> for OptimizeReport {
    fn from(r: &OptimizationResult) -> Self {
        Self {
            best_value: r.best_value,
            argmax: rounded_scenario(&r.argmax),
            evaluations: r.evaluations.clone(),
            residuals: r.residuals.clone(),
            restarts: r.restarts,
            function_evaluations: r.function_evaluations,
            converged: r.converged,
        }
    }
}

pub fn optimize_csv(r: &OptimizeReport) -> String {
    let mut out = String::from("bob,lambda,value,bound,violated,settings\n");
    for (e, b) in r.evaluations.iter().zip(&r.argmax.bobs) {
        let angles: Vec<String> = b.settings.iter().map(|[t, p]| format!("{t} {p}")).collect();
        let _ = writeln!(
            out,
            "{},{},{:.16e},{},{},{}",
            e.bob_index,
            b.lambda,
            e.value,
            e.bound,
            e.violated,
            angles.join(";")
        );
    }
    out
}

pub fn sweep_csv(r: &SweepResult) -> String {
    let chain = r.points.first().map_or(0, |p| p.values.len());
    let mut out = String::from("lambda,worst_margin,all_violate");
    for b in 1..=chain {
        let _ = write!(out, ",value_b{b}");
    }
    out.push('\n');
    for p in &r.points {
        let _ = write!(out, "{},{:.16e},{}", p.lambda, p.worst_margin, p.all_violate);
        for v in &p.values {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn conjecture_csv(r: &ConjectureReport) -> String {
    let mut out = String::from("bob,lambda,value\n");
    for (i, (v, l)) in r.values.iter().zip(&r.lambdas).enumerate() {
        let _ = writeln!(out, "{},{l},{v:.16e}", i + 1);
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AliceConfig, BobConfig, Direction, Sharpness};

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_significant(1234.567890123456, 12), 1234.56789012);
        assert_eq!(round_significant(-0.000123456789012345, 12), -0.000123456789012);
        assert_eq!(round_significant(0.0, 12), 0.0);
    }

    #[test]
    fn run_report_lists_both_inequalities_for_two_settings() {
        let alice = AliceConfig::coordinate_axes(2).unwrap();
        let bob = BobConfig::new(vec![Direction::x(), Direction::z()], Sharpness::sharp()).unwrap();
        let s = Scenario::singlet(alice, vec![bob]).unwrap();
        let r = run_report(&s).unwrap();
        assert_eq!(r.bobs[0].evaluations.len(), 2);
        let c = &r.bobs[0].correlations;
        assert!((c[0][0] + 1.0).abs() < 1e-15 && (c[1][1] + 1.0).abs() < 1e-15);
        assert!(c[0][1].abs() < 1e-15 && c[1][0].abs() < 1e-15);
        let csv = run_csv(&r);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,1,cjwr,"));
        let json: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(json["bobs"][0]["evaluations"][0]["violated"], serde_json::Value::Bool(true));
    }
}
