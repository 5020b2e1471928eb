use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::platonic::platonic_axes;
use super::{maximize, singlet_template, Budget, Constraint, DirectionFamily, Objective, OptimizationProblem};
use crate::error::{domain, Result};
use crate::inequalities::InequalityKind;
use crate::model::{AliceConfig, BobConfig, Direction, Scenario, Sharpness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionSet {
    /// For n ≤ 3 Alice on the coordinate axes and every Bob on a freely
    /// rotated orthonormal frame; for larger n Alice on a fixed spread of
    /// axes and every Bob direction free.
    Free,
    /// Alice on Platonic axes, every Bob on a rotated copy of them.
    Platonic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub n_settings: usize,
    pub chain: usize,
    pub family: DirectionSet,
    /// CJWR value of every Bob at the optimum.
    pub values: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Whether the last Bob still violates while all earlier Bobs sit on
    /// the classical bound.
    pub last_violates: bool,
    pub converged: bool,
}

/// Largest CJWR-n value of the last Bob in a `chain`-long sequence when
/// every earlier Bob is held exactly at the classical bound and the last
/// Bob measures sharply.
pub fn conjecture_probe(
    n_settings: usize,
    chain: usize,
    family: DirectionSet,
    budget: Budget,
    seed: u64,
) -> Result<ConjectureReport> {
    if n_settings < 2 {
        return Err(domain("the CJWR probe needs at least 2 settings"));
    }
    if chain == 0 {
        return Err(domain("the CJWR probe needs at least one Bob"));
    }
    let (template, alice_family, bob_family) = match family {
        DirectionSet::Platonic => {
            let axes = platonic_axes(n_settings)?;
            let dirs = axes.iter().map(Direction::from_vector).collect::<Result<Vec<_>>>()?;
            let alice = AliceConfig::new(dirs.clone())?;
            let bobs = (0..chain)
                .map(|b| BobConfig::new(dirs.clone(), Sharpness::new(if b + 1 == chain { 1.0 } else { 0.5 })?))
                .collect::<Result<Vec<_>>>()?;
            (Scenario::singlet(alice, bobs)?, DirectionFamily::Fixed, DirectionFamily::Rotated)
        }
        DirectionSet::Free if n_settings <= 3 => {
            (singlet_template(n_settings, chain)?, DirectionFamily::Fixed, DirectionFamily::Rotated)
        }
        DirectionSet::Free => {
            let dirs = hemisphere_spread(n_settings)
                .iter()
                .map(Direction::from_vector)
                .collect::<Result<Vec<_>>>()?;
            let alice = AliceConfig::new(dirs.clone())?;
            let bobs = (0..chain)
                .map(|b| BobConfig::new(dirs.clone(), Sharpness::new(if b + 1 == chain { 1.0 } else { 0.5 })?))
                .collect::<Result<Vec<_>>>()?;
            (Scenario::singlet(alice, bobs)?, DirectionFamily::Fixed, DirectionFamily::Free)
        }
    };

    let mut problem = OptimizationProblem::new(template, InequalityKind::Cjwr, Objective::Bob(chain));
    problem.alice = alice_family;
    problem.bob_directions = vec![bob_family; chain];
    for b in 1..chain {
        problem = problem.with_constraint(Constraint::target(b, 1.0));
    }
    let r = maximize(&problem, budget, seed)?;
    let values: Vec<f64> = r.evaluations.iter().map(|e| e.value).collect();
    Ok(ConjectureReport {
        n_settings,
        chain,
        family,
        last_violates: r.evaluations.last().is_some_and(|e| e.violated),
        lambdas: r.argmax.bobs().iter().map(|b| b.sharpness().value()).collect(),
        values,
        converged: r.converged,
    })
}

/// `n` distinct axes spread over the upper hemisphere (Fibonacci lattice).
fn hemisphere_spread(n: usize) -> Vec<Vector3<f64>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}
