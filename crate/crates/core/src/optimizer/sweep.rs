use serde::Serialize;

use super::{maximize, Budget, Objective, OptimizationProblem};
use crate::error::{domain, Result};
use crate::inequalities::VIOLATION_SLACK;

/// Which sharpness to scan and which Bobs must steer together.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Bob whose sharpness is scanned (1-based).
    pub bob: usize,
    pub grid: Vec<f64>,
    /// Bobs whose simultaneous violation defines the region.
    pub tracked: Vec<usize>,
}

impl SweepSpec {
    /// Inclusive grid `start, start+step, …, stop`; points are rounded to
    /// ten decimals so that 0.70 + 21·0.01 is the literal 0.91.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN
    pub fn linear(bob: usize, start: f64, stop: f64, step: f64, tracked: Vec<usize>) -> Result<Self> {
        if !(step > 0.0) || !(stop >= start) {
            return Err(domain("sweep grid needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let grid = (0..count).map(|i| round_decimals(start + i as f64 * step)).collect();
        Ok(Self { bob, grid, tracked })
    }
}

fn round_decimals(v: f64) -> f64 {
    format!("{v:.10}").parse().unwrap_or(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub lambda: f64,
    /// Best achievable `min over tracked Bobs of (value − bound)`.
    pub worst_margin: f64,
    /// Steering value of every Bob at that optimum.
    pub values: Vec<f64>,
    pub all_violate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Smallest and largest grid sharpness where every tracked Bob violates.
    pub region: Option<(f64, f64)>,
}

/// Scans one Bob's sharpness over `spec.grid`.
///
/// At each grid value the free parameters are chosen, subject to the
/// problem's constraints, to maximize the worst margin among the tracked
/// Bobs.
pub fn sweep_lambda(
    problem: &OptimizationProblem,
    spec: &SweepSpec,
    budget: Budget,
    seed: u64,
) -> Result<SweepResult> {
    if spec.grid.is_empty() {
        return Err(domain("sweep grid is empty"));
    }
    if spec.tracked.is_empty() {
        return Err(domain("sweep tracks no Bob"));
    }
    let m = problem.template.chain_len();
    if spec.bob == 0 || spec.bob > m {
        return Err(domain(format!("swept Bob {} is outside the {m}-Bob chain", spec.bob)));
    }
    if let Some(l) = spec.grid.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return Err(domain(format!("grid sharpness {l} outside (0, 1]")));
    }

    let mut base = problem.clone();
    base.objective = Objective::WorstMargin(spec.tracked.clone());

    let mut points = Vec::with_capacity(spec.grid.len());
    for &lambda in &spec.grid {
        let mut p = base.clone();
        p.set_lambda(spec.bob, lambda)?;
        let r = maximize(&p, budget, seed)?;
        points.push(SweepPoint {
            lambda,
            worst_margin: r.best_value,
            values: r.evaluations.iter().map(|e| e.value).collect(),
            all_violate: r.best_value > VIOLATION_SLACK,
        });
    }
    let violating: Vec<f64> = points.iter().filter(|p| p.all_violate).map(|p| p.lambda).collect();
    let region = violating.first().zip(violating.last()).map(|(a, b)| (*a, *b));
    Ok(SweepResult { points, region })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid_hits_endpoints() {
        let s = SweepSpec::linear(1, 0.70, 0.92, 0.01, vec![1, 2]).unwrap();
        assert_eq!(s.grid.len(), 23);
        assert_eq!(s.grid[0], 0.70);
        assert_eq!(s.grid[21], 0.91);
        assert_eq!(*s.grid.last().unwrap(), 0.92);
        assert!(SweepSpec::linear(1, 0.5, 0.4, 0.01, vec![1]).is_err());
        assert!(SweepSpec::linear(1, 0.5, 0.6, 0.0, vec![1]).is_err());
    }

    #[test]
    fn empty_or_bad_grid_rejected() {
        let t = super::super::singlet_template(2, 2).unwrap();
        let p = OptimizationProblem::new(t, crate::InequalityKind::Cffw, Objective::Bob(2));
        let budget = Budget { restarts: 1, iterations: 10 };
        let empty = SweepSpec { bob: 1, grid: vec![], tracked: vec![1, 2] };
        assert!(sweep_lambda(&p, &empty, budget, 0).is_err());
        let bad = SweepSpec { bob: 1, grid: vec![1.2], tracked: vec![1, 2] };
        assert!(sweep_lambda(&p, &bad, budget, 0).is_err());
    }
}
