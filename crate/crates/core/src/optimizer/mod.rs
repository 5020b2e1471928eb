//! Constrained maximization of steering values over measurement directions
//! and sharpness parameters.
//!
//! Every free quantity is mapped to an unconstrained real coordinate:
//! directions through their spherical angles (or a rotation of a reference
//! set), sharpness through `λ = 0.505 − 0.495 cos u` so that λ stays in
//! `[0.01, 1]`. Constraints enter as quadratic exterior penalties with an
//! increasing weight schedule; each restart is an independent multi-round
//! simplex search, the first from the template and the rest from seeded
//! random starts.

mod nelder_mead;
pub mod platonic;
mod sweep;
mod conjecture;

pub use conjecture::{conjecture_probe, ConjectureReport, DirectionSet};
pub use nelder_mead::{minimize, SimplexOptions, SimplexOutcome};
pub use sweep::{sweep_lambda, SweepPoint, SweepResult, SweepSpec};

use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{decohere, table_entries, CorrelationMatrixState};
use crate::error::{domain, Error, Result};
use crate::inequalities::{InequalityKind, SteeringEvaluation};
use crate::model::{quality_factor, ORTHOGONALITY_TOL, spherical, AliceConfig, BobConfig, Direction, Scenario, Sharpness};

/// Residual below which a constraint counts as satisfied.
pub const FEASIBILITY_TOL: f64 = 1e-4;
/// Penalty weights of the outer rounds.
pub const PENALTY_SCHEDULE: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];
pub const LAMBDA_MIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionFamily {
    /// Held at the template's directions.
    Fixed,
    /// The template's directions under one common free rotation.
    Rotated,
    /// Every direction has its own free polar and azimuthal angle.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Steering value equal to the target.
    Target(f64),
    /// Steering value at least the target.
    AtLeast(f64),
    /// The Bob attains the largest value reachable with his own directions,
    /// given his sharpness, Alice's settings and the Bobs before him.
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub bob: usize,
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn target(bob: usize, value: f64) -> Self {
        Self { bob, kind: ConstraintKind::Target(value) }
    }

    pub fn at_least(bob: usize, value: f64) -> Self {
        Self { bob, kind: ConstraintKind::AtLeast(value) }
    }

    pub fn maximal(bob: usize) -> Self {
        Self { bob, kind: ConstraintKind::Maximal }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize one Bob's steering value.
    Bob(usize),
    /// Maximize the smallest margin `value − bound` over several Bobs.
    WorstMargin(Vec<usize>),
}

impl Objective {
    fn bobs(&self) -> Vec<usize> {
        match self {
            Objective::Bob(b) => vec![*b],
            Objective::WorstMargin(bs) => bs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub iterations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { restarts: 64, iterations: 2000 }
    }
}

/// What to maximize, under which constraints, over which parameters.
///
/// The template scenario supplies the state, the number of settings, the
/// chain length, reference directions for `Fixed`/`Rotated` families and
/// the values of every sharpness that is not free.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub template: Scenario,
    pub kind: InequalityKind,
    pub objective: Objective,
    pub constraints: Vec<Constraint>,
    pub alice: DirectionFamily,
    pub bob_directions: Vec<DirectionFamily>,
    pub free_lambdas: Vec<bool>,
}

impl OptimizationProblem {
    /// Problem with every sharpness except the last Bob's free.
    ///
    /// A Bob whose template settings are orthonormal keeps them orthonormal
    /// and rotates them as a frame; any other Bob has free directions.
    /// Alice is pinned to the template (the singlet is rotation invariant)
    /// unless the state is something else, in which case her frame rotates.
    pub fn new(template: Scenario, kind: InequalityKind, objective: Objective) -> Self {
        let m = template.chain_len();
        let alice = if template.state().is_singlet() {
            DirectionFamily::Fixed
        } else {
            DirectionFamily::Rotated
        };
        let bob_directions = template
            .bobs()
            .iter()
            .map(|b| {
                if is_orthonormal(b.settings()) {
                    DirectionFamily::Rotated
                } else {
                    DirectionFamily::Free
                }
            })
            .collect();
        let mut free_lambdas = vec![true; m];
        free_lambdas[m - 1] = false;
        Self {
            template,
            kind,
            objective,
            constraints: Vec::new(),
            alice,
            bob_directions,
            free_lambdas,
        }
    }

    /// Lets every Bob choose each direction independently.
    pub fn with_free_bobs(mut self) -> Self {
        self.bob_directions.fill(DirectionFamily::Free);
        self
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    /// Sets Bob `bob`'s sharpness in the template and removes it from the
    /// free parameters.
    pub fn fix_lambda(mut self, bob: usize, lambda: f64) -> Result<Self> {
        self.set_lambda(bob, lambda)?;
        Ok(self)
    }

    pub(crate) fn set_lambda(&mut self, bob: usize, lambda: f64) -> Result<()> {
        let idx = bob
            .checked_sub(1)
            .filter(|i| *i < self.template.chain_len())
            .ok_or_else(|| domain(format!("no Bob {bob} in the chain")))?;
        let sharpness = Sharpness::new(lambda)?;
        let mut bobs = self.template.bobs().to_vec();
        bobs[idx] = BobConfig::new(bobs[idx].settings().to_vec(), sharpness)?;
        self.template = Scenario::with_weights(
            self.template.state().clone(),
            self.template.alice().clone(),
            bobs,
            self.template.weights().to_vec(),
        )?;
        self.free_lambdas[idx] = false;
        Ok(())
    }

    fn max_bob(&self) -> usize {
        self.objective
            .bobs()
            .into_iter()
            .chain(self.constraints.iter().map(|c| c.bob))
            .max()
            .unwrap_or(1)
    }

    /// Largest value the functional can take for any state and settings.
    fn algebraic_max(&self) -> f64 {
        match self.kind {
            InequalityKind::Cffw => 2.0 * std::f64::consts::SQRT_2,
            InequalityKind::Cjwr => (self.template.n_settings() as f64).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.template.chain_len();
        let n = self.template.n_settings();
        if self.kind == InequalityKind::Cffw && n != 2 {
            return Err(domain(format!("CFFW needs 2 settings, template has {n}")));
        }
        if self.bob_directions.len() != m || self.free_lambdas.len() != m {
            return Err(domain("per-Bob parameter flags do not match the chain length"));
        }
        let objective_bobs = self.objective.bobs();
        if objective_bobs.is_empty() {
            return Err(domain("objective names no Bob"));
        }
        for b in objective_bobs.iter().chain(self.constraints.iter().map(|c| &c.bob)) {
            if *b == 0 || *b > m {
                return Err(domain(format!("Bob {b} is outside the {m}-Bob chain")));
            }
        }
        if let Objective::Bob(target) = self.objective {
            for c in &self.constraints {
                // a target Bob may itself be required to measure optimally
                let ok = c.bob < target || (c.bob == target && c.kind == ConstraintKind::Maximal);
                if !ok {
                    return Err(domain(format!(
                        "constraint on Bob {} does not precede the objective Bob {target}",
                        c.bob
                    )));
                }
            }
        }
        if self.alice == DirectionFamily::Free && n <= 3 {
            return Err(domain("Alice's directions must stay orthogonal; use fixed or rotated"));
        }
        let max = self.algebraic_max();
        for c in &self.constraints {
            let t = match c.kind {
                ConstraintKind::Target(t) | ConstraintKind::AtLeast(t) => t,
                ConstraintKind::Maximal => continue,
            };
            if !t.is_finite() || t < 0.0 || t > max {
                return Err(Error::Infeasible(format!(
                    "Bob {} cannot reach {} = {t}; the {} value lies in [0, {max:.6}]",
                    c.bob, self.kind, self.kind
                )));
            }
        }
        Ok(())
    }
}

/// Best point found by [`maximize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_value: f64,
    pub argmax: Scenario,
    /// Steering evaluations of every Bob in the chain at the argmax.
    pub evaluations: Vec<SteeringEvaluation>,
    /// Constraint residuals in the order of `problem.constraints`.
    pub residuals: Vec<f64>,
    pub restarts: usize,
    pub function_evaluations: usize,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn value_of(&self, bob: usize) -> Option<f64> {
        self.evaluations.get(bob.checked_sub(1)?).map(|e| e.value)
    }
}

// ---------------------------------------------------------------------------
// parameter layout

#[derive(Debug, Clone, Copy)]
enum Slot {
    None,
    Rotation(usize),
    Angles(usize),
}

struct Layout {
    alice: Slot,
    bobs: Vec<Slot>,
    lambdas: Vec<Option<usize>>,
    dim: usize,
    alice_ref: Vec<Vector3<f64>>,
    bob_ref: Vec<Vec<Vector3<f64>>>,
    fixed_lambdas: Vec<f64>,
}

pub(crate) struct Decoded {
    pub alice: Vec<Vector3<f64>>,
    pub bobs: Vec<Vec<Vector3<f64>>>,
    pub lambdas: Vec<f64>,
}

fn is_orthonormal(settings: &[Direction]) -> bool {
    let v: Vec<Vector3<f64>> = settings.iter().map(Direction::unit_vector).collect();
    v.len() <= 3
        && v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| a.dot(b).abs() < ORTHOGONALITY_TOL))
}

#[inline]
fn lambda_from(u: f64) -> f64 {
    let half = 0.5 * (1.0 - LAMBDA_MIN);
    (1.0 - half) - half * u.cos()
}

fn lambda_to(lambda: f64) -> f64 {
    let half = 0.5 * (1.0 - LAMBDA_MIN);
    (((1.0 - half) - lambda) / half).clamp(-1.0, 1.0).acos()
}

fn rotation(x: &[f64]) -> Matrix3<f64> {
    *Rotation3::from_euler_angles(x[0], x[1], x[2]).matrix()
}

impl Layout {
    fn new(problem: &OptimizationProblem) -> Self {
        let s = &problem.template;
        let n = s.n_settings();
        let mut dim = 0;
        let mut slot = |family: DirectionFamily| match family {
            DirectionFamily::Fixed => Slot::None,
            DirectionFamily::Rotated => {
                dim += 3;
                Slot::Rotation(dim - 3)
            }
            DirectionFamily::Free => {
                dim += 2 * n;
                Slot::Angles(dim - 2 * n)
            }
        };
        let alice = slot(problem.alice);
        let bobs: Vec<Slot> = problem.bob_directions.iter().map(|f| slot(*f)).collect();
        let lambdas = problem
            .free_lambdas
            .iter()
            .map(|free| {
                free.then(|| {
                    dim += 1;
                    dim - 1
                })
            })
            .collect();
        Self {
            alice,
            bobs,
            lambdas,
            dim,
            alice_ref: s.alice().settings().iter().map(Direction::unit_vector).collect(),
            bob_ref: s
                .bobs()
                .iter()
                .map(|b| b.settings().iter().map(Direction::unit_vector).collect())
                .collect(),
            fixed_lambdas: s.bobs().iter().map(|b| b.sharpness().value()).collect(),
        }
    }

    fn directions(slot: Slot, reference: &[Vector3<f64>], x: &[f64]) -> Vec<Vector3<f64>> {
        match slot {
            Slot::None => reference.to_vec(),
            Slot::Rotation(o) => {
                let r = rotation(&x[o..o + 3]);
                reference.iter().map(|v| r * v).collect()
            }
            Slot::Angles(o) => (0..reference.len())
                .map(|i| spherical(x[o + 2 * i], x[o + 2 * i + 1]))
                .collect(),
        }
    }

    fn decode(&self, x: &[f64]) -> Decoded {
        Decoded {
            alice: Self::directions(self.alice, &self.alice_ref, x),
            bobs: self
                .bobs
                .iter()
                .zip(&self.bob_ref)
                .map(|(slot, r)| Self::directions(*slot, r, x))
                .collect(),
            lambdas: self
                .lambdas
                .iter()
                .zip(&self.fixed_lambdas)
                .map(|(slot, fixed)| slot.map_or(*fixed, |o| lambda_from(x[o])))
                .collect(),
        }
    }

    /// The template configuration itself: identity rotations, reference
    /// angles and template sharpness values.
    fn template_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (slot, reference) in std::iter::once((&self.alice, &self.alice_ref)).chain(self.bobs.iter().zip(&self.bob_ref)) {
            if let Slot::Angles(o) = *slot {
                for (i, v) in reference.iter().enumerate() {
                    x[o + 2 * i] = v.z.clamp(-1.0, 1.0).acos();
                    x[o + 2 * i + 1] = v.y.atan2(v.x);
                }
            }
        }
        for (slot, lambda) in self.lambdas.iter().zip(&self.fixed_lambdas) {
            if let Some(o) = slot {
                x[*o] = lambda_to(*lambda);
            }
        }
        x
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (slot, reference) in std::iter::once((&self.alice, &self.alice_ref)).chain(self.bobs.iter().zip(&self.bob_ref)) {
            match *slot {
                Slot::None => {}
                Slot::Rotation(o) => {
                    for v in &mut x[o..o + 3] {
                        *v = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    }
                }
                Slot::Angles(o) => {
                    for i in 0..reference.len() {
                        // uniform on the sphere
                        x[o + 2 * i] = rng.gen_range(-1.0f64..1.0).acos();
                        x[o + 2 * i + 1] = rng.gen_range(0.0..std::f64::consts::TAU);
                    }
                }
            }
        }
        for o in self.lambdas.iter().flatten() {
            x[*o] = rng.gen_range(0.0..std::f64::consts::PI);
        }
        x
    }
}

/// Steering values of Bobs `1..=upto` and, per Bob, the largest value his
/// own directions could reach in the same position.
pub(crate) fn chain_values(
    kind: InequalityKind,
    t0: &Matrix3<f64>,
    d: &Decoded,
    weights: &[Vec<f64>],
    upto: usize,
    with_maximal: bool,
) -> (Vec<f64>, Vec<f64>) {
    let mut t = *t0;
    let mut values = Vec::with_capacity(upto);
    let mut maximal = Vec::new();
    for b in 0..upto {
        let lambda = d.lambdas[b];
        let entries = table_entries(&d.alice, &t, &d.bobs[b], lambda);
        values.push(kind.value_unchecked(&entries));
        if with_maximal {
            maximal.push(lambda * best_response(kind, &d.alice, &t));
        }
        if b + 1 < upto {
            t = decohere(&t, &d.bobs[b], quality_factor(lambda), &weights[b]);
        }
    }
    (values, maximal)
}

/// Maximum over Bob directions of the functional at unit sharpness, for
/// fixed Alice settings and correlation matrix `t`.
fn best_response(kind: InequalityKind, alice: &[Vector3<f64>], t: &Matrix3<f64>) -> f64 {
    let rows: Vec<Vector3<f64>> = alice.iter().map(|x| t.transpose() * x).collect();
    match kind {
        // the 2×3 matrix of rows has two singular values; the optimum is
        // 2·sqrt(σ₁² + σ₂²), i.e. twice its Frobenius norm
        InequalityKind::Cffw => 2.0 * rows.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt(),
        InequalityKind::Cjwr => rows.iter().map(|r| r.norm()).sum::<f64>() / (alice.len() as f64).sqrt(),
    }
}

struct Evaluator<'a> {
    problem: &'a OptimizationProblem,
    layout: Layout,
    t0: Matrix3<f64>,
    upto: usize,
    with_maximal: bool,
}

struct Point {
    objective: f64,
    residuals: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a OptimizationProblem) -> Self {
        Self {
            problem,
            layout: Layout::new(problem),
            t0: *CorrelationMatrixState::from_state(problem.template.state()).matrix(),
            upto: problem.max_bob(),
            with_maximal: problem.constraints.iter().any(|c| c.kind == ConstraintKind::Maximal),
        }
    }

    fn point(&self, x: &[f64]) -> Point {
        let d = self.layout.decode(x);
        let (values, maximal) = chain_values(
            self.problem.kind,
            &self.t0,
            &d,
            self.problem.template.weights(),
            self.upto,
            self.with_maximal,
        );
        let bound = self.problem.kind.bound();
        let objective = match &self.problem.objective {
            Objective::Bob(b) => values[b - 1],
            Objective::WorstMargin(bs) => bs.iter().map(|b| values[b - 1] - bound).fold(f64::INFINITY, f64::min),
        };
        let residuals = self
            .problem
            .constraints
            .iter()
            .map(|c| {
                let v = values[c.bob - 1];
                match c.kind {
                    ConstraintKind::Target(t) => v - t,
                    ConstraintKind::AtLeast(t) => (t - v).max(0.0),
                    ConstraintKind::Maximal => v - maximal[c.bob - 1],
                }
            })
            .collect();
        Point { objective, residuals }
    }

    fn penalized(&self, x: &[f64], weight: f64) -> f64 {
        let p = self.point(x);
        -p.objective + weight * p.residuals.iter().map(|r| r * r).sum::<f64>()
    }

    fn scenario(&self, x: &[f64]) -> Result<Scenario> {
        let d = self.layout.decode(x);
        let t = &self.problem.template;
        let alice = AliceConfig::new(d.alice.iter().map(Direction::from_vector).collect::<Result<_>>()?)?;
        let bobs = d
            .bobs
            .iter()
            .zip(&d.lambdas)
            .map(|(dirs, l)| {
                BobConfig::new(
                    dirs.iter().map(Direction::from_vector).collect::<Result<_>>()?,
                    Sharpness::new(*l)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Scenario::with_weights(t.state().clone(), alice, bobs, t.weights().to_vec())
    }
}

struct RestartOutcome {
    x: Vec<f64>,
    objective: f64,
    max_residual: f64,
    evaluations: usize,
    converged: bool,
}

fn run_restart(eval: &Evaluator<'_>, budget: &Budget, seed: u64, restart: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut x = if restart == 0 { eval.layout.template_start() } else { eval.layout.random_start(&mut rng) };
    let mut evaluations = 0;
    let mut converged = false;
    for (round, weight) in PENALTY_SCHEDULE.iter().enumerate() {
        let opts = SimplexOptions {
            max_iterations: budget.iterations,
            diameter_tol: 1e-8,
            initial_step: if round == 0 { 0.5 } else { 0.05 },
        };
        let out = minimize(|p| eval.penalized(p, *weight), &x, &opts);
        evaluations += out.evaluations;
        converged = out.converged;
        x = out.x;
    }
    let p = eval.point(&x);
    let max_residual = p.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    RestartOutcome { x, objective: p.objective, max_residual, evaluations, converged }
}

/// Multi-start penalty search. Deterministic for a fixed `seed`.
pub fn maximize(problem: &OptimizationProblem, budget: Budget, seed: u64) -> Result<OptimizationResult> {
    problem.validate()?;
    if budget.restarts == 0 || budget.iterations == 0 {
        return Err(domain("budget needs at least one restart and one iteration"));
    }
    let eval = Evaluator::new(problem);
    let outcomes: Vec<RestartOutcome> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| run_restart(&eval, &budget, seed, r))
        .collect();

    let function_evaluations = outcomes.iter().map(|o| o.evaluations).sum();
    let best = outcomes
        .iter()
        .filter(|o| o.max_residual < FEASIBILITY_TOL)
        .fold(None::<&RestartOutcome>, |best, o| match best {
            Some(b) if b.objective >= o.objective => Some(b),
            _ => Some(o),
        });
    let Some(best) = best else {
        let closest = outcomes.iter().map(|o| o.max_residual).fold(f64::INFINITY, f64::min);
        return Err(Error::Infeasible(format!(
            "no restart met the constraints (smallest residual {closest:.3e} > {FEASIBILITY_TOL:e})"
        )));
    };

    let argmax = eval.scenario(&best.x)?;
    let tables = crate::analytic::correlation_tables(&argmax)?;
    let evaluations = tables.iter().map(|t| problem.kind.evaluate(t)).collect::<Result<Vec<_>>>()?;
    let residuals = eval.point(&best.x).residuals;
    Ok(OptimizationResult {
        best_value: best.objective,
        argmax,
        evaluations,
        residuals,
        restarts: budget.restarts,
        function_evaluations,
        converged: best.converged && best.max_residual < FEASIBILITY_TOL,
    })
}

/// Convenience: a template scenario on the singlet with Alice on the
/// coordinate axes and `chain` Bobs copying her directions, the last one
/// sharp and the others at λ = 0.5.
pub fn singlet_template(n_settings: usize, chain: usize) -> Result<Scenario> {
    if chain == 0 {
        return Err(domain("chain needs at least one Bob"));
    }
    let alice = AliceConfig::coordinate_axes(n_settings)?;
    let bobs = (0..chain)
        .map(|b| {
            let l = if b + 1 == chain { 1.0 } else { 0.5 };
            BobConfig::new(alice.settings().to_vec(), Sharpness::new(l)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Scenario::singlet(alice, bobs)
}

#[doc(hidden)]
pub fn encode_lambda(lambda: f64) -> f64 {
    lambda_to(lambda)
}

#[doc(hidden)]
pub fn decode_lambda(u: f64) -> f64 {
    lambda_from(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn lambda_map_covers_the_allowed_interval() {
        assert!((lambda_from(0.0) - LAMBDA_MIN).abs() < 1e-15);
        assert!((lambda_from(std::f64::consts::PI) - 1.0).abs() < 1e-15);
        for l in [0.01, 0.3, 0.74, 1.0] {
            assert!((lambda_from(lambda_to(l)) - l).abs() < 1e-12);
        }
    }

    #[test]
    fn best_response_on_the_singlet() {
        let t = -Matrix3::identity();
        let x2 = [Vector3::x(), Vector3::z()];
        assert!((best_response(InequalityKind::Cffw, &x2, &t) - 2.0 * SQRT_2).abs() < 1e-15);
        let x3 = [Vector3::x(), Vector3::y(), Vector3::z()];
        assert!((best_response(InequalityKind::Cjwr, &x3, &t) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn impossible_targets_are_reported() {
        let p = OptimizationProblem::new(singlet_template(2, 2).unwrap(), InequalityKind::Cffw, Objective::Bob(2))
            .with_constraint(Constraint::target(1, 2.9));
        let err = maximize(&p, Budget { restarts: 2, iterations: 50 }, 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn constraints_must_precede_objective() {
        let p = OptimizationProblem::new(singlet_template(2, 2).unwrap(), InequalityKind::Cffw, Objective::Bob(1))
            .with_constraint(Constraint::target(2, 2.0));
        assert!(matches!(p.validate(), Err(Error::Domain(_))));
    }

    #[test]
    fn cffw_needs_two_settings() {
        let p = OptimizationProblem::new(singlet_template(3, 1).unwrap(), InequalityKind::Cffw, Objective::Bob(1));
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_sharp_bob_reaches_tsirelson_like_bound() {
        let p = OptimizationProblem::new(singlet_template(2, 1).unwrap(), InequalityKind::Cffw, Objective::Bob(1));
        let r = maximize(&p, Budget { restarts: 4, iterations: 2000 }, 7).unwrap();
        assert!((r.best_value - 2.0 * SQRT_2).abs() < 1e-6, "{}", r.best_value);
        assert!(r.evaluations[0].violated);
    }

    #[test]
    fn same_seed_same_bits() {
        let p = OptimizationProblem::new(singlet_template(2, 2).unwrap(), InequalityKind::Cffw, Objective::Bob(2))
            .with_constraint(Constraint::target(1, 2.1));
        let budget = Budget { restarts: 3, iterations: 300 };
        let a = maximize(&p, budget, 11).unwrap();
        let b = maximize(&p, budget, 11).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.argmax, b.argmax);
    }
}
