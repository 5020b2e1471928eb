//! Closed-form averaged correlations between Alice and any Bob in the chain.
//!
//! Alice–Bob correlations only depend on the Bloch correlation matrix `T`
//! (`⟨(û·σ)⊗(v̂·σ)⟩ = ûᵀ T v̂`). An unsharp square-root measurement along
//! `n̂`, averaged over its outcomes, acts on Bob's side as the unital map
//! `v̂ ↦ F v̂ + (1−F) n̂ (n̂·v̂)`, so `T ↦ F T + (1−F) T n̂ n̂ᵀ`. Averaging
//! over a Bob's settings is a convex combination of these linear maps,
//! which lets the chain be evaluated in one pass.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::density::TwoQubitState;
use crate::error::{domain, Result};
use crate::model::{check_weights, BobConfig, Scenario};

/// Slack on `|C̄|` and singular values.
pub const CORRELATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationMatrixState(Matrix3<f64>);

impl CorrelationMatrixState {
    pub fn singlet() -> Self {
        Self(-Matrix3::identity())
    }

    /// Correlation part of an arbitrary state. Local Bloch vectors are
    /// dropped; no implemented quantity uses them.
    pub fn from_state(state: &TwoQubitState) -> Self {
        if state.is_singlet() {
            return Self::singlet();
        }
        Self(state.correlation_matrix())
    }

    pub fn from_matrix(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn max_singular_value(&self) -> f64 {
        self.0.singular_values().max()
    }

    /// `⟨(û·σ)⊗(v̂·σ)⟩`
    pub fn correlation(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        u.dot(&(self.0 * v))
    }

    /// State seen by the next Bob after `bob` measured with setting
    /// probabilities `weights`.
    pub fn decohere_average(&self, bob: &BobConfig, weights: &[f64]) -> Result<Self> {
        check_weights(weights, bob.len()).map_err(domain)?;
        let dirs: Vec<_> = bob.settings().iter().map(|d| d.unit_vector()).collect();
        let f = bob.sharpness().quality_factor();
        Ok(Self(decohere(&self.0, &dirs, f, weights)))
    }

    /// State after `bob` measured with one known setting `choice`.
    pub fn decohere_setting(&self, bob: &BobConfig, choice: usize) -> Result<Self> {
        if choice >= bob.len() {
            return Err(domain(format!("setting index {choice} out of range")));
        }
        let n = bob.settings()[choice].unit_vector();
        let f = bob.sharpness().quality_factor();
        Ok(Self(decohere(&self.0, &[n], f, &[1.0])))
    }
}

/// `Σᵢ wᵢ [F T + (1−F) T n̂ᵢ n̂ᵢᵀ] = T (F I + (1−F) Σᵢ wᵢ n̂ᵢ n̂ᵢᵀ)`.
pub fn decohere(t: &Matrix3<f64>, dirs: &[Vector3<f64>], quality: f64, weights: &[f64]) -> Matrix3<f64> {
    let mut m = Matrix3::identity() * quality;
    for (n, w) in dirs.iter().zip(weights) {
        m += (n * n.transpose()) * ((1.0 - quality) * w);
    }
    t * m
}

/// `C[j][k] = λ x̂ʲᵀ T ŷᵏ`.
pub fn table_entries(
    alice: &[Vector3<f64>],
    t: &Matrix3<f64>,
    bob: &[Vector3<f64>],
    lambda: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(alice.len(), bob.len(), |j, k| lambda * alice[j].dot(&(t * bob[k])))
}

/// Averaged correlations of one Bob with Alice. Rows are Alice's settings,
/// columns are the Bob's.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    bob_index: usize,
    entries: DMatrix<f64>,
}

impl CorrelationTable {
    pub fn new(bob_index: usize, entries: DMatrix<f64>) -> Result<Self> {
        if bob_index == 0 {
            return Err(domain("Bob indices start at 1"));
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + CORRELATION_SLACK) {
            return Err(domain(format!("correlation {v} outside [-1, 1]")));
        }
        Ok(Self { bob_index, entries })
    }

    pub fn bob_index(&self) -> usize {
        self.bob_index
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, alice: usize, bob: usize) -> f64 {
        self.entries[(alice, bob)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.amax()
    }

    /// Rows are Alice settings, columns Bob settings, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn alice_vectors(scenario: &Scenario) -> Vec<Vector3<f64>> {
    scenario.alice().settings().iter().map(|d| d.unit_vector()).collect()
}

fn bob_vectors(bob: &BobConfig) -> Vec<Vector3<f64>> {
    bob.settings().iter().map(|d| d.unit_vector()).collect()
}

/// Averaged correlation table between Alice and Bob `m` (1-based).
pub fn correlation_table(scenario: &Scenario, m: usize) -> Result<CorrelationTable> {
    if m == 0 || m > scenario.chain_len() {
        return Err(domain(format!(
            "Bob index {m} out of range 1..={}",
            scenario.chain_len()
        )));
    }
    let mut t = CorrelationMatrixState::from_state(scenario.state());
    for (bob, w) in scenario.bobs()[..m - 1].iter().zip(scenario.weights()) {
        t = t.decohere_average(bob, w)?;
    }
    let bob = &scenario.bobs()[m - 1];
    let entries = table_entries(&alice_vectors(scenario), t.matrix(), &bob_vectors(bob), bob.sharpness().value());
    CorrelationTable::new(m, entries)
}

/// Tables for every Bob of the chain in one pass.
pub fn correlation_tables(scenario: &Scenario) -> Result<Vec<CorrelationTable>> {
    let alice = alice_vectors(scenario);
    let mut t = CorrelationMatrixState::from_state(scenario.state());
    let mut out = Vec::with_capacity(scenario.chain_len());
    for (i, (bob, w)) in scenario.bobs().iter().zip(scenario.weights()).enumerate() {
        let entries = table_entries(&alice, t.matrix(), &bob_vectors(bob), bob.sharpness().value());
        out.push(CorrelationTable::new(i + 1, entries)?);
        t = t.decohere_average(bob, w)?;
    }
    Ok(out)
}

/// Correlations of Bob `m` conditioned on the earlier Bobs having used the
/// settings `earlier_choices` (before averaging over them).
pub fn conditional_correlation_table(
    scenario: &Scenario,
    m: usize,
    earlier_choices: &[usize],
) -> Result<CorrelationTable> {
    if m == 0 || m > scenario.chain_len() {
        return Err(domain(format!("Bob index {m} out of range")));
    }
    if earlier_choices.len() != m - 1 {
        return Err(domain(format!(
            "expected {} earlier setting choices, got {}",
            m - 1,
            earlier_choices.len()
        )));
    }
    let mut t = CorrelationMatrixState::from_state(scenario.state());
    for (bob, &c) in scenario.bobs().iter().zip(earlier_choices) {
        t = t.decohere_setting(bob, c)?;
    }
    let bob = &scenario.bobs()[m - 1];
    let entries = table_entries(&alice_vectors(scenario), t.matrix(), &bob_vectors(bob), bob.sharpness().value());
    CorrelationTable::new(m, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AliceConfig, Direction, Sharpness};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn bob(dirs: &[(f64, f64)], lambda: f64) -> BobConfig {
        BobConfig::new(
            dirs.iter().map(|&(t, p)| Direction::from_angles(t, p).unwrap()).collect(),
            Sharpness::new(lambda).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn vanishing_sharpness_is_identity() {
        let t = CorrelationMatrixState::singlet();
        let b = bob(&[(0.3, 0.1), (1.2, 2.2)], 1e-12);
        let out = t.decohere_average(&b, &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(*out.matrix(), *t.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn sharp_single_axis_keeps_only_that_axis() {
        let t = CorrelationMatrixState::singlet();
        let b = bob(&[(0.0, 0.0)], 1.0);
        let out = t.decohere_average(&b, &[1.0]).unwrap();
        let expected = -Matrix3::from_diagonal(&Vector3::new(0.0, 0.0, 1.0));
        assert_abs_diff_eq!(*out.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn weight_mismatch_rejected() {
        let t = CorrelationMatrixState::singlet();
        let b = bob(&[(0.0, 0.0), (1.0, 0.0)], 0.5);
        assert!(t.decohere_average(&b, &[1.0]).is_err());
        assert!(t.decohere_average(&b, &[0.7, 0.7]).is_err());
    }

    #[test]
    fn second_bob_table_matches_hand_evaluation() {
        // Alice (π/2,0),(0,0); Bob¹ (π/4,0),(3π/4,0) at λ₁ = 0.74; Bob² the same, sharp.
        let axes = [(PI / 4.0, 0.0), (3.0 * PI / 4.0, 0.0)];
        let alice = AliceConfig::new(vec![Direction::x(), Direction::z()]).unwrap();
        let s = Scenario::singlet(alice, vec![bob(&axes, 0.74), bob(&axes, 1.0)]).unwrap();
        let table = correlation_table(&s, 2).unwrap();
        // C̄₂ʲᵏ = −λ₂/2 Σᵢ [F₁ (ŷ₂ᵏ·x̂ʲ) + (1−F₁)(ŷ₁ⁱ·x̂ʲ)(ŷ₂ᵏ·ŷ₁ⁱ)]
        let f1 = (1.0f64 - 0.74 * 0.74).sqrt();
        let x = [Direction::x().unit_vector(), Direction::z().unit_vector()];
        let y: Vec<_> = axes.iter().map(|&(t, p)| Direction::from_angles(t, p).unwrap().unit_vector()).collect();
        for j in 0..2 {
            for k in 0..2 {
                let mut c = 0.0;
                for yi in &y {
                    c += -0.5 * (f1 * y[k].dot(&x[j]) + (1.0 - f1) * yi.dot(&x[j]) * y[k].dot(yi));
                }
                assert_abs_diff_eq!(table.get(j, k), c, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn first_bob_reduces_to_dot_product() {
        let alice = AliceConfig::new(vec![Direction::z(), Direction::x()]).unwrap();
        let s = Scenario::singlet(alice, vec![bob(&[(0.0, 0.0), (PI / 2.0, 0.0)], 1.0)]).unwrap();
        let table = correlation_table(&s, 1).unwrap();
        assert_abs_diff_eq!(table.get(0, 0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(table.get(0, 1), 0.0, epsilon = 1e-15);
        assert!(correlation_table(&s, 2).is_err());
        assert!(correlation_table(&s, 0).is_err());
    }

    #[test]
    fn conditional_tables_average_to_the_unconditioned_one() {
        let alice = AliceConfig::coordinate_axes(2).unwrap();
        let s = Scenario::singlet(
            alice,
            vec![bob(&[(0.4, 0.3), (2.0, 1.0)], 0.6), bob(&[(1.0, 4.0), (0.2, 0.7)], 0.9)],
        )
        .unwrap();
        let avg = correlation_table(&s, 2).unwrap();
        let c0 = conditional_correlation_table(&s, 2, &[0]).unwrap();
        let c1 = conditional_correlation_table(&s, 2, &[1]).unwrap();
        let mean = (c0.entries() + c1.entries()) * 0.5;
        assert_abs_diff_eq!(*avg.entries(), mean, epsilon = 1e-15);
        // the residual dependence on Bob¹'s setting is real
        assert!((c0.entries() - c1.entries()).amax() > 1e-3);
    }

    #[test]
    fn csv_layout() {
        let t = CorrelationTable::new(1, DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, 0.25])).unwrap();
        let csv = t.to_csv();
        let rows: Vec<_> = csv.lines().collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], "-1.0000000000000000e0,5.0000000000000000e-1");
        assert!(CorrelationTable::new(1, DMatrix::from_element(1, 1, 1.5)).is_err());
    }
}
