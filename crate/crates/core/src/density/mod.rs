//! Dense two-qubit density-matrix engine.
//!
//! Qubit A (Alice) is the first tensor factor. Basis index is `2a + b`
//! with `|0⟩` the `+1` eigenstate of `σ_z`. Bob-side operators act on the
//! second factor only.

mod distribution;
mod signalling;

pub use distribution::{joint_distribution, marginal, Observer, Outcome, OutcomeDistribution};
pub use signalling::{signalling_report, SignallingReport, Witness};

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;

use crate::error::{domain, invariant, Result};
use crate::model::{Direction, Sharpness};

pub type C2 = Matrix2<Complex64>;
pub type C4 = Matrix4<Complex64>;

/// Hermiticity and trace tolerance for states.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as nonnegative.
pub const POSITIVITY_TOL: f64 = -1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli_x() -> C2 {
    C2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> C2 {
    C2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> C2 {
    C2::new(ONE, ZERO, ZERO, -ONE)
}

/// `n̂·σ` for a real 3-vector.
pub fn spin_observable(n: &Vector3<f64>) -> C2 {
    pauli_x() * Complex64::from(n.x) + pauli_y() * Complex64::from(n.y) + pauli_z() * Complex64::from(n.z)
}

/// Projector onto the `outcome` (±1) eigenspace of `n̂·σ`.
pub fn spin_projector(n: &Vector3<f64>, outcome: i8) -> C2 {
    let s = Complex64::from(f64::from(outcome) * 0.5);
    C2::identity() * Complex64::from(0.5) + spin_observable(n) * s
}

pub fn kron(a: &C2, b: &C2) -> C4 {
    C4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Operator `I ⊗ op` acting on Bob's qubit.
pub fn on_bob(op: &C2) -> C4 {
    kron(&C2::identity(), op)
}

/// Operator `op ⊗ I` acting on Alice's qubit.
pub fn on_alice(op: &C2) -> C4 {
    kron(op, &C2::identity())
}

fn hermiticity_defect(m: &C4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: C4,
}

impl TwoQubitState {
    /// `|ψ⟩⟨ψ|` with `|ψ⟩ = (|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Vector4::new(ZERO, Complex64::from(h), Complex64::from(-h), ZERO);
        Self { matrix: psi * psi.adjoint() }
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(matrix: C4) -> Result<Self> {
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invariant("state matrix has non-finite entries"));
        }
        let herm = hermiticity_defect(&matrix);
        if herm > STATE_TOL {
            return Err(invariant(format!("state is not Hermitian (defect {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(invariant(format!("state trace is {tr}, expected 1")));
        }
        let min_eig = min_eigenvalue(&matrix);
        if min_eig < POSITIVITY_TOL {
            return Err(invariant(format!(
                "state is not positive semidefinite (eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    /// Pure state from a (not necessarily normalized) amplitude vector.
    pub fn from_pure(psi: &Vector4<Complex64>) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(domain("pure state vector must be nonzero"));
        }
        let psi = psi / Complex64::from(norm);
        Self::from_matrix(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &C4 {
        &self.matrix
    }

    pub fn expectation(&self, op: &C4) -> f64 {
        (self.matrix * op).trace().re
    }

    /// Bloch correlation matrix `T_uv = tr(ρ σ_u ⊗ σ_v)`.
    pub fn correlation_matrix(&self) -> Matrix3<f64> {
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        Matrix3::from_fn(|u, v| self.expectation(&kron(&paulis[u], &paulis[v])))
    }

    /// `⟨(û·σ) ⊗ (v̂·σ)⟩`
    pub fn spin_correlation(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        self.expectation(&kron(&spin_observable(u), &spin_observable(v)))
    }

    pub fn reduced_alice(&self) -> C2 {
        partial_trace_bob(&self.matrix)
    }

    pub fn reduced_bob(&self) -> C2 {
        partial_trace_alice(&self.matrix)
    }

    pub fn is_singlet(&self) -> bool {
        (self.matrix - Self::singlet().matrix).iter().all(|z| z.norm() < STATE_TOL)
    }
}

pub fn min_eigenvalue(m: &C4) -> f64 {
    // symmetrize so that rounding noise does not leak into the solver
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn partial_trace_bob(m: &C4) -> C2 {
    C2::from_fn(|r, c| m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)])
}

pub fn partial_trace_alice(m: &C4) -> C2 {
    C2::from_fn(|r, c| m[(r, c)] + m[(r + 2, c + 2)])
}

/// One effect `E = λ P + (1−λ) I/2` of a dichotomic unsharp spin measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitEffect {
    matrix: C2,
    /// Square root, `√((1+λ)/2) P + √((1−λ)/2) (I − P)`.
    sqrt: C2,
}

impl QubitEffect {
    pub fn matrix(&self) -> &C2 {
        &self.matrix
    }

    /// Kraus operator of the square-root instrument.
    pub fn sqrt(&self) -> &C2 {
        &self.sqrt
    }
}

/// Effect for `outcome` (±1) of the unsharp measurement along `direction`.
pub fn effect(direction: &Direction, lambda: f64, outcome: i8) -> Result<QubitEffect> {
    let lambda = Sharpness::new(lambda)?.value();
    if outcome != 1 && outcome != -1 {
        return Err(domain(format!("outcome must be ±1, got {outcome}")));
    }
    Ok(effect_for_vector(&direction.unit_vector(), lambda, outcome))
}

pub(crate) fn effect_for_vector(n: &Vector3<f64>, lambda: f64, outcome: i8) -> QubitEffect {
    let p = spin_projector(n, outcome);
    let q = spin_projector(n, -outcome);
    let half = Complex64::from(0.5 * (1.0 - lambda));
    let matrix = p * Complex64::from(lambda) + C2::identity() * half;
    let sqrt = p * Complex64::from((0.5 * (1.0 + lambda)).sqrt())
        + q * Complex64::from((0.5 * (1.0 - lambda)).sqrt());
    QubitEffect { matrix, sqrt }
}

/// Unnormalized post-measurement states `√E_b ρ √E_b` for `b = +1, −1`
/// after Bob's square-root instrument.
pub fn bob_instrument(rho: &C4, n: &Vector3<f64>, lambda: f64) -> [C4; 2] {
    [1i8, -1].map(|b| {
        let k = on_bob(effect_for_vector(n, lambda, b).sqrt());
        k * rho * k.adjoint()
    })
}

/// Outcome-averaged square-root instrument.
pub fn bob_channel(rho: &C4, n: &Vector3<f64>, lambda: f64) -> C4 {
    let [p, m] = bob_instrument(rho, n, lambda);
    p + m
}

/// `F ρ + (1−F)(P₊ρP₊ + P₋ρP₋)` on Bob's qubit, `F = √(1−λ²)`.
pub fn dephasing_mixture(rho: &C4, n: &Vector3<f64>, lambda: f64) -> C4 {
    let f = crate::model::quality_factor(lambda);
    let pp = on_bob(&spin_projector(n, 1));
    let pm = on_bob(&spin_projector(n, -1));
    let dephased = pp * rho * pp + pm * rho * pm;
    rho * Complex64::from(f) + dephased * Complex64::from(1.0 - f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn singlet_correlators() {
        let s = TwoQubitState::singlet();
        assert_abs_diff_eq!(s.expectation(&kron(&pauli_z(), &pauli_z())), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.expectation(&kron(&pauli_x(), &pauli_y())), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.correlation_matrix(), -Matrix3::identity(), epsilon = 1e-15);
        let half = C2::identity() * Complex64::from(0.5);
        assert_abs_diff_eq!(s.reduced_alice(), half, epsilon = 1e-15);
        assert_abs_diff_eq!(s.reduced_bob(), half, epsilon = 1e-15);
        assert!(s.is_singlet());
    }

    #[test]
    fn singlet_is_a_valid_state() {
        let s = TwoQubitState::singlet();
        let again = TwoQubitState::from_matrix(*s.matrix()).unwrap();
        assert_eq!(s, again);
        assert!(min_eigenvalue(s.matrix()) > -1e-14);
    }

    #[test]
    fn invalid_states_rejected() {
        let not_unit = C4::identity();
        assert!(TwoQubitState::from_matrix(not_unit).is_err());
        let mut non_herm = C4::identity() * Complex64::from(0.25);
        non_herm[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(TwoQubitState::from_matrix(non_herm).is_err());
        let neg = C4::from_diagonal(&Vector4::new(ONE * 1.2, ONE * -0.2, ZERO, ZERO));
        assert!(TwoQubitState::from_matrix(neg).is_err());
    }

    #[test]
    fn sharp_effect_is_projector() {
        let e = effect(&Direction::z(), 1.0, 1).unwrap();
        let expected = C2::new(ONE, ZERO, ZERO, ZERO);
        assert_abs_diff_eq!(*e.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn half_sharp_effect() {
        let e = effect(&Direction::z(), 0.5, 1).unwrap();
        let expected = C2::new(ONE * 0.75, ZERO, ZERO, ONE * 0.25);
        assert_abs_diff_eq!(*e.matrix(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(e.sqrt() * e.sqrt(), *e.matrix(), epsilon = 1e-15);
    }

    #[test]
    fn effect_eigenvalues_and_completeness() {
        let d = Direction::from_angles(1.1, 2.3).unwrap();
        let p = effect(&d, 0.74, 1).unwrap();
        let m = effect(&d, 0.74, -1).unwrap();
        let mut eig: Vec<f64> = p.matrix().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(eig[0], 0.13, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 0.87, epsilon = 1e-12);
        assert_abs_diff_eq!(p.matrix() + m.matrix(), C2::identity(), epsilon = 1e-12);
    }

    #[test]
    fn effect_rejects_bad_arguments() {
        assert!(effect(&Direction::z(), 0.0, 1).is_err());
        assert!(effect(&Direction::z(), 1.5, 1).is_err());
        assert!(effect(&Direction::z(), 0.5, 0).is_err());
    }

    #[test]
    fn lueders_average_matches_dephasing_mixture() {
        let s = TwoQubitState::singlet();
        let n = crate::model::spherical(0.7, 1.9);
        let lhs = bob_channel(s.matrix(), &n, 0.63);
        let rhs = dephasing_mixture(s.matrix(), &n, 0.63);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-14);
    }
}
