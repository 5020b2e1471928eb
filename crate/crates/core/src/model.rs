//! Domain types shared by every engine: measurement directions, unsharp
//! settings, the observers, and complete sequential scenarios.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::density::TwoQubitState;
use crate::error::{domain, invariant, Result};

/// Off-diagonal Gram tolerance for Alice's settings.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// A spin-measurement axis on the Bloch sphere, stored as polar and
/// azimuthal angles in radians.
///
/// Always canonical: `theta` in `[0, π]`, `phi` in `[0, 2π)`, and `phi == 0`
/// at either pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(domain(format!(
                "direction angles must be finite, got theta={theta}, phi={phi}"
            )));
        }
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if phi >= TAU {
            phi = 0.0;
        }
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// Direction of a nonzero vector (normalized internally).
    pub fn from_vector(v: &Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(domain("cannot build a direction from a zero or non-finite vector"));
        }
        let u = v / norm;
        let theta = u.z.clamp(-1.0, 1.0).acos();
        let phi = if u.x == 0.0 && u.y == 0.0 { 0.0 } else { u.y.atan2(u.x) };
        Self::from_angles(theta, phi)
    }

    pub fn z() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn x() -> Self {
        Self { theta: PI / 2.0, phi: 0.0 }
    }

    pub fn y() -> Self {
        Self { theta: PI / 2.0, phi: PI / 2.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `(sinθ cosφ, sinθ sinφ, cosθ)`
    pub fn unit_vector(&self) -> Vector3<f64> {
        spherical(self.theta, self.phi)
    }
}

/// Unit vector for arbitrary (not necessarily canonical) angles.
#[inline]
pub fn spherical(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Sharpness λ of a dichotomic unsharp measurement, `0 < λ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Sharpness(f64);

impl Sharpness {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 && lambda <= 1.0 {
            Ok(Self(lambda))
        } else {
            Err(domain(format!("sharpness must lie in (0, 1], got {lambda}")))
        }
    }

    pub fn sharp() -> Self {
        Self(1.0)
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Disturbance-side quality factor `F = √(1−λ²)`.
    pub fn quality_factor(&self) -> f64 {
        quality_factor(self.0)
    }

    /// Information-gain precision `G = λ`.
    pub fn precision(&self) -> f64 {
        self.0
    }
}

#[inline]
pub(crate) fn quality_factor(lambda: f64) -> f64 {
    (1.0 - lambda * lambda).max(0.0).sqrt()
}

/// Weak-pointer equivalents `(F, G)` of sharpness λ.
pub fn weak_equivalents(lambda: f64) -> Result<(f64, f64)> {
    let s = Sharpness::new(lambda)?;
    Ok((s.quality_factor(), s.precision()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsharpSetting {
    pub direction: Direction,
    pub sharpness: Sharpness,
}

impl UnsharpSetting {
    pub fn new(direction: Direction, sharpness: Sharpness) -> Self {
        Self { direction, sharpness }
    }
}

/// Alice's projective settings. For up to three settings they must be
/// mutually orthogonal; larger sets (Platonic axes) cannot be, and are only
/// checked for being pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceConfig {
    settings: Vec<Direction>,
}

impl AliceConfig {
    pub fn new(settings: Vec<Direction>) -> Result<Self> {
        if settings.len() < 2 {
            return Err(invariant(format!(
                "Alice needs at least 2 settings, got {}",
                settings.len()
            )));
        }
        let vs: Vec<_> = settings.iter().map(Direction::unit_vector).collect();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                let dot = vs[i].dot(&vs[j]);
                if vs.len() <= 3 && dot.abs() > ORTHOGONALITY_TOL {
                    return Err(invariant(format!(
                        "Alice's settings {i} and {j} are not orthogonal (dot = {dot:.3e})"
                    )));
                }
                if vs.len() > 3 && dot.abs() > 1.0 - ORTHOGONALITY_TOL {
                    return Err(invariant(format!(
                        "Alice's settings {i} and {j} are the same axis"
                    )));
                }
            }
        }
        Ok(Self { settings })
    }

    /// Alice along the first `n` coordinate axes (x, z for n = 2).
    pub fn coordinate_axes(n: usize) -> Result<Self> {
        match n {
            2 => Self::new(vec![Direction::x(), Direction::z()]),
            3 => Self::new(vec![Direction::x(), Direction::y(), Direction::z()]),
            _ => Err(domain(format!("coordinate axes exist for n = 2 or 3, got {n}"))),
        }
    }

    pub fn settings(&self) -> &[Direction] {
        &self.settings
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }
}

/// One Bob in the chain: `n` directions sharing one sharpness.
#[derive(Debug, Clone, PartialEq)]
pub struct BobConfig {
    settings: Vec<Direction>,
    sharpness: Sharpness,
}

impl BobConfig {
    pub fn new(settings: Vec<Direction>, sharpness: Sharpness) -> Result<Self> {
        if settings.is_empty() {
            return Err(invariant("a Bob needs at least one setting"));
        }
        Ok(Self { settings, sharpness })
    }

    pub fn settings(&self) -> &[Direction] {
        &self.settings
    }

    pub fn sharpness(&self) -> Sharpness {
        self.sharpness
    }

    pub fn setting(&self, i: usize) -> UnsharpSetting {
        UnsharpSetting::new(self.settings[i], self.sharpness)
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }
}

/// A shared state, one Alice and an ordered chain of Bobs acting on the
/// second qubit one after another. `weights[b]` is the probability with
/// which Bob `b+1` picks each of his settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    state: TwoQubitState,
    alice: AliceConfig,
    bobs: Vec<BobConfig>,
    weights: Vec<Vec<f64>>,
}

impl Scenario {
    /// Scenario with unbiased inputs (every Bob picks each setting with
    /// probability `1/n`).
    pub fn new(state: TwoQubitState, alice: AliceConfig, bobs: Vec<BobConfig>) -> Result<Self> {
        let n = alice.len();
        let weights = vec![vec![1.0 / n as f64; n]; bobs.len()];
        Self::with_weights(state, alice, bobs, weights)
    }

    pub fn singlet(alice: AliceConfig, bobs: Vec<BobConfig>) -> Result<Self> {
        Self::new(TwoQubitState::singlet(), alice, bobs)
    }

    pub fn with_weights(
        state: TwoQubitState,
        alice: AliceConfig,
        bobs: Vec<BobConfig>,
        weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if bobs.is_empty() {
            return Err(invariant("a scenario needs at least one Bob"));
        }
        let n = alice.len();
        for (b, bob) in bobs.iter().enumerate() {
            if bob.len() != n {
                return Err(invariant(format!(
                    "Bob {} has {} settings but Alice has {n}",
                    b + 1,
                    bob.len()
                )));
            }
        }
        if weights.len() != bobs.len() {
            return Err(invariant(format!(
                "expected {} weight vectors, got {}",
                bobs.len(),
                weights.len()
            )));
        }
        for (b, w) in weights.iter().enumerate() {
            check_weights(w, n).map_err(|e| invariant(format!("Bob {}: {e}", b + 1)))?;
        }
        Ok(Self { state, alice, bobs, weights })
    }

    pub fn state(&self) -> &TwoQubitState {
        &self.state
    }

    pub fn alice(&self) -> &AliceConfig {
        &self.alice
    }

    pub fn bobs(&self) -> &[BobConfig] {
        &self.bobs
    }

    /// Bob `index` counted from 1.
    pub fn bob(&self, index: usize) -> Option<&BobConfig> {
        index.checked_sub(1).and_then(|i| self.bobs.get(i))
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn n_settings(&self) -> usize {
        self.alice.len()
    }

    pub fn chain_len(&self) -> usize {
        self.bobs.len()
    }

    /// Scenario truncated to its first `m` Bobs.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.bobs.len() {
            return Err(domain(format!(
                "cannot truncate a {}-Bob chain to {m}",
                self.bobs.len()
            )));
        }
        Ok(Self {
            state: self.state.clone(),
            alice: self.alice.clone(),
            bobs: self.bobs[..m].to_vec(),
            weights: self.weights[..m].to_vec(),
        })
    }
}

pub(crate) fn check_weights(w: &[f64], n: usize) -> std::result::Result<(), String> {
    if w.len() != n {
        return Err(format!("weight vector has {} entries, expected {n}", w.len()));
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err("weights must be finite and nonnegative".into());
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(format!("weights sum to {sum}, expected 1"));
    }
    Ok(())
}
