use std::collections::BTreeMap;
use std::fmt;

use super::{bob_instrument, on_alice, spin_projector, C4};
use crate::error::{domain, invariant, Result};
use crate::model::Scenario;

/// Normalization tolerance for outcome tables.
pub const DISTRIBUTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observer {
    Alice,
    /// Bob in chain position `k`, counted from 1.
    Bob(usize),
}

impl fmt::Display for Observer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observer::Alice => write!(f, "a"),
            Observer::Bob(k) => write!(f, "b{k}"),
        }
    }
}

/// Outcome tuple in observer order, entries in `{−1, +1}`.
pub type Outcome = Vec<i8>;

/// Exact joint outcome probabilities for a fixed choice of settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    observers: Vec<Observer>,
    table: BTreeMap<Outcome, f64>,
}

impl OutcomeDistribution {
    pub fn observers(&self) -> &[Observer] {
        &self.observers
    }

    pub fn table(&self) -> &BTreeMap<Outcome, f64> {
        &self.table
    }

    pub fn probability(&self, outcome: &[i8]) -> f64 {
        self.table.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.table.values().sum()
    }

    fn position(&self, who: Observer) -> Result<usize> {
        self.observers
            .iter()
            .position(|o| *o == who)
            .ok_or_else(|| domain(format!("observer {who} is not part of this distribution")))
    }

    /// `⟨o₁ o₂⟩`, the expectation of the product of two observers' outcomes.
    pub fn correlator(&self, first: Observer, second: Observer) -> Result<f64> {
        let i = self.position(first)?;
        let j = self.position(second)?;
        Ok(self
            .table
            .iter()
            .map(|(o, p)| f64::from(o[i] * o[j]) * p)
            .sum())
    }

    /// Largest absolute entrywise difference between tables over the same
    /// observers.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.table
            .keys()
            .chain(other.table.keys())
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `a, b1, …, probability`; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.observers.iter().map(ToString::to_string).collect();
        out.push_str(&header.join(","));
        out.push_str(",probability\n");
        for (o, p) in &self.table {
            for v in o {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{p:.16e}\n"));
        }
        out
    }
}

/// Joint distribution of Alice's projective outcome and every Bob's unsharp
/// outcome when Alice picks setting `alice_choice` and Bob `k` picks
/// `bob_choices[k-1]`. Bobs update the state with the square-root
/// instrument in chain order.
pub fn joint_distribution(
    scenario: &Scenario,
    alice_choice: usize,
    bob_choices: &[usize],
) -> Result<OutcomeDistribution> {
    let n = scenario.n_settings();
    if bob_choices.len() != scenario.chain_len() {
        return Err(domain(format!(
            "expected {} Bob setting indices, got {}",
            scenario.chain_len(),
            bob_choices.len()
        )));
    }
    if alice_choice >= n || bob_choices.iter().any(|&c| c >= n) {
        return Err(domain(format!("setting index out of range (n = {n})")));
    }

    let alice_dir = scenario.alice().settings()[alice_choice].unit_vector();
    let alice_proj = [-1i8, 1].map(|a| (a, on_alice(&spin_projector(&alice_dir, a))));
    let bobs: Vec<_> = scenario
        .bobs()
        .iter()
        .zip(bob_choices)
        .map(|(bob, &c)| (bob.settings()[c].unit_vector(), bob.sharpness().value()))
        .collect();

    // (bob outcomes so far, unnormalized branch state)
    let mut branches: Vec<(Vec<i8>, C4)> = vec![(Vec::new(), *scenario.state().matrix())];
    for (dir, lambda) in &bobs {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (outcomes, rho) in &branches {
            let [plus, minus] = bob_instrument(rho, dir, *lambda);
            for (b, post) in [(-1i8, minus), (1, plus)] {
                let mut o = outcomes.clone();
                o.push(b);
                next.push((o, post));
            }
        }
        branches = next;
    }

    let mut table = BTreeMap::new();
    for (outcomes, rho) in &branches {
        for (a, proj) in &alice_proj {
            let p = (proj * rho).trace();
            if p.im.abs() > 1e-10 {
                return Err(invariant(format!("complex outcome probability {p}")));
            }
            let mut key = Vec::with_capacity(outcomes.len() + 1);
            key.push(*a);
            key.extend_from_slice(outcomes);
            table.insert(key, p.re);
        }
    }

    let mut observers = vec![Observer::Alice];
    observers.extend((1..=scenario.chain_len()).map(Observer::Bob));
    let dist = OutcomeDistribution { observers, table };
    check_normalized(&dist)?;
    Ok(dist)
}

fn check_normalized(dist: &OutcomeDistribution) -> Result<()> {
    let total = dist.total();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(invariant(format!("outcome probabilities sum to {total}")));
    }
    if let Some(p) = dist.table.values().find(|p| **p < -1e-12) {
        return Err(invariant(format!("negative outcome probability {p}")));
    }
    Ok(())
}

/// Sums out every observer not listed in `keep`. Observer order of the
/// result follows the original distribution.
pub fn marginal(dist: &OutcomeDistribution, keep: &[Observer]) -> Result<OutcomeDistribution> {
    if keep.is_empty() {
        return Err(domain("marginal needs at least one observer to keep"));
    }
    for k in keep {
        dist.position(*k)?;
    }
    let kept: Vec<usize> = dist
        .observers
        .iter()
        .enumerate()
        .filter(|(_, o)| keep.contains(o))
        .map(|(i, _)| i)
        .collect();
    let mut table: BTreeMap<Outcome, f64> = BTreeMap::new();
    for (o, p) in &dist.table {
        let key: Outcome = kept.iter().map(|&i| o[i]).collect();
        *table.entry(key).or_insert(0.0) += p;
    }
    let total: f64 = table.values().sum();
    for p in table.values_mut() {
        *p /= total;
    }
    let observers = kept.iter().map(|&i| dist.observers[i]).collect();
    Ok(OutcomeDistribution { observers, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AliceConfig, BobConfig, Direction, Sharpness};
    use approx::assert_abs_diff_eq;

    fn z_scenario(lambdas: &[f64], bob_dirs: &[Direction]) -> Scenario {
        let alice = AliceConfig::new(vec![Direction::z(), Direction::x()]).unwrap();
        let bobs = lambdas
            .iter()
            .zip(bob_dirs)
            .map(|(l, d)| BobConfig::new(vec![*d, Direction::x()], Sharpness::new(*l).unwrap()).unwrap())
            .collect();
        Scenario::singlet(alice, bobs).unwrap()
    }

    #[test]
    fn sharp_singlet_anticorrelation() {
        let s = z_scenario(&[1.0], &[Direction::z()]);
        let d = joint_distribution(&s, 0, &[0]).unwrap();
        assert_abs_diff_eq!(d.probability(&[1, -1]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability(&[-1, 1]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.probability(&[1, 1]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.correlator(Observer::Alice, Observer::Bob(1)).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tiny_first_sharpness_leaves_state_fresh() {
        // Bob¹ measures x with λ₁ ≈ 0, Bob² measures z sharply
        let s = z_scenario(&[1e-8, 1.0], &[Direction::x(), Direction::z()]);
        let d = joint_distribution(&s, 0, &[0, 0]).unwrap();
        let m = marginal(&d, &[Observer::Alice, Observer::Bob(2)]).unwrap();
        for a in [-1i8, 1] {
            for b in [-1i8, 1] {
                let fresh = (1.0 - f64::from(a * b)) / 4.0;
                assert_abs_diff_eq!(m.probability(&[a, b]), fresh, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn hand_evaluated_two_bob_marginal() {
        // x̂ = ẑ, ŷ₁ = x-axis, ŷ₂ = ẑ, λ₁ = 0.8, λ₂ = 1, so F₁ = 0.6:
        // p = 0.3·(1 − a b₂)/2 + 0.2·(1 − 0)/2 = (1 − 0.6 a b₂)/4
        let s = z_scenario(&[0.8, 1.0], &[Direction::x(), Direction::z()]);
        let d = joint_distribution(&s, 0, &[0, 0]).unwrap();
        let m = marginal(&d, &[Observer::Alice, Observer::Bob(2)]).unwrap();
        for a in [-1i8, 1] {
            for b in [-1i8, 1] {
                let expected = (1.0 - 0.6 * f64::from(a * b)) / 4.0;
                assert_abs_diff_eq!(m.probability(&[a, b]), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bad_indices_rejected() {
        let s = z_scenario(&[1.0], &[Direction::z()]);
        assert!(joint_distribution(&s, 2, &[0]).is_err());
        assert!(joint_distribution(&s, 0, &[0, 1]).is_err());
        assert!(joint_distribution(&s, 0, &[5]).is_err());
    }

    #[test]
    fn marginal_of_nothing_is_an_error() {
        let s = z_scenario(&[1.0], &[Direction::z()]);
        let d = joint_distribution(&s, 0, &[0]).unwrap();
        assert!(marginal(&d, &[]).is_err());
        assert!(marginal(&d, &[Observer::Bob(4)]).is_err());
    }

    #[test]
    fn csv_dump_layout() {
        let s = z_scenario(&[1.0], &[Direction::z()]);
        let csv = joint_distribution(&s, 0, &[0]).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "a,b1,probability");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("-1,-1,"));
        let p: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert_eq!(lines[2].rsplit(',').next().unwrap().len(), "5.0000000000000000e-1".len());
    }
}
