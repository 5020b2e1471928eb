use std::collections::HashMap;

use super::distribution::{joint_distribution, marginal, Observer, OutcomeDistribution};
use crate::error::{domain, Result};
use crate::model::Scenario;

/// Largest dependence of a marginal on an earlier Bob's setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub magnitude: f64,
    /// The Bob whose outcome was summed out but whose setting still shows.
    pub bob: usize,
    /// Full setting tuple (Alice first) at which the maximum occurred,
    /// together with the alternative choice of `bob`.
    pub choices: Vec<usize>,
    pub alternative: usize,
}

/// Signalling structure of a sequential scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SignallingReport {
    /// Max change of the Bobs' marginal under a change of Alice's setting.
    pub alice_to_bobs: f64,
    /// Max change of the marginal without the last Bob under a change of
    /// the last Bob's setting.
    pub last_bob_backwards: f64,
    /// Strongest influence of an earlier Bob's setting on the remaining
    /// observers once his outcome is summed out.
    pub earlier_bob_witness: Witness,
}

fn all_choices(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c);
                    p
                })
            })
            .collect();
    }
    out
}

/// Max deviation of `marginal(keep)` when position `vary` of the setting
/// tuple runs over all choices. Returns (deviation, tuple, alternative).
fn dependence(
    dists: &HashMap<Vec<usize>, OutcomeDistribution>,
    n: usize,
    vary: usize,
    keep: &[Observer],
) -> Result<(f64, Vec<usize>, usize)> {
    let mut best = (0.0, Vec::new(), 0);
    let mut keys: Vec<_> = dists.keys().filter(|k| k[vary] == 0).cloned().collect();
    keys.sort();
    for base in keys {
        let reference = marginal(&dists[&base], keep)?;
        for alt in 1..n {
            let mut other = base.clone();
            other[vary] = alt;
            let dev = reference.max_deviation(&marginal(&dists[&other], keep)?);
            if dev > best.0 {
                best = (dev, base.clone(), alt);
            }
        }
    }
    Ok(best)
}

/// Checks the signalling structure over every setting combination.
pub fn signalling_report(scenario: &Scenario) -> Result<SignallingReport> {
    let m = scenario.chain_len();
    if m < 2 {
        return Err(domain("signalling report needs at least two Bobs"));
    }
    let n = scenario.n_settings();
    let mut dists = HashMap::new();
    for choice in all_choices(n, m + 1) {
        let d = joint_distribution(scenario, choice[0], &choice[1..])?;
        dists.insert(choice, d);
    }

    let bobs: Vec<Observer> = (1..=m).map(Observer::Bob).collect();
    let (alice_to_bobs, _, _) = dependence(&dists, n, 0, &bobs)?;

    let mut without_last = vec![Observer::Alice];
    without_last.extend((1..m).map(Observer::Bob));
    let (last_bob_backwards, _, _) = dependence(&dists, n, m, &without_last)?;

    let mut witness = Witness { magnitude: 0.0, bob: 1, choices: Vec::new(), alternative: 0 };
    for k in 1..m {
        let keep: Vec<Observer> = std::iter::once(Observer::Alice)
            .chain((1..=m).filter(|&j| j != k).map(Observer::Bob))
            .collect();
        let (dev, choices, alternative) = dependence(&dists, n, k, &keep)?;
        if dev > witness.magnitude {
            witness = Witness { magnitude: dev, bob: k, choices, alternative };
        }
    }

    Ok(SignallingReport { alice_to_bobs, last_bob_backwards, earlier_bob_witness: witness })
}
