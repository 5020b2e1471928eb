use proptest::prelude::*;

use seqsteer::analytic::correlation_table;
use seqsteer::verify::oracle_tables;
use seqsteer::{AliceConfig, BobConfig, Direction, Scenario, Sharpness};

fn scenario(n: usize, bobs: &[(Vec<(f64, f64)>, f64)]) -> Scenario {
    let alice = AliceConfig::coordinate_axes(n).unwrap();
    let bobs = bobs
        .iter()
        .map(|(angles, l)| {
            let dirs = angles.iter().take(n).map(|(t, p)| Direction::from_angles(*t, *p).unwrap()).collect();
            BobConfig::new(dirs, Sharpness::new(*l).unwrap()).unwrap()
        })
        .collect();
    Scenario::singlet(alice, bobs).unwrap()
}

fn bob_strategy() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    (proptest::collection::vec((0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU), 3), 0.01f64..=1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_tables_match_the_density_matrix(n in 2usize..=3, bobs in proptest::collection::vec(bob_strategy(), 1..=3)) {
        let s = scenario(n, &bobs);
        let oracle = oracle_tables(&s).unwrap();
        for (k, o) in oracle.iter().enumerate() {
            let t = correlation_table(&s, k + 1).unwrap();
            for (j, row) in o.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    prop_assert!((t.get(j, i) - v).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inserting_a_bob_never_strengthens_later_correlations(
        n in 2usize..=3,
        first in bob_strategy(),
        last in bob_strategy(),
    ) {
        // for the singlet the averaged channel only shrinks correlations
        let direct = scenario(n, std::slice::from_ref(&last));
        let after = scenario(n, &[first, last]);
        let a = correlation_table(&direct, 1).unwrap();
        let b = correlation_table(&after, 2).unwrap();
        let norm = |m: &nalgebra::DMatrix<f64>| m.norm();
        prop_assert!(norm(b.entries()) <= norm(a.entries()) + 1e-12);
    }
}
