use seqsteer::analytic::correlation_tables;
use seqsteer::optimizer::{
    maximize, singlet_template, Budget, Constraint, Objective, OptimizationProblem, FEASIBILITY_TOL,
};
use seqsteer::{Error, InequalityKind};

const BUDGET: Budget = Budget { restarts: 16, iterations: 2000 };

fn two_bob_problem(target: f64) -> OptimizationProblem {
    OptimizationProblem::new(singlet_template(2, 2).unwrap(), InequalityKind::Cffw, Objective::Bob(2))
        .with_constraint(Constraint::target(1, target))
}

#[test]
fn argmax_re_evaluates_to_the_reported_value() {
    for (kind, n, targets) in [
        (InequalityKind::Cffw, 2, vec![2.10]),
        (InequalityKind::Cjwr, 3, vec![1.05, 1.05]),
        (InequalityKind::Cjwr, 2, vec![1.0]),
    ] {
        let chain = targets.len() + 1;
        let mut p = OptimizationProblem::new(singlet_template(n, chain).unwrap(), kind, Objective::Bob(chain));
        for (i, t) in targets.iter().enumerate() {
            p = p.with_constraint(Constraint::target(i + 1, *t));
        }
        let r = maximize(&p, BUDGET, 3).unwrap();
        let tables = correlation_tables(&r.argmax).unwrap();
        let again = kind.evaluate(&tables[chain - 1]).unwrap().value;
        assert!((again - r.best_value).abs() <= 1e-9, "{kind}: {again} vs {}", r.best_value);
        assert!(r.max_residual() < FEASIBILITY_TOL);
        for (i, t) in targets.iter().enumerate() {
            let v = kind.evaluate(&tables[i]).unwrap().value;
            assert!((v - t).abs() < FEASIBILITY_TOL, "Bob {} at {v}", i + 1);
        }
    }
}

#[test]
fn raising_an_earlier_target_never_helps_later_bobs() {
    let ladder = [2.05, 2.10, 2.15];
    let values: Vec<f64> = ladder.iter().map(|t| maximize(&two_bob_problem(*t), BUDGET, 5).unwrap().best_value).collect();
    for w in values.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{values:?}");
    }
}

#[test]
fn identical_inputs_give_identical_bits() {
    let p = two_bob_problem(2.10);
    let a = maximize(&p, BUDGET, 9).unwrap();
    let b = maximize(&p, BUDGET, 9).unwrap();
    assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
    assert_eq!(a.argmax, b.argmax);
    assert_eq!(a.function_evaluations, b.function_evaluations);
}

#[test]
fn targets_beyond_the_quantum_maximum_are_infeasible() {
    let err = maximize(&two_bob_problem(2.9), BUDGET, 0).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err}");
}

#[test]
fn lower_bound_constraints_hold_at_the_optimum() {
    let p = OptimizationProblem::new(singlet_template(2, 2).unwrap(), InequalityKind::Cffw, Objective::Bob(2))
        .with_constraint(Constraint::at_least(1, 2.2));
    let r = maximize(&p, BUDGET, 2).unwrap();
    assert!(r.evaluations[0].value >= 2.2 - FEASIBILITY_TOL);
    // a stronger first Bob leaves less for the second than the 2.10 case
    let weaker = maximize(&two_bob_problem(2.10), BUDGET, 2).unwrap();
    assert!(r.best_value < weaker.best_value);
}
