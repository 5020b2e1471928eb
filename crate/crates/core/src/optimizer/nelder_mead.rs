//! Adaptive Nelder–Mead simplex minimizer.
//!
//! Coefficients follow the dimension-dependent choice of Gao and Han
//! (reflection 1, expansion `1 + 2/d`, contraction `0.75 − 1/(2d)`,
//! shrink `1 − 1/d`), which behaves far better than the classic constants
//! once the dimension exceeds a handful.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: 2000, diameter_tol: 1e-8, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn minimize<F>(f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let d = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if d == 0 {
        let value = eval(x0);
        return SimplexOutcome { x: Vec::new(), value, iterations: 0, evaluations: 1, converged: true };
    }

    let dim = d as f64;
    let (alpha, gamma, rho, sigma) = if d >= 2 {
        (1.0, 1.0 + 2.0 / dim, 0.75 - 0.5 / dim, 1.0 - 1.0 / dim)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; d];
    let point = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    while iterations < opts.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .fold(0.0, f64::max)
            .sqrt();
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim;
            }
        }
        let worst = simplex[d].clone();
        let second_worst = simplex[d - 1].1;
        let best_value = simplex[0].1;

        // reflection: centroid + α (centroid − worst)
        let reflected = point(&centroid, &worst.0, -alpha);
        let fr = eval(&reflected);
        if fr < best_value {
            let expanded = point(&centroid, &worst.0, -gamma);
            let fe = eval(&expanded);
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[d] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = point(&centroid, &reflected, rho);
            let v = eval(&c);
            (c, v)
        } else {
            let c = point(&centroid, &worst.0, rho);
            let v = eval(&c);
            (c, v)
        };
        if fc < fr.min(worst.1) {
            simplex[d] = (contracted, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x = point(&best, &v.0, sigma);
            let fx = eval(&x);
            *v = (x, fx);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexOutcome { x, value, iterations, evaluations, converged }
}
