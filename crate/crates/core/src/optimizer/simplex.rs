//! Nelder–Mead downhill simplex with dimension-adaptive coefficients
//! (Gao & Han, 2012) and in-place simplex re-initialization around the best
//! vertex once the current simplex has collapsed.

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Iteration budget shared by all re-initializations.
    pub max_iterations: usize,
    /// Convergence threshold on the spread of objective values in the simplex.
    pub tolerance: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    /// Best objective value after each iteration; nonincreasing.
    pub trajectory: Vec<f64>,
}

struct Coefficients {
    reflect: f64,
    expand: f64,
    contract: f64,
    shrink: f64,
}

impl Coefficients {
    fn adaptive(n: usize) -> Self {
        let n = n.max(2) as f64;
        Coefficients {
            reflect: 1.0,
            expand: 1.0 + 2.0 / n,
            contract: 0.75 - 1.0 / (2.0 * n),
            shrink: 1.0 - 1.0 / n,
        }
    }
}

/// Non-finite objective values are treated as `+inf`.
fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn initial_simplex<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    fx0: f64,
    step: f64,
) -> Vec<(Vec<f64>, f64)> {
    let mut simplex = Vec::with_capacity(x0.len() + 1);
    simplex.push((x0.to_vec(), fx0));
    for i in 0..x0.len() {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = eval(f, &x);
        simplex.push((x, fx));
    }
    simplex
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    // Stable sort keeps the incumbent first among ties.
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn along(from: &[f64], towards: &[f64], t: f64) -> Vec<f64> {
    from.iter()
        .zip(towards)
        .map(|(c, w)| c + t * (c - w))
        .collect()
}

/// Minimizes `f` starting from `x0`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    opts: &SimplexOptions,
) -> SimplexOutcome {
    let n = x0.len();
    let k = Coefficients::adaptive(n);
    let fx0 = eval(&mut f, x0);
    let mut trajectory = Vec::new();
    let mut iterations = 0;
    let mut step = opts.initial_step;
    let mut simplex = initial_simplex(&mut f, x0, fx0, step);
    sort(&mut simplex);
    let mut restart_base = simplex[0].1;

    while iterations < opts.max_iterations {
        sort(&mut simplex);
        let spread = simplex[n].1 - simplex[0].1;
        if spread.is_finite() && spread <= opts.tolerance {
            // Collapsed: restart around the best vertex unless the last
            // restart bought nothing.
            if restart_base - simplex[0].1 <= opts.tolerance && step < opts.initial_step {
                break;
            }
            restart_base = simplex[0].1;
            step = (step * 0.5).max(1e-6);
            let (best, fbest) = simplex[0].clone();
            simplex = initial_simplex(&mut f, &best, fbest, step);
            sort(&mut simplex);
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let fworst = simplex[n].1;
        let fbest = simplex[0].1;
        let fsecond = simplex[n - 1].1;

        let xr = along(&centroid, &worst, k.reflect);
        let fr = eval(&mut f, &xr);
        if fr < fbest {
            let xe = along(&centroid, &worst, k.expand);
            let fe = eval(&mut f, &xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < fsecond {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < fworst {
                let xc = along(&centroid, &worst, k.contract);
                let fc = eval(&mut f, &xc);
                (xc, fc)
            } else {
                let xc = along(&centroid, &worst, -k.contract);
                let fc = eval(&mut f, &xc);
                (xc, fc)
            };
            if fc < fworst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best
                        .iter()
                        .zip(&v.0)
                        .map(|(b, xi)| b + k.shrink * (xi - b))
                        .collect();
                    let fx = eval(&mut f, &x);
                    *v = (x, fx);
                }
            }
        }
        sort(&mut simplex);
        trajectory.push(simplex[0].1);
    }

    sort(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    SimplexOutcome {
        x,
        fx,
        iterations,
        trajectory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_iterations: usize) -> SimplexOptions {
        SimplexOptions {
            max_iterations,
            tolerance: 1e-14,
            initial_step: 0.5,
        }
    }

    #[test]
    fn finds_quadratic_minimum() {
        let out = minimize(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5,
            &[0.0, 0.0],
            &opts(2000),
        );
        assert!((out.fx - 0.5).abs() < 1e-12);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock_in_four_dimensions() {
        let rosen = |x: &[f64]| {
            x.windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum::<f64>()
        };
        let out = minimize(rosen, &[-1.2, 1.0, -0.5, 0.3], &opts(20_000));
        assert!(out.fx < 1e-8, "f = {}", out.fx);
    }

    #[test]
    fn trajectory_is_monotone_and_budget_respected() {
        let out = minimize(|x| x.iter().map(|v| v.cos()).sum(), &[0.1; 6], &opts(300));
        assert!(out.iterations <= 300);
        assert_eq!(out.trajectory.len(), out.iterations);
        assert!(out.trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nan_regions_are_avoided() {
        let out = minimize(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 0.25).powi(2)
                }
            },
            &[1.0],
            &opts(500),
        );
        assert!((out.x[0] - 0.25).abs() < 1e-6);
    }
}
