//! Derivative-free simplex minimization.

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex along each axis.
    pub step: f64,
    /// Stop when the spread of objective values across the simplex drops below this.
    pub f_tol: f64,
    /// Stop when every vertex is within this distance of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            f_tol: 1e-9,
            x_tol: 1e-7,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder-Mead with the standard coefficients (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        let value = eval(x0, &mut evals);
        return Minimum {
            x: Vec::new(),
            value,
            evals,
            converged: true,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut trial2 = vec![0.0; dim];
    let mut converged = false;

    while evals < opts.max_evals {
        // Sort vertices by value (best first).
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[dim] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol.max(opts.f_tol) || size < 1e-14 {
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &simplex[..dim] {
            centroid.iter_mut().zip(p).for_each(|(c, x)| *c += x);
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let worst = &simplex[dim];
        for k in 0..dim {
            trial[k] = centroid[k] + (centroid[k] - worst[k]);
        }
        let f_r = eval(&trial, &mut evals);

        if f_r < values[0] {
            for k in 0..dim {
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - worst[k]);
            }
            let f_e = eval(&trial2, &mut evals);
            if f_e < f_r {
                simplex[dim].copy_from_slice(&trial2);
                values[dim] = f_e;
            } else {
                simplex[dim].copy_from_slice(&trial);
                values[dim] = f_r;
            }
            continue;
        }
        if f_r < values[dim - 1] {
            simplex[dim].copy_from_slice(&trial);
            values[dim] = f_r;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point.
        let outside = f_r < values[dim];
        for k in 0..dim {
            trial2[k] = if outside {
                centroid[k] + 0.5 * (trial[k] - centroid[k])
            } else {
                centroid[k] + 0.5 * (worst[k] - centroid[k])
            };
        }
        let f_c = eval(&trial2, &mut evals);
        if f_c < f_r.min(values[dim]) {
            simplex[dim].copy_from_slice(&trial2);
            values[dim] = f_c;
            continue;
        }
        // Shrink towards the best vertex.
        let best = simplex[0].clone();
        for i in 1..=dim {
            for k in 0..dim {
                simplex[i][k] = best[k] + 0.5 * (simplex[i][k] - best[k]);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

/// Runs [`nelder_mead`] and restarts it from the optimum with a smaller
/// simplex until a restart no longer improves the value.
pub fn nelder_mead_restarted<F>(mut f: F, x0: &[f64], opts: &SimplexOptions, restarts: usize) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best = nelder_mead(&mut f, x0, opts);
    let mut step = opts.step;
    for _ in 0..restarts {
        step = (step * 0.25).max(1e-3);
        let again = nelder_mead(
            &mut f,
            &best.x,
            &SimplexOptions {
                step,
                ..*opts
            },
        );
        let improved = again.value < best.value - opts.f_tol;
        let evals = best.evals + again.evals;
        if again.value <= best.value {
            best = Minimum { evals, ..again };
        } else {
            best.evals = evals;
        }
        if !improved {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let m = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &SimplexOptions {
                f_tol: 1e-14,
                x_tol: 1e-9,
                ..Default::default()
            },
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_restarted(
            rosen,
            &[-1.2, 1.0],
            &SimplexOptions {
                f_tol: 1e-16,
                x_tol: 1e-10,
                max_evals: 50_000,
                ..Default::default()
            },
            3,
        );
        assert!(m.value < 1e-10, "{m:?}");
    }

    #[test]
    fn one_dimensional_abs() {
        let m = nelder_mead(|x| (x[0] - 3.5).abs(), &[0.0], &SimplexOptions::default());
        assert!((m.x[0] - 3.5).abs() < 1e-6);
    }

    #[test]
    fn nan_is_treated_as_worse() {
        let m = nelder_mead(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) },
            &[2.0],
            &SimplexOptions::default(),
        );
        assert!((m.x[0] - 0.5).abs() < 1e-3);
    }
}
