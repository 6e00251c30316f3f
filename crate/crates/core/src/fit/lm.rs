use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{FitOptions, FitResult, FreeParameter};
use crate::error::{Error, Result};

/// Weighted observations for `least_squares`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations<'a> {
    pub y: &'a [f64],
    /// Per-point standard deviations. Without them the covariance is scaled
    /// by the reduced chi-squared.
    pub sigma: Option<&'a [f64]>,
}

fn weighted(pred: &[f64], obs: &Observations, mask: &[bool]) -> Result<DVector<f64>> {
    if pred.len() != obs.y.len() {
        return Err(Error::Fit(format!(
            "model returned {} values for {} observations",
            pred.len(),
            obs.y.len()
        )));
    }
    let mut r = DVector::zeros(pred.len());
    for i in 0..pred.len() {
        if mask[i] {
            continue;
        }
        let s = obs.sigma.map_or(1.0, |s| s[i]);
        r[i] = (obs.y[i] - pred[i]) / s;
        if !r[i].is_finite() {
            return Err(Error::Fit(format!("non-finite residual at point {i}")));
        }
    }
    Ok(r)
}

fn jacobian<F>(
    predict: &F,
    p: &[f64],
    base: &[f64],
    free: &[FreeParameter],
    obs: &Observations,
    mask: &[bool],
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = obs.y.len();
    let mut jac = DMatrix::zeros(n, p.len());
    let mut work = p.to_vec();
    for j in 0..p.len() {
        let scale = p[j].abs().max(free[j].typical_scale());
        let h = 1e-6 * scale;
        // Central difference where both sides are feasible, one-sided at a bound.
        let (lo, hi) = (free[j].lower, free[j].upper);
        let (a, b) = if p[j] - h < lo {
            (p[j], p[j] + h)
        } else if p[j] + h > hi {
            (p[j] - h, p[j])
        } else {
            (p[j] - h, p[j] + h)
        };
        work[j] = b;
        let fb = predict(&work)?;
        let fa = if a == p[j] {
            base.to_vec()
        } else {
            work[j] = a;
            predict(&work)?
        };
        work[j] = p[j];
        for i in 0..n {
            if mask[i] {
                continue;
            }
            let s = obs.sigma.map_or(1.0, |s| s[i]);
            jac[(i, j)] = (fb[i] - fa[i]) / (b - a) / s;
        }
    }
    Ok(jac)
}

/// Columns of J that carry no information, and parameter groups along
/// near-null directions of the column-normalized normal matrix.
fn degenerate_parameters(jac: &DMatrix<f64>, free: &[FreeParameter], threshold: f64) -> Vec<String> {
    let p = jac.ncols();
    let norms: Vec<f64> = (0..p).map(|j| jac.column(j).norm()).collect();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    let zero: Vec<String> = (0..p)
        .filter(|&j| norms[j] <= 1e-14 * max_norm)
        .map(|j| free[j].name.clone())
        .collect();
    if !zero.is_empty() || p < 2 {
        return zero;
    }
    let mut scaled = jac.clone();
    for j in 0..p {
        scaled.column_mut(j).scale_mut(1.0 / norms[j]);
    }
    let eig = SymmetricEigen::new(scaled.transpose() * &scaled);
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one parameter");
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if lmin > threshold * lmax {
        return Vec::new();
    }
    let v = eig.eigenvectors.column(imin);
    (0..p)
        .filter(|&j| v[j].abs() > 0.1)
        .map(|j| free[j].name.clone())
        .collect()
}

/// Levenberg-Marquardt minimization of Σ((y − model(p))/σ)² with box bounds.
///
/// `predict` maps the free-parameter vector to model values aligned with
/// `obs.y`. Points flagged in `mask` are ignored. The Jacobian is taken by
/// finite differences.
pub fn least_squares_masked<F>(
    predict: F,
    free: &[FreeParameter],
    obs: &Observations,
    mask: &[bool],
    options: &FitOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = obs.y.len();
    if mask.len() != n {
        return Err(Error::Fit("mask length differs from data length".into()));
    }
    let active = mask.iter().filter(|m| !**m).count();
    let np = free.len();
    if np == 0 {
        return Err(Error::config("free", "no free parameters"));
    }
    if active < np + 1 {
        return Err(Error::Fit(format!(
            "{active} usable points for {np} free parameters; need at least {}",
            np + 1
        )));
    }
    if obs.y.iter().zip(mask).any(|(y, m)| !m && !y.is_finite()) {
        return Err(Error::Fit("observations must be finite".into()));
    }
    if let Some(s) = obs.sigma {
        if s.len() != n || s.iter().zip(mask).any(|(s, m)| !m && !(*s > 0.0 && s.is_finite())) {
            return Err(Error::config("sigma", "must be positive and finite for every point"));
        }
    }
    for f in free {
        f.validate()?;
    }

    let mut p: Vec<f64> = free.iter().map(|f| f.initial).collect();
    let mut pred = predict(&p)?;
    let mut r = weighted(&pred, obs, mask)?;
    let mut cost = 0.5 * r.norm_squared();
    let y_scale: f64 = 0.5
        * obs
            .y
            .iter()
            .enumerate()
            .filter(|(i, _)| !mask[*i])
            .map(|(i, y)| (y / obs.sigma.map_or(1.0, |s| s[i])).powi(2))
            .sum::<f64>();
    let tiny_cost = 1e-30 * y_scale.max(1e-300);

    let mut jac = jacobian(&predict, &p, &pred, free, obs, mask)?;
    // Parameters the model ignores at the starting point cannot be moved by
    // the damped normal equations.
    let insensitive: Vec<String> = (0..np)
        .filter(|&j| jac.column(j).norm() == 0.0)
        .map(|j| free[j].name.clone())
        .collect();
    if !insensitive.is_empty() {
        return Err(Error::NonIdentifiable { parameters: insensitive });
    }

    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = cost <= tiny_cost;
    let mut message = if converged {
        "initial guess reproduces the data".to_string()
    } else {
        String::new()
    };
    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e20 {
            let mut m = a.clone();
            for j in 0..np {
                m[(j, j)] += lambda * a[(j, j)].max(1e-300);
            }
            let Some(delta) = m.clone().cholesky().map(|c| c.solve(&g)).or_else(|| m.lu().solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = (0..np)
                .map(|j| (p[j] + delta[j]).clamp(free[j].lower, free[j].upper))
                .collect();
            let outcome = predict(&trial).and_then(|tp| {
                let tr = weighted(&tp, obs, mask)?;
                Ok((tp, tr))
            });
            let Ok((tp, tr)) = outcome else {
                lambda *= 10.0;
                continue;
            };
            let trial_cost = 0.5 * tr.norm_squared();
            if trial_cost < cost {
                let rel_step = (0..np)
                    .map(|j| (trial[j] - p[j]).abs() / (p[j].abs() + 1e-12 * free[j].typical_scale()))
                    .fold(0.0, f64::max);
                let rel_cost = (cost - trial_cost) / cost;
                p = trial;
                pred = tp;
                r = tr;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel_step < options.step_tolerance {
                    converged = true;
                    message = format!("relative step {rel_step:.3e} below tolerance");
                } else if rel_cost < options.cost_tolerance {
                    converged = true;
                    message = format!("relative cost change {rel_cost:.3e} below tolerance");
                } else if cost <= tiny_cost {
                    converged = true;
                    message = "residual vanished".into();
                }
                break;
            }
            // A step that cannot lower the cost even at negligible length
            // means the current point is a minimum to working precision.
            let rel_step = (0..np)
                .map(|j| (trial[j] - p[j]).abs() / (p[j].abs() + 1e-12 * free[j].typical_scale()))
                .fold(0.0, f64::max);
            if rel_step < options.step_tolerance {
                converged = true;
                message = "no downhill step above the step tolerance".into();
                break;
            }
            lambda *= 10.0;
        }
        if !accepted && !converged {
            message = "damping exhausted without reducing the cost".into();
            break;
        }
        jac = jacobian(&predict, &p, &pred, free, obs, mask)?;
    }
    if !converged && message.is_empty() {
        message = format!("no convergence after {iterations} iterations");
    }

    let degenerate = degenerate_parameters(&jac, free, options.identifiability_threshold);
    if !degenerate.is_empty() {
        return Err(Error::NonIdentifiable { parameters: degenerate });
    }
    let chi2 = 2.0 * cost;
    let dof = active - np;
    let mut result = FitResult::new(free, &p, r.norm(), chi2, dof, iterations, converged, message);
    result.residuals = r.iter().cloned().collect();
    result.masked = (0..n).filter(|&i| mask[i]).collect();
    if converged {
        let a = jac.transpose() * &jac;
        let Some(inv) = a.clone().try_inverse() else {
            return Err(Error::NonIdentifiable {
                parameters: free.iter().map(|f| f.name.clone()).collect(),
            });
        };
        let s2 = if obs.sigma.is_some() { 1.0 } else { chi2 / dof as f64 };
        result.set_covariance(inv * s2);
    }
    Ok(result)
}

/// `least_squares_masked` with every point active.
pub fn least_squares<F>(
    predict: F,
    free: &[FreeParameter],
    obs: &Observations,
    options: &FitOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    least_squares_masked(predict, free, obs, &vec![false; obs.y.len()], options)
}

/// Pointwise model y_i = f(x_i, p).
pub fn least_squares_xy<F>(
    model: F,
    free: &[FreeParameter],
    x: &[f64],
    obs: &Observations,
    options: &FitOptions,
) -> Result<FitResult>
where
    F: Fn(f64, &[f64]) -> f64,
{
    if x.len() != obs.y.len() {
        return Err(Error::Fit("x and y differ in length".into()));
    }
    let order = canonical_order(x, obs);
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| obs.y[i]).collect();
    let sig: Option<Vec<f64>> = obs.sigma.map(|s| order.iter().map(|&i| s[i]).collect());
    let mut fit = least_squares(
        |p| Ok(xs.iter().map(|&xi| model(xi, p)).collect()),
        free,
        &Observations { y: &ys, sigma: sig.as_deref() },
        options,
    )?;
    restore_order(&mut fit, &order);
    Ok(fit)
}

/// Permutation that sorts points by (x, y, σ). Fitting in this order makes
/// the result independent of how the caller ordered the data, down to the
/// last bit; floating-point sums otherwise differ with the order.
pub(crate) fn canonical_order(x: &[f64], obs: &Observations) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    let sigma = |i: usize| obs.sigma.map_or(1.0, |s| s[i]);
    order.sort_by(|&a, &b| {
        x[a].total_cmp(&x[b])
            .then(obs.y[a].total_cmp(&obs.y[b]))
            .then(sigma(a).total_cmp(&sigma(b)))
    });
    order
}

/// Maps residuals and masked indices of a fit made in `order` back to the
/// caller's point order.
pub(crate) fn restore_order(fit: &mut FitResult, order: &[usize]) {
    if fit.residuals.len() == order.len() {
        let mut back = vec![0.0; order.len()];
        for (k, &i) in order.iter().enumerate() {
            back[i] = fit.residuals[k];
        }
        fit.residuals = back;
    }
    let mut masked: Vec<usize> = fit.masked.iter().map(|&k| order[k]).collect();
    masked.sort_unstable();
    fit.masked = masked;
}
