//! Minimum of `f(x) = b Σ_{i<n} x_i² + d x_n² − 2 Σ_{i<j} x_i x_j` on the
//! hyperplane `Σ x_i = k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::InequalityError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticMinimum {
    pub argmin: Vec<f64>,
    pub value: f64,
}

pub fn lemma_objective(b: f64, d: f64, x: &[f64]) -> f64 {
    let n = x.len();
    let sum: f64 = x.iter().sum();
    let squares: f64 = x.iter().map(|v| v * v).sum();
    let cross = sum * sum - squares;
    let diag: f64 = x[..n - 1].iter().map(|v| b * v * v).sum::<f64>() + d * x[n - 1] * x[n - 1];
    diag - cross
}

fn gradient(b: f64, d: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let sum: f64 = x.iter().sum();
    (0..n)
        .map(|i| {
            let w = if i + 1 == n { d } else { b };
            2.0 * (w + 1.0) * x[i] - 2.0 * sum
        })
        .collect()
}

/// Closed-form critical point `x_i = k/(b+1)`, `x_n = k/(d+1)`. Requires
/// `d = (n−1)/(b−n+2)`, under which that point lies on the hyperplane.
pub fn minimize_constrained_quadratic(
    b: f64,
    d: f64,
    k: f64,
    n: usize,
) -> Result<QuadraticMinimum, InequalityError> {
    if n < 2 {
        return Err(InequalityError::IncompatibleParameters(format!(
            "need n ≥ 2, got {n}"
        )));
    }
    if !(b > 0.0 && d > 0.0) {
        return Err(InequalityError::IncompatibleParameters(format!(
            "need b, d > 0, got b = {b}, d = {d}"
        )));
    }
    let denom = b - n as f64 + 2.0;
    let expected = (n as f64 - 1.0) / denom;
    if denom <= 0.0 || (d - expected).abs() > 1e-12 * expected.abs().max(1.0) {
        return Err(InequalityError::IncompatibleParameters(format!(
            "d = {d} but (n−1)/(b−n+2) = {expected}"
        )));
    }
    let mut argmin = vec![k / (b + 1.0); n];
    argmin[n - 1] = k / (d + 1.0);
    let value = lemma_objective(b, d, &argmin);
    Ok(QuadraticMinimum { argmin, value })
}

/// Steepest descent restricted to `Σ x_i = k` with exact line search,
/// best of `starts` random starting points.
pub fn projected_gradient_minimize(
    b: f64,
    d: f64,
    k: f64,
    n: usize,
    starts: usize,
    seed: u64,
) -> QuadraticMinimum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<QuadraticMinimum> = None;
    for _ in 0..starts.max(1) {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let shift = (k - x.iter().sum::<f64>()) / n as f64;
        x.iter_mut().for_each(|v| *v += shift);
        for _ in 0..200_000 {
            let g = gradient(b, d, &x);
            let mean = g.iter().sum::<f64>() / n as f64;
            let p: Vec<f64> = g.iter().map(|v| v - mean).collect();
            let pp: f64 = p.iter().map(|v| v * v).sum();
            if pp.sqrt() < 1e-14 * (1.0 + k.abs()) {
                break;
            }
            // Hessian is 2·diag(w+1) − 2·11ᵀ, and Σp = 0 kills the rank-one part.
            let php: f64 = p
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let w = if i + 1 == n { d } else { b };
                    2.0 * (w + 1.0) * v * v
                })
                .sum();
            if php <= 0.0 {
                break;
            }
            let step = pp / php;
            x.iter_mut().zip(&p).for_each(|(v, pi)| *v -= step * pi);
        }
        let value = lemma_objective(b, d, &x);
        if best.as_ref().is_none_or(|m| value < m.value) {
            best = Some(QuadraticMinimum { argmin: x, value });
        }
    }
    best.expect("at least one start")
}
