use super::linalg::{cholesky, cholesky_solve};

pub const MAX_ITERATIONS: usize = 50;
pub const TOLERANCE: f64 = 1e-8;
/// Coefficient magnitude taken as a sign of (quasi-)separation.
const SEPARATION_BOUND: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// Intercept first, then one coefficient per column.
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub separation: bool,
}

pub fn expit(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Logistic regression of a 0/1 `y` on `xs` with an intercept, by iteratively
/// reweighted least squares. `Err(j)` names a collinear design column (0 is the
/// intercept).
pub fn fit_logistic(y: &[f64], xs: &[&[f64]]) -> Result<LogisticFit, usize> {
    let n = y.len();
    let p = xs.len() + 1;
    let x = |r: usize, c: usize| if c == 0 { 1.0 } else { xs[c - 1][r] };
    let mut beta = vec![0.0; p];
    let mut converged = false;
    let mut degenerate = false;
    let mut iterations = 0;
    let mut xtwx = vec![0.0; p * p];
    let mut xtwz = vec![0.0; p];
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        xtwx.iter_mut().for_each(|v| *v = 0.0);
        xtwz.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..n {
            let eta: f64 = (0..p).map(|c| beta[c] * x(r, c)).sum();
            let mu = expit(eta);
            let w = (mu * (1.0 - mu)).max(1e-10);
            let z = eta + (y[r] - mu) / w;
            for i in 0..p {
                let wi = w * x(r, i);
                xtwz[i] += wi * z;
                for j in 0..=i {
                    xtwx[i * p + j] += wi * x(r, j);
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                xtwx[j * p + i] = xtwx[i * p + j];
            }
        }
        let l = match cholesky(&xtwx, p) {
            Ok(l) => l,
            Err(j) if iterations == 1 => return Err(j),
            // Weights collapsed after the first step: fitted probabilities hit 0 or 1.
            Err(_) => {
                degenerate = true;
                break;
            }
        };
        let next = cholesky_solve(&l, p, &xtwz);
        let delta = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = next;
        if delta < TOLERANCE {
            converged = true;
            break;
        }
    }
    let separation = degenerate || beta.iter().any(|b| b.abs() > SEPARATION_BOUND || !b.is_finite());
    Ok(LogisticFit {
        coefficients: beta,
        iterations,
        converged,
        separation,
    })
}
