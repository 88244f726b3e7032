//! Dense symmetric positive-definite solves for small normal-equation systems.

/// Relative pivot below which a column counts as linearly dependent on the
/// columns before it.
const PIVOT_TOL: f64 = 1e-10;

/// Cholesky factor `L` (row-major, lower) of the `p × p` matrix `a`. On failure,
/// returns the index of the first column that is (numerically) a combination of
/// earlier columns.
pub fn cholesky(a: &[f64], p: usize) -> Result<Vec<f64>, usize> {
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        let scale = a[j * p + j].abs().max(f64::MIN_POSITIVE);
        if !(d > PIVOT_TOL * scale) || !d.is_finite() {
            return Err(j);
        }
        let djj = d.sqrt();
        l[j * p + j] = djj;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` given the factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * p + k] * z[k];
        }
        z[i] = s / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k * p + i] * x[k];
        }
        x[i] = s / l[i * p + i];
    }
    x
}
