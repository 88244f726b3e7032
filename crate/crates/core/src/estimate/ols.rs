use super::linalg::{cholesky, cholesky_solve};

/// Least-squares slopes of `y` on `xs` with an intercept, from centred
/// cross-products. `Err(j)` names a column of `xs` that is collinear with the
/// intercept or with earlier columns.
pub fn ols_slopes(y: &[f64], xs: &[&[f64]]) -> Result<Vec<f64>, usize> {
    let n = y.len() as f64;
    let p = xs.len();
    let means: Vec<f64> = xs.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let ybar = y.iter().sum::<f64>() / n;
    let mut xtx = vec![0.0; p * p];
    let mut xty = vec![0.0; p];
    for i in 0..p {
        let ci = xs[i];
        let mi = means[i];
        for j in 0..=i {
            let cj = xs[j];
            let mj = means[j];
            let s: f64 = ci.iter().zip(cj).map(|(a, b)| (a - mi) * (b - mj)).sum();
            xtx[i * p + j] = s;
            xtx[j * p + i] = s;
        }
        xty[i] = ci.iter().zip(y).map(|(a, b)| (a - mi) * (b - ybar)).sum();
    }
    let l = cholesky(&xtx, p)?;
    Ok(cholesky_solve(&l, p, &xty))
}
