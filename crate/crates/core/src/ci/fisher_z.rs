use nalgebra::DMatrix;
use statrs::function::erf::erfc;

use crate::data::Dataset;

use super::{check_alpha, CiBackend, CiError, CiFlag, CiQuery, CiResult, Counter, Result};

/// Precision-matrix diagonal above which a submatrix is treated as singular.
const SINGULAR_PRECISION: f64 = 1e12;

/// Fisher z-test on partial correlations. The full correlation matrix is built
/// once; each query inverts the submatrix over `{x, y} ∪ z`.
#[derive(Debug)]
pub struct FisherZ {
    names: Vec<String>,
    corr: DMatrix<f64>,
    n: usize,
    alpha: f64,
    counter: Counter,
}

impl FisherZ {
    pub fn new(data: &Dataset, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(FisherZ {
            names: data.names().to_vec(),
            corr: correlation_matrix(data),
            n: data.n_rows(),
            alpha,
            counter: Counter::default(),
        })
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.corr
    }

    /// Partial correlation of `x` and `y` given `z`, or `None` when singular.
    pub fn partial_correlation(&self, x: usize, y: usize, z: &[usize]) -> Option<f64> {
        let idx: Vec<usize> = [x, y].into_iter().chain(z.iter().copied()).collect();
        let k = idx.len();
        let sub = DMatrix::from_fn(k, k, |i, j| self.corr[(idx[i], idx[j])]);
        let chol = sub.cholesky()?;
        let p = chol.inverse();
        if (0..k).any(|i| !p[(i, i)].is_finite() || p[(i, i)] > SINGULAR_PRECISION) {
            return None;
        }
        Some((-p[(0, 1)] / (p[(0, 0)] * p[(1, 1)]).sqrt()).clamp(-1.0, 1.0))
    }
}

fn correlation_matrix(data: &Dataset) -> DMatrix<f64> {
    let p = data.n_cols();
    let n = data.n_rows() as f64;
    let centred: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let c = data.column(i);
            let mean = c.iter().sum::<f64>() / n;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let mut cov = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let s: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }
    DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            let d = (cov[(i, i)] * cov[(j, j)]).sqrt();
            // A constant column correlates with nothing.
            if d > 0.0 {
                cov[(i, j)] / d
            } else {
                0.0
            }
        }
    })
}

impl CiBackend for FisherZ {
    fn variables(&self) -> &[String] {
        &self.names
    }

    fn test(&self, q: &CiQuery) -> Result<CiResult> {
        self.counter.bump();
        q.validate(&self.names)?;
        let k = q.z.len();
        if self.n <= k + 3 {
            return Err(CiError::InsufficientSamples { n: self.n, k });
        }
        let Some(r) = self.partial_correlation(q.x, q.y, &q.z) else {
            return Ok(CiResult {
                independent: false,
                statistic: f64::INFINITY,
                p_value: 0.0,
                dof_or_n: self.n as f64,
                flag: Some(CiFlag::Collinear),
            });
        };
        let statistic = ((self.n - k - 3) as f64).sqrt() * r.atanh();
        let p_value = if statistic.is_finite() {
            erfc(statistic.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(CiResult {
            independent: p_value > self.alpha,
            statistic,
            p_value,
            dof_or_n: self.n as f64,
            flag: None,
        })
    }

    fn tests_performed(&self) -> u64 {
        self.counter.get()
    }

    fn label(&self) -> &'static str {
        "fisher-z"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn dataset(cols: Vec<Vec<f64>>) -> Dataset {
        let names = (0..cols.len()).map(|i| format!("V{i}")).collect();
        Dataset::new(names, cols).unwrap()
    }

    fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    }

    /// Residual-regression partial correlation for one conditioning variable.
    fn partial_by_residuals(x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        fn resid(a: &[f64], z: &[f64]) -> Vec<f64> {
            let n = a.len() as f64;
            let (ma, mz) = (a.iter().sum::<f64>() / n, z.iter().sum::<f64>() / n);
            let szz: f64 = z.iter().map(|v| (v - mz).powi(2)).sum();
            let saz: f64 = a.iter().zip(z).map(|(p, q)| (p - ma) * (q - mz)).sum();
            let b = saz / szz;
            a.iter().zip(z).map(|(p, q)| (p - ma) - b * (q - mz)).collect()
        }
        let (rx, ry) = (resid(x, z), resid(y, z));
        let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| a * b).sum();
        let sxx: f64 = rx.iter().map(|a| a * a).sum();
        let syy: f64 = ry.iter().map(|a| a * a).sum();
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn partial_correlation_matches_residual_method() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z = normals(&mut rng, 2000);
        let x: Vec<f64> = z.iter().zip(normals(&mut rng, 2000)).map(|(a, e)| a + e).collect();
        let y: Vec<f64> = z
            .iter()
            .zip(&x)
            .zip(normals(&mut rng, 2000))
            .map(|((a, b), e)| 0.5 * a + 0.3 * b + e)
            .collect();
        let expected = partial_by_residuals(&x, &y, &z);
        let t = FisherZ::new(&dataset(vec![x, y, z]), 0.05).unwrap();
        let r = t.partial_correlation(0, 1, &[2]).unwrap();
        assert!((r - expected).abs() < 1e-10, "{r} vs {expected}");
    }

    #[test]
    fn identical_columns_are_dependent_and_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = normals(&mut rng, 500);
        let t = FisherZ::new(&dataset(vec![x.clone(), x]), 0.05).unwrap();
        let r = t.test(&CiQuery::new(0, 1, [])).unwrap();
        assert!(!r.independent);
        assert_eq!(r.p_value, 0.0);
        assert_eq!(r.flag, Some(CiFlag::Collinear));
    }

    #[test]
    fn opened_collider_is_dependent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50_000;
        let x = normals(&mut rng, n);
        let y = normals(&mut rng, n);
        let c: Vec<f64> = x
            .iter()
            .zip(&y)
            .zip(normals(&mut rng, n))
            .map(|((a, b), e)| a + b + e)
            .collect();
        let t = FisherZ::new(&dataset(vec![x, y, c]), 0.05).unwrap();
        assert!(!t.test(&CiQuery::new(0, 1, [2])).unwrap().independent);
        assert!(t.test(&CiQuery::new(0, 1, [])).unwrap().p_value > 1e-4);
    }

    #[test]
    fn too_few_samples() {
        let t = FisherZ::new(&dataset(vec![vec![0.1, 0.2, 0.4]; 3]), 0.05).unwrap();
        assert_eq!(
            t.test(&CiQuery::new(0, 1, [2])),
            Err(CiError::InsufficientSamples { n: 3, k: 1 })
        );
    }
}
