use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{ColumnKind, Dataset, MAX_LEVELS};

use super::{check_alpha, CiBackend, CiError, CiFlag, CiQuery, CiResult, Counter, Result};

/// G² likelihood-ratio test over the strata of the conditioning set.
#[derive(Debug)]
pub struct G2 {
    names: Vec<String>,
    /// Column codes, or `None` for a column that is not discrete.
    codes: Vec<Option<Vec<u8>>>,
    levels: Vec<usize>,
    n: usize,
    alpha: f64,
    counter: Counter,
}

impl G2 {
    pub fn new(data: &Dataset, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let mut codes = Vec::with_capacity(data.n_cols());
        let mut levels = Vec::with_capacity(data.n_cols());
        for i in 0..data.n_cols() {
            match data.kind(i) {
                ColumnKind::Discrete { levels: l } => {
                    codes.push(Some(data.column(i).iter().map(|&v| v as u8).collect()));
                    levels.push(l);
                }
                ColumnKind::Continuous => {
                    codes.push(None);
                    levels.push(0);
                }
            }
        }
        Ok(G2 {
            names: data.names().to_vec(),
            codes,
            levels,
            n: data.n_rows(),
            alpha,
            counter: Counter::default(),
        })
    }

    fn column(&self, v: usize) -> Result<&[u8]> {
        let codes = self.codes[v]
            .as_deref()
            .ok_or_else(|| CiError::NotDiscrete(self.names[v].clone()))?;
        if self.levels[v] > MAX_LEVELS {
            return Err(CiError::TooManyLevels {
                column: self.names[v].clone(),
                levels: self.levels[v],
                max: MAX_LEVELS,
            });
        }
        Ok(codes)
    }
}

impl CiBackend for G2 {
    fn variables(&self) -> &[String] {
        &self.names
    }

    fn test(&self, q: &CiQuery) -> Result<CiResult> {
        self.counter.bump();
        q.validate(&self.names)?;
        let xs = self.column(q.x)?;
        let ys = self.column(q.y)?;
        let zs: Vec<&[u8]> = q.z.iter().map(|&v| self.column(v)).collect::<Result<_>>()?;
        let (lx, ly) = (self.levels[q.x], self.levels[q.y]);

        let mut strata: HashMap<u64, Vec<u32>> = HashMap::new();
        for r in 0..self.n {
            let key = q
                .z
                .iter()
                .zip(&zs)
                .fold(0u64, |k, (&v, col)| k * self.levels[v] as u64 + col[r] as u64);
            let table = strata.entry(key).or_insert_with(|| vec![0; lx * ly]);
            table[xs[r] as usize * ly + ys[r] as usize] += 1;
        }

        let mut g2 = 0.0;
        for table in strata.values() {
            let total: u32 = table.iter().sum();
            let row: Vec<u32> = (0..lx).map(|i| table[i * ly..(i + 1) * ly].iter().sum()).collect();
            let col: Vec<u32> = (0..ly).map(|j| (0..lx).map(|i| table[i * ly + j]).sum()).collect();
            for i in 0..lx {
                for j in 0..ly {
                    let o = table[i * ly + j];
                    if o > 0 {
                        let e = row[i] as f64 * col[j] as f64 / total as f64;
                        g2 += o as f64 * (o as f64 / e).ln();
                    }
                }
            }
        }
        g2 *= 2.0;
        let dof = ((lx - 1) * (ly - 1) * strata.len()) as f64;
        if dof <= 0.0 {
            return Ok(CiResult {
                independent: true,
                statistic: g2,
                p_value: 1.0,
                dof_or_n: dof,
                flag: Some(CiFlag::NoDegreesOfFreedom),
            });
        }
        let p_value = ChiSquared::new(dof)
            .map(|d| d.sf(g2.max(0.0)))
            .unwrap_or(1.0)
            .clamp(0.0, 1.0);
        Ok(CiResult {
            independent: p_value > self.alpha,
            statistic: g2,
            p_value,
            dof_or_n: dof,
            flag: None,
        })
    }

    fn tests_performed(&self) -> u64 {
        self.counter.get()
    }

    fn label(&self) -> &'static str {
        "g2"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(cols: Vec<Vec<f64>>) -> Dataset {
        let names = (0..cols.len()).map(|i| format!("V{i}")).collect();
        Dataset::new(names, cols).unwrap()
    }

    fn coins(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(0..2) as f64).collect()
    }

    #[test]
    fn statistic_matches_hand_computed_table() {
        // 2x2 table [[30, 10], [10, 30]]: G² = 2 Σ o ln(o / 20).
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (a, b, c) in [(0, 0, 30), (0, 1, 10), (1, 0, 10), (1, 1, 30)] {
            for _ in 0..c {
                x.push(a as f64);
                y.push(b as f64);
            }
        }
        let expected = 2.0 * (60.0 * (30.0f64 / 20.0).ln() + 20.0 * (10.0f64 / 20.0).ln());
        let t = G2::new(&dataset(vec![x, y]), 0.05).unwrap();
        let r = t.test(&CiQuery::new(0, 1, [])).unwrap();
        assert!((r.statistic - expected).abs() < 1e-9);
        assert_eq!(r.dof_or_n, 1.0);
        assert!(!r.independent);
    }

    #[test]
    fn xor_is_dependent_only_given_the_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = coins(&mut rng, 10_000);
        let z = coins(&mut rng, 10_000);
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| ((*a as u8) ^ (*b as u8)) as f64).collect();
        let t = G2::new(&dataset(vec![x, y, z]), 0.05).unwrap();
        assert!(!t.test(&CiQuery::new(0, 1, [2])).unwrap().independent);
        assert!(t.test(&CiQuery::new(0, 1, [])).unwrap().p_value > 1e-3);
    }

    #[test]
    fn copy_is_dependent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = coins(&mut rng, 1000);
        let t = G2::new(&dataset(vec![x.clone(), x]), 0.05).unwrap();
        assert!(!t.test(&CiQuery::new(0, 1, [])).unwrap().independent);
    }

    #[test]
    fn continuous_column_rejected() {
        let t = G2::new(&dataset(vec![vec![0.0, 1.0], vec![0.5, 1.5]]), 0.05).unwrap();
        assert_eq!(
            t.test(&CiQuery::new(0, 1, [])),
            Err(CiError::NotDiscrete("V1".into()))
        );
    }
}
