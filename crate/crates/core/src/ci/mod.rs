//! Conditional-independence backends behind one trait: Fisher-z for continuous
//! data, G² for discrete data and an m-separation oracle.

mod fisher_z;
mod g2;
mod oracle;

pub use fisher_z::FisherZ;
pub use g2::G2;
pub use oracle::Oracle;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::data::{ColumnKind, Dataset};
use crate::graph::GraphError;

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("query arguments overlap at `{0}`")]
    Overlap(String),
    #[error("{n} samples cannot support a conditioning set of size {k}")]
    InsufficientSamples { n: usize, k: usize },
    #[error("column `{0}` is not discrete")]
    NotDiscrete(String),
    #[error("column `{column}` has {levels} levels, at most {max} are supported")]
    TooManyLevels {
        column: String,
        levels: usize,
        max: usize,
    },
    #[error("significance level {0} is outside (0, 1)")]
    BadAlpha(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T> = std::result::Result<T, CiError>;

/// `x ⫫ y | z` over backend variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CiQuery {
    pub x: usize,
    pub y: usize,
    pub z: Vec<usize>,
}

impl CiQuery {
    pub fn new(x: usize, y: usize, z: impl IntoIterator<Item = usize>) -> Self {
        CiQuery {
            x,
            y,
            z: z.into_iter().collect(),
        }
    }

    pub fn by_name<B: CiBackend + ?Sized, S: AsRef<str>>(
        backend: &B,
        x: &str,
        y: &str,
        z: &[S],
    ) -> Result<Self> {
        let idx = |s: &str| {
            backend
                .index_of(s)
                .ok_or_else(|| CiError::UnknownVariable(s.to_string()))
        };
        Ok(CiQuery {
            x: idx(x)?,
            y: idx(y)?,
            z: z.iter().map(|s| idx(s.as_ref())).collect::<Result<_>>()?,
        })
    }

    fn validate(&self, names: &[String]) -> Result<()> {
        let n = names.len();
        for &v in [self.x, self.y].iter().chain(&self.z) {
            if v >= n {
                return Err(CiError::UnknownVariable(format!("#{v}")));
            }
        }
        if self.x == self.y {
            return Err(CiError::Overlap(names[self.x].clone()));
        }
        if let Some(&v) = self.z.iter().find(|&&v| v == self.x || v == self.y) {
            return Err(CiError::Overlap(names[v].clone()));
        }
        Ok(())
    }
}

/// Degenerate situations a test resolved by policy rather than by its statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiFlag {
    /// Singular correlation submatrix; reported as dependent with p = 0.
    Collinear,
    /// No degrees of freedom left; reported as independent with p = 1.
    NoDegreesOfFreedom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiResult {
    pub independent: bool,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom for G², sample size for Fisher-z, 0 for the oracle.
    pub dof_or_n: f64,
    pub flag: Option<CiFlag>,
}

pub trait CiBackend: Send + Sync {
    fn variables(&self) -> &[String];

    fn index_of(&self, name: &str) -> Option<usize> {
        self.variables().iter().position(|v| v == name)
    }

    fn test(&self, q: &CiQuery) -> Result<CiResult>;

    /// Number of `test` calls so far.
    fn tests_performed(&self) -> u64;

    /// Short backend name for reports.
    fn label(&self) -> &'static str;
}

#[derive(Debug, Default)]
pub(crate) struct Counter(AtomicU64);

impl Counter {
    pub fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CiError::BadAlpha(alpha))
    }
}

/// G² when every column is discrete, Fisher-z otherwise (binary columns are then
/// read as numeric).
pub fn auto_backend(data: &Dataset, alpha: f64) -> Result<Box<dyn CiBackend>> {
    let all_discrete = (0..data.n_cols()).all(|i| matches!(data.kind(i), ColumnKind::Discrete { .. }));
    if all_discrete {
        Ok(Box::new(G2::new(data, alpha)?))
    } else {
        Ok(Box::new(FisherZ::new(data, alpha)?))
    }
}

/// Wraps a backend and records every query it answers, in call order.
pub struct Recording<'a> {
    inner: &'a dyn CiBackend,
    log: Mutex<Vec<(CiQuery, bool)>>,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a dyn CiBackend) -> Self {
        Recording {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    /// Queries with the independence decision each received.
    pub fn into_log(self) -> Vec<(CiQuery, bool)> {
        self.log.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl CiBackend for Recording<'_> {
    fn variables(&self) -> &[String] {
        self.inner.variables()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.inner.index_of(name)
    }

    fn test(&self, q: &CiQuery) -> Result<CiResult> {
        let r = self.inner.test(q)?;
        self.log
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push((q.clone(), r.independent));
        Ok(r)
    }

    fn tests_performed(&self) -> u64 {
        self.inner.tests_performed()
    }

    fn label(&self) -> &'static str {
        self.inner.label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_picks_by_column_kinds() {
        let d = Dataset::new(
            vec!["A".into(), "B".into()],
            vec![vec![0.0, 1.0, 0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(auto_backend(&d, 0.05).unwrap().label(), "g2");
        let d = Dataset::new(
            vec!["A".into(), "B".into()],
            vec![vec![0.0, 1.0, 0.0, 1.0, 1.0], vec![0.1, 1.0, 0.0, 0.3, 1.0]],
        )
        .unwrap();
        assert_eq!(auto_backend(&d, 0.05).unwrap().label(), "fisher-z");
        assert!(matches!(auto_backend(&d, 1.5), Err(CiError::BadAlpha(_))));
    }

    #[test]
    fn query_validation() {
        let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        assert!(CiQuery::new(0, 1, [2]).validate(&names).is_ok());
        assert_eq!(
            CiQuery::new(0, 0, []).validate(&names),
            Err(CiError::Overlap("A".into()))
        );
        assert_eq!(
            CiQuery::new(0, 1, [1]).validate(&names),
            Err(CiError::Overlap("B".into()))
        );
        assert!(matches!(
            CiQuery::new(0, 5, []).validate(&names),
            Err(CiError::UnknownVariable(_))
        ));
    }
}
