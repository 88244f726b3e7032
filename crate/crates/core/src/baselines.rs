//! Comparison covariate-selection strategies.
//!
//! Cause sets of `W` and `Y` are approximated by learned adjacency sets, since
//! orienting them would need a global structure search.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ci::{CiBackend, CiError, CiQuery};
use crate::combin::Combinations;
use crate::discovery::{build_context, sort_by_name, DiscoveryOptions};
use crate::estimate::{aggregate, EstimateError, EstimationResult, Estimator};
use crate::names::natural_cmp;

/// Default largest conditioning set for the exhaustive search.
pub const EHS_DEFAULT_MAX_COND: usize = 6;
/// Largest covariate set the exhaustive search accepts without a size cap.
pub const EHS_UNCAPPED_LIMIT: usize = 25;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Ci(#[from] CiError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error("uncapped exhaustive search over {0} covariates (limit {EHS_UNCAPPED_LIMIT}); set max_cond")]
    Capacity(usize),
    #[error("no adjustment set found")]
    NoAdjustmentSet,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

pub type Result<T> = std::result::Result<T, BaselineError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineSpec {
    /// No adjustment.
    Null,
    /// All pretreatment covariates.
    Pre,
    /// Learned neighbours of `W`.
    MassXw,
    /// Learned neighbours of `Y`.
    MassXy,
    /// Neighbours of `W` that stay dependent on `Y` given `W`.
    MassQw,
    /// Neighbours of `Y` that stay dependent on `W`.
    MassZy,
    /// Union of the neighbours of `W` and of `Y`.
    Disjunctive,
    /// Every `Z` with `S ⫫ Y | Z ∪ {W}` and `S ⫫̸ Y | Z` for some covariate `S`.
    /// `None` searches sets of every size.
    Ehs { max_cond: Option<usize> },
}

impl BaselineSpec {
    pub const ALL: [BaselineSpec; 8] = [
        BaselineSpec::Null,
        BaselineSpec::Pre,
        BaselineSpec::MassXw,
        BaselineSpec::MassXy,
        BaselineSpec::MassQw,
        BaselineSpec::MassZy,
        BaselineSpec::Disjunctive,
        BaselineSpec::Ehs {
            max_cond: Some(EHS_DEFAULT_MAX_COND),
        },
    ];

    pub fn label(self) -> &'static str {
        match self {
            BaselineSpec::Null => "null",
            BaselineSpec::Pre => "pre",
            BaselineSpec::MassXw => "mass-xw",
            BaselineSpec::MassXy => "mass-xy",
            BaselineSpec::MassQw => "mass-qw",
            BaselineSpec::MassZy => "mass-zy",
            BaselineSpec::Disjunctive => "disjunctive",
            BaselineSpec::Ehs { .. } => "ehs",
        }
    }
}

impl fmt::Display for BaselineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BaselineSpec {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('_', "-");
        BaselineSpec::ALL
            .into_iter()
            .find(|b| b.label() == lower)
            .ok_or_else(|| BaselineError::UnknownStrategy(s.to_string()))
    }
}

/// Members of `set` that no conditioning set drawn from the rest of `set` (plus
/// `fixed`) separates from `target`.
fn keep_dependent(
    backend: &(impl CiBackend + ?Sized),
    set: &[usize],
    target: usize,
    fixed: &[usize],
    max_cond: usize,
) -> Result<Vec<usize>> {
    let mut kept = Vec::new();
    'outer: for &v in set {
        let others: Vec<usize> = set.iter().copied().filter(|&o| o != v).collect();
        for k in 0..=max_cond.min(others.len()) {
            for s in Combinations::new(&others, k) {
                let z = s.into_iter().chain(fixed.iter().copied());
                if backend.test(&CiQuery::new(v, target, z))?.independent {
                    continue 'outer;
                }
            }
        }
        kept.push(v);
    }
    Ok(kept)
}

/// Adjustment sets chosen by `spec`, each sorted by name. Every strategy except
/// the exhaustive search returns exactly one set.
pub fn baseline_adjustment_sets(
    backend: &(impl CiBackend + ?Sized),
    w: usize,
    y: usize,
    x: &[usize],
    spec: BaselineSpec,
    max_cond: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut x_sorted = x.to_vec();
    sort_by_name(backend, &mut x_sorted);
    let one = |mut s: Vec<usize>| {
        sort_by_name(backend, &mut s);
        Ok(vec![s])
    };
    match spec {
        BaselineSpec::Null => Ok(vec![Vec::new()]),
        BaselineSpec::Pre => Ok(vec![x_sorted]),
        BaselineSpec::Ehs { max_cond: cap } => ehs(backend, w, y, &x_sorted, cap),
        _ => {
            let opts = DiscoveryOptions {
                max_cond,
                ..DiscoveryOptions::default()
            };
            let ctx = build_context(backend, w, y, x, &opts)?;
            match spec {
                BaselineSpec::MassXw => one(ctx.adj_w),
                BaselineSpec::MassXy => one(ctx.adj_y),
                BaselineSpec::Disjunctive => one(ctx.adj_union),
                BaselineSpec::MassQw => one(keep_dependent(backend, &ctx.adj_w, y, &[w], max_cond)?),
                BaselineSpec::MassZy => one(keep_dependent(backend, &ctx.adj_y, w, &[], max_cond)?),
                _ => unreachable!(),
            }
        }
    }
}

fn ehs(
    backend: &(impl CiBackend + ?Sized),
    w: usize,
    y: usize,
    x: &[usize],
    cap: Option<usize>,
) -> Result<Vec<Vec<usize>>> {
    let cap = match cap {
        Some(c) => c,
        None if x.len() > EHS_UNCAPPED_LIMIT => return Err(BaselineError::Capacity(x.len())),
        None => x.len(),
    };
    let names = backend.variables();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for &s in x {
        let rest: Vec<usize> = x.iter().copied().filter(|&v| v != s).collect();
        for k in 0..=cap.min(rest.len()) {
            for z in Combinations::new(&rest, k) {
                let mut with_w = z.clone();
                with_w.push(w);
                if backend.test(&CiQuery::new(s, y, with_w))?.independent
                    && !backend.test(&CiQuery::new(s, y, z.iter().copied()))?.independent
                {
                    found.insert(z);
                }
            }
        }
    }
    let mut sets: Vec<Vec<usize>> = found.into_iter().collect();
    let key = |s: &Vec<usize>| s.iter().map(|&v| names[v].as_str()).collect::<Vec<_>>();
    sets.sort_by(|a, b| {
        a.len().cmp(&b.len()).then_with(|| {
            key(a)
                .iter()
                .zip(key(b).iter())
                .map(|(p, q)| natural_cmp(p, q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub spec: BaselineSpec,
    /// Adjustment sets by name.
    pub sets: Vec<Vec<String>>,
    pub estimate: EstimationResult,
    pub ci_tests: u64,
}

/// Selects sets with `spec` and averages the effect estimated with each.
pub fn run_baseline(
    backend: &(impl CiBackend + ?Sized),
    estimator: &Estimator<'_>,
    w: usize,
    y: usize,
    x: &[usize],
    spec: BaselineSpec,
    max_cond: usize,
) -> Result<BaselineOutcome> {
    let start = backend.tests_performed();
    let sets = baseline_adjustment_sets(backend, w, y, x, spec, max_cond)?;
    let ci_tests = backend.tests_performed() - start;
    if sets.is_empty() {
        return Err(BaselineError::NoAdjustmentSet);
    }
    let names = backend.variables();
    let mut per_set = Vec::with_capacity(sets.len());
    for s in &sets {
        let z: Vec<&str> = s.iter().map(|&v| names[v].as_str()).collect();
        let e = estimator.effect(&z)?;
        per_set.push((z.iter().map(|s| s.to_string()).collect::<Vec<_>>(), e.value));
    }
    let estimate = aggregate(per_set, estimator.outcome_kind(), estimator.scale())?;
    Ok(BaselineOutcome {
        spec,
        sets: estimate.per_set.iter().map(|(z, _)| z.clone()).collect(),
        estimate,
        ci_tests,
    })
}
