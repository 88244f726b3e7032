//! Effect estimation by covariate adjustment.
//!
//! Continuous outcomes use the coefficient of the treatment in an OLS fit on
//! `(W, Z)`. Binary outcomes use a logistic fit on `(W, Z)` standardized over the
//! empirical distribution of `Z`, reported as a log marginal causal odds ratio or
//! as a risk difference.

mod linalg;
mod logistic;
mod ols;

pub use logistic::{expit, fit_logistic, logit, LogisticFit};
pub use ols::ols_slopes;

use thiserror::Error;

use crate::data::{DataError, Dataset};

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("design is rank deficient at column `{0}`")]
    RankDeficient(String),
    #[error("{n} rows cannot support {p} regressors")]
    TooFewRows { n: usize, p: usize },
    #[error("column `{0}` must be binary")]
    NotBinary(String),
    #[error("treatment arm {0} is empty")]
    EmptyArm(u8),
    #[error("no adjustment sets to aggregate")]
    NothingToAggregate,
    #[error("{scale:?} needs a binary outcome")]
    ScaleNeedsBinary { scale: EffectScale },
}

pub type Result<T> = std::result::Result<T, EstimateError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectScale {
    /// Regression coefficient of the treatment.
    Difference,
    /// `logit(p1) - logit(p0)` of standardized outcome probabilities.
    LogOddsRatio,
    /// `p1 - p0` of standardized outcome probabilities.
    RiskDifference,
}

impl EffectScale {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectScale::Difference => "difference",
            EffectScale::LogOddsRatio => "log-odds-ratio",
            EffectScale::RiskDifference => "risk-difference",
        }
    }
}

/// One effect estimate plus any fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    pub value: f64,
    pub notes: Vec<String>,
}

fn columns<'a>(data: &'a Dataset, names: &[&str]) -> Result<Vec<&'a [f64]>> {
    names
        .iter()
        .map(|n| Ok(data.column_by_name(n)?))
        .collect()
}

/// Coefficient of `w` in the least-squares fit of `y` on `w` and `z`.
pub fn ace_linear(data: &Dataset, w: &str, y: &str, z: &[&str]) -> Result<f64> {
    let yv = data.column_by_name(y)?;
    let mut regressors = vec![w];
    regressors.extend_from_slice(z);
    let xs = columns(data, &regressors)?;
    let n = data.n_rows();
    if n <= z.len() + 2 {
        return Err(EstimateError::TooFewRows { n, p: z.len() + 2 });
    }
    ols_slopes(yv, &xs)
        .map(|b| b[0])
        .map_err(|j| EstimateError::RankDeficient(regressors[j].to_string()))
}

/// Standardized outcome probabilities under `w = 1` and `w = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedFit {
    pub p1: f64,
    pub p0: f64,
    pub fit: LogisticFit,
}

impl StandardizedFit {
    pub fn log_mcor(&self) -> f64 {
        logit(self.p1) - logit(self.p0)
    }

    pub fn risk_difference(&self) -> f64 {
        self.p1 - self.p0
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.fit.separation {
            notes.push("logistic fit shows separation".to_string());
        }
        if !self.fit.converged {
            notes.push(format!(
                "logistic fit did not converge in {} iterations",
                self.fit.iterations
            ));
        }
        notes
    }
}

fn require_binary(data: &Dataset, name: &str) -> Result<()> {
    if data.kind(data.index_of(name)?).is_binary() {
        Ok(())
    } else {
        Err(EstimateError::NotBinary(name.to_string()))
    }
}

/// Logistic fit of `y` on `w` and `z`, averaged over the sample at `w = 1` and
/// `w = 0`.
pub fn standardized_logistic(data: &Dataset, w: &str, y: &str, z: &[&str]) -> Result<StandardizedFit> {
    require_binary(data, w)?;
    require_binary(data, y)?;
    let wv = data.column_by_name(w)?;
    for arm in [0u8, 1] {
        if !wv.iter().any(|&v| v == arm as f64) {
            return Err(EstimateError::EmptyArm(arm));
        }
    }
    let yv = data.column_by_name(y)?;
    let mut regressors = vec![w];
    regressors.extend_from_slice(z);
    let xs = columns(data, &regressors)?;
    let n = data.n_rows();
    if n <= z.len() + 2 {
        return Err(EstimateError::TooFewRows { n, p: z.len() + 2 });
    }
    let fit = fit_logistic(yv, &xs).map_err(|j| {
        let name = if j == 0 { "(intercept)" } else { regressors[j - 1] };
        EstimateError::RankDeficient(name.to_string())
    })?;
    let b = &fit.coefficients;
    let (mut s1, mut s0) = (0.0, 0.0);
    for r in 0..n {
        let base: f64 = b[0] + xs[1..].iter().zip(&b[2..]).map(|(c, bj)| c[r] * bj).sum::<f64>();
        s1 += expit(base + b[1]);
        s0 += expit(base);
    }
    Ok(StandardizedFit {
        p1: s1 / n as f64,
        p0: s0 / n as f64,
        fit,
    })
}

/// Log marginal causal odds ratio of `w` on a binary `y`, adjusting for `z`.
pub fn ace_mcor(data: &Dataset, w: &str, y: &str, z: &[&str]) -> Result<f64> {
    Ok(standardized_logistic(data, w, y, z)?.log_mcor())
}

/// Effect estimator bound to one dataset, treatment and outcome.
#[derive(Debug, Clone)]
pub struct Estimator<'a> {
    data: &'a Dataset,
    w: String,
    y: String,
    scale: EffectScale,
}

impl<'a> Estimator<'a> {
    /// `scale` defaults to a log odds ratio for binary outcomes and a difference
    /// otherwise.
    pub fn new(data: &'a Dataset, w: &str, y: &str, scale: Option<EffectScale>) -> Result<Self> {
        let kind = outcome_kind(data, y)?;
        data.index_of(w)?;
        let scale = scale.unwrap_or(match kind {
            OutcomeKind::Binary => EffectScale::LogOddsRatio,
            OutcomeKind::Continuous => EffectScale::Difference,
        });
        if scale != EffectScale::Difference && kind != OutcomeKind::Binary {
            return Err(EstimateError::ScaleNeedsBinary { scale });
        }
        Ok(Estimator {
            data,
            w: w.to_string(),
            y: y.to_string(),
            scale,
        })
    }

    pub fn scale(&self) -> EffectScale {
        self.scale
    }

    pub fn outcome_kind(&self) -> OutcomeKind {
        outcome_kind(self.data, &self.y).unwrap_or(OutcomeKind::Continuous)
    }

    pub fn effect(&self, z: &[&str]) -> Result<Effect> {
        match self.scale {
            EffectScale::Difference => Ok(Effect {
                value: ace_linear(self.data, &self.w, &self.y, z)?,
                notes: Vec::new(),
            }),
            EffectScale::LogOddsRatio | EffectScale::RiskDifference => {
                let f = standardized_logistic(self.data, &self.w, &self.y, z)?;
                let value = if self.scale == EffectScale::LogOddsRatio {
                    f.log_mcor()
                } else {
                    f.risk_difference()
                };
                Ok(Effect {
                    value,
                    notes: f.notes(),
                })
            }
        }
    }
}

pub fn outcome_kind(data: &Dataset, y: &str) -> Result<OutcomeKind> {
    Ok(if data.kind(data.index_of(y)?).is_binary() {
        OutcomeKind::Binary
    } else {
        OutcomeKind::Continuous
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Mean of the per-set effects.
    pub ace: f64,
    pub per_set: Vec<(Vec<String>, f64)>,
    pub outcome_kind: OutcomeKind,
    pub effect_scale: EffectScale,
}

pub fn aggregate(
    per_set: Vec<(Vec<String>, f64)>,
    outcome_kind: OutcomeKind,
    effect_scale: EffectScale,
) -> Result<EstimationResult> {
    if per_set.is_empty() {
        return Err(EstimateError::NothingToAggregate);
    }
    let ace = per_set.iter().map(|(_, e)| e).sum::<f64>() / per_set.len() as f64;
    Ok(EstimationResult {
        ace,
        per_set,
        outcome_kind,
        effect_scale,
    })
}
