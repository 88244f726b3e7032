//! Benchmark data: linear SEMs, discrete Bayesian networks, latent masking and
//! ground-truth effects.

mod bn;
mod config;
pub mod presets;
pub mod random;
mod screen;
mod sem;

pub use bn::{DiscreteBn, MAX_ENUMERATED_STATES};
pub use config::{parse_model_config, Model, ModelConfig};
pub use screen::{screened_sample, Screened, MAX_SCREEN_RETRIES, SCREEN_SAMPLES};
pub use sem::{true_ace_linear, LinearSem};

use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::graph::GraphError;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("no edge `{0}` -> `{1}`")]
    NoSuchEdge(String, String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("cpt for `{0}`: {1}")]
    MalformedCpt(String, String),
    #[error("sample size must be positive")]
    NoSamples,
    #[error("`{0}` is binary and lies on a causal path, so the effect is not a path sum")]
    NonLinearPath(String),
    #[error("joint state space too large to enumerate")]
    TooLargeToEnumerate,
    #[error("config names no treatment and outcome")]
    MissingEndpoints,
    #[error("no faithful-looking sample in {tried} seeds starting at {seed}")]
    Unusable { seed: u64, tried: usize },
    #[error("screening run failed: {0}")]
    Screening(String),
}

pub type Result<T> = std::result::Result<T, DatagenError>;

/// Drops latent columns; the treatment and outcome may not be among them.
pub fn mask_latents(data: &Dataset, latents: &[impl AsRef<str>], w: &str, y: &str) -> Result<Dataset> {
    Ok(data.mask(latents, &[w, y])?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masking_group_benchmarks() {
        for (cfg, expected) in [
            (presets::group1(), vec!["W", "X1", "X3", "X5", "X7", "X8", "X9", "X10", "Y"]),
            (presets::group2(), vec!["W", "X1", "X2", "X3", "X4", "X5", "X6", "X8", "X9", "X10", "X13", "Y"]),
        ] {
            let full = cfg.model.sample(100, 1).unwrap();
            let masked = mask_latents(&full, &cfg.latents, "W", "Y").unwrap();
            assert_eq!(masked.names(), expected);
            assert_eq!(masked.n_rows(), 100);
            let none = mask_latents(&full, &[] as &[&str], "W", "Y").unwrap();
            assert_eq!(none, full);
            assert!(mask_latents(&full, &["W"], "W", "Y").is_err());
        }
    }
}
