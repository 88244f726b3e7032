use super::{mask_latents, DatagenError, ModelConfig, Result};
use crate::ci::{auto_backend, Recording};
use crate::data::Dataset;
use crate::search::{run_ce2ls_by_name, SearchConfig};

/// Extra seeds tried after the requested one.
pub const MAX_SCREEN_RETRIES: usize = 5;

/// Sample size at which seeds are screened.
pub const SCREEN_SAMPLES: usize = 50_000;

/// Spacing between successive screening seeds.
const SEED_STRIDE: u64 = 1_000_003;

#[derive(Debug, Clone)]
pub struct Screened {
    /// Masked sample.
    pub data: Dataset,
    pub seed: u64,
    /// Seeds rejected before this one.
    pub rejected: usize,
}

/// Samples and masks `config`, rejecting seeds for which any CI decision the
/// search makes on a sample of `max(n, SCREEN_SAMPLES)` rows disagrees with the
/// true MAG. Rejected seeds are replaced by `seed + k * 1_000_003` for
/// `k = 1..=MAX_SCREEN_RETRIES`. Rows are drawn one at a time, so the returned
/// `n`-row sample is a prefix of the screened one.
pub fn screened_sample(
    config: &ModelConfig,
    n: usize,
    seed: u64,
    alpha: f64,
    search: &SearchConfig,
) -> Result<Screened> {
    let (w, y) = config.endpoints()?;
    let mag = config.model.dag().latent_project(&config.latents)?;
    let covariates = config.covariates();
    for k in 0..=MAX_SCREEN_RETRIES {
        let s = seed.wrapping_add(k as u64 * SEED_STRIDE);
        let screen_n = n.max(SCREEN_SAMPLES);
        let data = mask_latents(&config.model.sample(screen_n, s)?, &config.latents, w, y)?;
        let backend = auto_backend(&data, alpha).map_err(|e| DatagenError::Screening(e.to_string()))?;
        let rec = Recording::new(backend.as_ref());
        let ran = run_ce2ls_by_name(&rec, w, y, &covariates, search, None).is_ok();
        let names = backend.variables().to_vec();
        let node = |v: usize| mag.node(&names[v]);
        let mut faithful = ran;
        for (q, independent) in rec.into_log() {
            if !faithful {
                break;
            }
            let z = q.z.iter().map(|&v| node(v)).collect::<std::result::Result<Vec<_>, _>>()?;
            if independent != mag.m_separated(node(q.x)?, node(q.y)?, &z)? {
                faithful = false;
            }
        }
        if faithful {
            let data = if screen_n == n {
                data
            } else {
                mask_latents(&config.model.sample(n, s)?, &config.latents, w, y)?
            };
            return Ok(Screened {
                data,
                seed: s,
                rejected: k,
            });
        }
    }
    Err(DatagenError::Unusable {
        seed,
        tried: MAX_SCREEN_RETRIES + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::presets;

    #[test]
    fn group1_sample_passes_screening() {
        let s = screened_sample(&presets::group1(), 20_000, 7, 0.05, &SearchConfig::default()).unwrap();
        assert_eq!(s.data.n_cols(), 9);
        assert_eq!(s.data.n_rows(), 20_000);
        assert!(s.rejected <= MAX_SCREEN_RETRIES);
    }
}
