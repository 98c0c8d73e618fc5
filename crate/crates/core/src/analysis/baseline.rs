use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{distribution, RunningStats};
use crate::error::{contract, Result};
use crate::partition::balanced_bipartitions;
use crate::state::haar_random_state;

/// Ensemble statistics of `μ` and `σ` over Haar-random states.
#[derive(Clone, Debug, Serialize)]
pub struct BaselineSummary {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean_mu: f64,
    pub std_mu: f64,
    pub mean_sigma: f64,
    pub std_sigma: f64,
    /// Per-sample `(μ, σ)` in sample order.
    pub per_sample: Vec<(f64, f64)>,
}

/// Balanced-cut distribution of `samples` Haar states. Per-sample seeds are
/// drawn from one master generator, so the run is reproducible from `seed`.
pub fn random_baseline(n: usize, samples: usize, seed: u64) -> Result<BaselineSummary> {
    if samples == 0 {
        return Err(contract("baseline needs at least one sample"));
    }
    let family = balanced_bipartitions(n)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..samples).map(|_| master.random()).collect();
    let per_sample: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let state = haar_random_state(n, s)?;
            let d = distribution(&state, &family, 1, false)?;
            Ok((d.summary.mu, d.summary.sigma))
        })
        .collect::<Result<_>>()?;
    let mu: RunningStats = per_sample.iter().map(|p| p.0).collect();
    let sigma: RunningStats = per_sample.iter().map(|p| p.1).collect();
    Ok(BaselineSummary {
        n,
        samples,
        seed,
        mean_mu: mu.mean(),
        std_mu: mu.population_std(),
        mean_sigma: sigma.mean(),
        std_sigma: sigma.population_std(),
        per_sample,
    })
}
