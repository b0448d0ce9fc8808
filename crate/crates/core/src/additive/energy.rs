//! Random boolean functions evaluated on a sumset source, against the
//! Hoeffding bound in terms of additive energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sets::{normalize, representation_counts};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyExperiment {
    pub n: usize,
    pub size_a: usize,
    pub size_b: usize,
    pub energy: u64,
    pub trials: usize,
    pub rng_seed: u64,
    pub eps: f64,
    pub mean_error: f64,
    /// `(q, value)` for q in 0.5, 0.9, 0.99 and 1.
    pub quantiles: Vec<(f64, f64)>,
    /// Fraction of trials with `|E f(A+B) − ½| > ε`.
    pub exceed_fraction: f64,
    /// `2 exp(−2ε²(|A||B|)²/E(A,B))`.
    pub hoeffding_bound: f64,
    pub holds: bool,
}

pub fn hoeffding_bound(size_a: usize, size_b: usize, energy: u64, eps: f64) -> f64 {
    let kk = (size_a * size_b) as f64;
    (2.0 * (-2.0 * eps * eps * kk * kk / energy as f64).exp()).min(1.0)
}

/// Trial `i` draws `f` from the ChaCha8 stream `i` of `rng_seed`, so results
/// do not depend on the thread count.
pub fn random_function_energy_experiment(
    n: usize,
    a: &[u32],
    b: &[u32],
    trials: usize,
    rng_seed: u64,
    eps: f64,
) -> Result<EnergyExperiment> {
    if trials == 0 || !(eps > 0.0) {
        return Err(Error::param("trials and ε must be positive"));
    }
    let (a, b) = (normalize(n, a)?, normalize(n, b)?);
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("sets must be nonempty"));
    }
    let gamma = representation_counts(n, &a, &b)?;
    let energy: u64 = gamma.iter().map(|&g| (g * g) as u64).sum();
    let total = (a.len() * b.len()) as f64;
    let support: Vec<f64> = gamma
        .iter()
        .filter(|&&g| g > 0)
        .map(|&g| g as f64 / total)
        .collect();

    let mut errors: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(trial);
            let mut acc = 0.0;
            for chunk in support.chunks(64) {
                let bits: u64 = rng.gen();
                for (i, w) in chunk.iter().enumerate() {
                    if bits >> i & 1 == 1 {
                        acc += w;
                    }
                }
            }
            (acc - 0.5).abs()
        })
        .collect();
    let exceed = errors.iter().filter(|&&e| e > eps).count() as f64 / trials as f64;
    let mean_error = errors.iter().sum::<f64>() / trials as f64;
    errors.sort_by(f64::total_cmp);
    let quantiles = [0.5, 0.9, 0.99, 1.0]
        .iter()
        .map(|&q| {
            let i = ((q * trials as f64).ceil() as usize).clamp(1, trials) - 1;
            (q, errors[i])
        })
        .collect();
    let bound = hoeffding_bound(a.len(), b.len(), energy, eps);
    Ok(EnergyExperiment {
        n,
        size_a: a.len(),
        size_b: b.len(),
        energy,
        trials,
        rng_seed,
        eps,
        mean_error,
        quantiles,
        exceed_fraction: exceed,
        hoeffding_bound: bound,
        holds: exceed <= bound,
    })
}
