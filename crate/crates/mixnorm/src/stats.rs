//! Bootstrap and binomial error estimates for Monte Carlo comparisons.
//!
//! Every inequality check against sampled data uses the same tolerance rule:
//! relative slack of max(5%, 3 bootstrap standard errors). The bootstrap is
//! seeded from the sample set's own seed with stream indices offset far above
//! any replica stream, so checks stay bit-reproducible.

use crate::error::Result;
use crate::field::SampleSet;
use crate::reduce::{pairwise_sum, pairwise_sum_by};
use crate::space::validate_exponent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Default number of bootstrap resamples.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Relative tolerance floor for statistical comparisons.
pub const STAT_REL_FLOOR: f64 = 0.05;

/// Standard-error multiplier for statistical comparisons.
pub const SE_MULTIPLIER: f64 = 3.0;

/// Stream offset separating bootstrap streams from replica streams.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 40;

/// Bootstrap standard error of the empirical r-th moment norm.
///
/// Resamples the set with replacement `resamples` times and returns the
/// standard deviation of the re-estimated norms. Deterministic in
/// (samples.seed, resamples).
pub fn bootstrap_moment_se(samples: &SampleSet, r: f64, resamples: usize) -> Result<f64> {
    validate_exponent(r)?;
    let values = samples.values();
    let n = values.len();
    let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m == 0.0 || resamples < 2 {
        return Ok(0.0);
    }
    // Precompute (|v|/m)^r once; each resample only averages a subset.
    let powered: Vec<f64> = values.iter().map(|v| (v.abs() / m).powf(r)).collect();
    let estimates: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(samples.seed());
            rng.set_stream(BOOTSTRAP_STREAM_BASE + b as u64);
            let mean =
                pairwise_sum_by(n, |_| powered[rng.random_range(0..n)]) / n as f64;
            m * mean.powf(1.0 / r)
        })
        .collect();
    let mean = pairwise_sum(&estimates) / resamples as f64;
    let var = pairwise_sum_by(resamples, |i| {
        let d = estimates[i] - mean;
        d * d
    }) / (resamples as f64 - 1.0);
    Ok(var.sqrt())
}

/// Relative tolerance for `lhs <= rhs` checks against sampled data:
/// max(5%, 3 se / rhs).
pub fn statistical_tolerance(rhs: f64, se: f64) -> f64 {
    if rhs <= 0.0 {
        return STAT_REL_FLOOR;
    }
    STAT_REL_FLOOR.max(SE_MULTIPLIER * se / rhs)
}

/// Binomial standard error of an empirical tail probability.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}
