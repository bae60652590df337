//! Small numerical helpers shared by the agents.

use rand::Rng;

use crate::{Error, Result};

/// Tolerance for a probability vector summing to one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Checks that `probs` is a probability vector (non-negative, sums to one).
pub fn validate_distribution(probs: &[f64]) -> Result<()> {
    for (index, &value) in probs.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if probs.is_empty() || (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized {
            sum,
            len: probs.len(),
        });
    }
    Ok(())
}

/// Draws an index from a validated categorical distribution.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    validate_distribution(probs)?;
    Ok(sample_unchecked(probs, rng))
}

/// Inverse-CDF draw; assumes `probs` is normalized.
pub(crate) fn sample_unchecked<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    // u landed in the rounding gap at the top of the CDF.
    last
}

/// Index of the maximum, ties broken uniformly at random.
///
/// Panics on an empty slice.
pub fn argmax_random_tie<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    assert!(!values.is_empty(), "argmax of an empty slice");
    let mut best = f64::NEG_INFINITY;
    let mut count = 0usize;
    let mut chosen = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            count = 1;
            chosen = i;
        } else if v == best {
            // Reservoir sampling over the maximizers.
            count += 1;
            if rng.random_range(0..count) == 0 {
                chosen = i;
            }
        }
    }
    chosen
}

/// `ln Σ exp(x_i)`, stable for large magnitudes. Returns `-inf` when every
/// entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Total-variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Point mass on `index` over `len` outcomes.
pub fn one_hot(len: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    v
}

/// Uniform distribution over `len` outcomes.
pub fn uniform(len: usize) -> Vec<f64> {
    vec![1.0 / len as f64; len]
}
