//! Mean and standard deviation of the log-probability under a categorical
//! distribution.
//!
//! For a next-token distribution `p`, `mu = sum p(z) log p(z)` and
//! `sigma^2 = sum p(z) (log p(z))^2 - mu^2`. Both sums are taken in one pass.
//! Entries equal to `-inf` are probability-zero outcomes and contribute
//! nothing (`0 * log 0 = 0`).

use crate::error::{Error, Result};

/// Allowed deviation of `sum exp(logp)` from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mu: f64,
    pub sigma: f64,
}

/// Computes `(mu, sigma)` from a normalized log-probability vector.
pub fn categorical_moments(logp: &[f64]) -> Result<Moments> {
    if logp.len() < 2 {
        return Err(Error::EmptyVocabulary(logp.len()));
    }
    let mut mass = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &l in logp {
        if l == f64::NEG_INFINITY {
            continue;
        }
        let p = l.exp();
        mass += p;
        first += p * l;
        second += p * l * l;
        lo = lo.min(l);
        hi = hi.max(l);
    }
    let normalized = (mass - 1.0).abs() <= NORMALIZATION_TOLERANCE;
    if !normalized {
        return Err(Error::Normalization {
            sum: mass,
            tolerance: NORMALIZATION_TOLERANCE,
        });
    }
    // A support with a single log-probability value has no spread; the two
    // sums only agree up to rounding there.
    let sigma = if lo == hi {
        0.0
    } else {
        (second - first * first).max(0.0).sqrt()
    };
    Ok(Moments { mu: first, sigma })
}

/// Numerically stable log-softmax.
pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![f64::NEG_INFINITY; logits.len()];
    }
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&x| x - lse).collect()
}

/// Moments of `softmax(logits + shift)`. Equal to the unshifted moments for
/// every `shift`.
pub fn shift_logits_then_moments(logits: &[f64], shift: f64) -> Result<Moments> {
    let shifted: Vec<f64> = logits.iter().map(|&x| x + shift).collect();
    categorical_moments(&log_softmax(&shifted))
}
