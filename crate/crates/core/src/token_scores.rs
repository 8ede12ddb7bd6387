//! Per-position scores.
//!
//! The Min-K%++ token score standardizes the target log-probability against
//! the model's own next-token distribution:
//! `(log p(x_t | x_<t) - mu) / sigma`. A token that is a mode of its
//! conditional distribution scores at or above zero.
//!
//! Two distributions can give the observed token the same probability while
//! disagreeing on whether it is a likely continuation:
//!
//! ```
//! use minkpp::moments::categorical_moments;
//! use minkpp::token_scores::minkpp_token;
//! use minkpp::{PositionStats, Variant};
//!
//! fn stats(probs: &[f64], target: usize) -> PositionStats {
//!     let logp: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
//!     let m = categorical_moments(&logp).unwrap();
//!     PositionStats::new(logp[target], m.mu, m.sigma)
//! }
//!
//! // The target (p = 0.2) is the peak of the distribution.
//! let mut peaked = vec![0.1; 8];
//! peaked.insert(0, 0.2);
//! // Same target probability, but the mass sits on another token.
//! let elsewhere = [0.2, 0.6, 0.2];
//!
//! let a = minkpp_token(&stats(&peaked, 0), Variant::Full, 1e-6);
//! let b = minkpp_token(&stats(&elsewhere, 0), Variant::Full, 1e-6);
//! assert!(a > 0.0);
//! assert!(b < 0.0);
//! // Min-K% only sees the probability itself and cannot tell them apart.
//! assert_eq!(stats(&peaked, 0).logp_target, stats(&elsewhere, 0).logp_target);
//! ```

use crate::types::{PositionStats, Variant};

/// Calibrated token score for one position.
///
/// `sigma` is floored at `sigma_floor`, so the division is always defined.
#[inline]
pub fn minkpp_token(ps: &PositionStats, variant: Variant, sigma_floor: f64) -> f64 {
    let sigma = ps.sigma.max(sigma_floor);
    match variant {
        Variant::Raw => ps.logp_target,
        Variant::SubMu => ps.logp_target - ps.mu,
        Variant::DivSigma => ps.logp_target / sigma,
        Variant::Full => (ps.logp_target - ps.mu) / sigma,
    }
}

/// Min-K% token score: the target log-probability itself.
#[inline]
pub fn mink_token(ps: &PositionStats) -> f64 {
    ps.logp_target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::categorical_moments;

    const LN2: f64 = std::f64::consts::LN_2;
    const FLOOR: f64 = 1e-6;

    fn hqq(target: usize) -> PositionStats {
        let logp: Vec<f64> = [0.5f64, 0.25, 0.25].iter().map(|p| p.ln()).collect();
        let m = categorical_moments(&logp).unwrap();
        PositionStats::new(logp[target], m.mu, m.sigma)
    }

    #[test]
    fn mode_scores_plus_one() {
        assert!((minkpp_token(&hqq(0), Variant::Full, FLOOR) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_mode_scores_minus_one() {
        for t in [1, 2] {
            assert!((minkpp_token(&hqq(t), Variant::Full, FLOOR) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_scores_zero() {
        let l = 0.25f64.ln();
        let m = categorical_moments(&[l; 4]).unwrap();
        let ps = PositionStats::new(l, m.mu, m.sigma);
        assert_eq!(minkpp_token(&ps, Variant::Full, FLOOR), 0.0);
    }

    #[test]
    fn variants() {
        let ps = PositionStats::new(-2.0, -1.5, 0.25);
        assert_eq!(minkpp_token(&ps, Variant::Raw, FLOOR), -2.0);
        assert_eq!(minkpp_token(&ps, Variant::SubMu, FLOOR), -0.5);
        assert_eq!(minkpp_token(&ps, Variant::DivSigma, FLOOR), -8.0);
        assert_eq!(minkpp_token(&ps, Variant::Full, FLOOR), -2.0);
    }

    #[test]
    fn floor_applies_to_degenerate_sigma() {
        let ps = PositionStats::new(-1.0, -1.0 - 1e-7, 0.0);
        let s = minkpp_token(&ps, Variant::Full, FLOOR);
        assert!((s - 0.1).abs() < 1e-9);
        assert!(minkpp_token(&ps, Variant::DivSigma, FLOOR).is_finite());
    }

    #[test]
    fn mink_is_identity() {
        let ps = PositionStats::new(-0.8125, -1.0, 0.5);
        assert_eq!(mink_token(&ps), -0.8125);
        assert!((mink_token(&hqq(0)) + LN2).abs() < 1e-15);
        let l = 0.25f64.ln();
        assert!((mink_token(&PositionStats::new(l, l, 0.0)) + 4f64.ln()).abs() < 1e-15);
    }
}
