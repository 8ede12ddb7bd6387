//! Why Min-K%++ normalizes: the same target probability can sit at the peak
//! of one distribution and in the tail of another.
//!
//! cargo run --example calibration

use minkpp::moments::{categorical_moments, log_softmax};
use minkpp::token_scores::{mink_token, minkpp_token};
use minkpp::{PositionStats, Variant};

fn show(name: &str, probs: &[f64], target: usize) -> minkpp::Result<()> {
    let logp: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
    let m = categorical_moments(&logp)?;
    let ps = PositionStats::new(logp[target], m.mu, m.sigma);
    println!(
        "{name:<28} p(target)={:.2}  mu={:+.4} sigma={:.4}  min-k={:+.4}  min-k++={:+.4}",
        probs[target],
        m.mu,
        m.sigma,
        mink_token(&ps),
        minkpp_token(&ps, Variant::Full, 1e-6)
    );
    Ok(())
}

fn main() -> minkpp::Result<()> {
    show(
        "peak among nine",
        &[0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
        0,
    )?;
    show("tail next to a 0.6 mode", &[0.2, 0.6, 0.2], 0)?;
    show("mode of (1/2, 1/4, 1/4)", &[0.5, 0.25, 0.25], 0)?;
    show("non-mode of (1/2, 1/4, 1/4)", &[0.5, 0.25, 0.25], 1)?;

    // Moments only depend on the distribution, so shifting logits changes nothing.
    let logits = [2.0, -1.0, 0.5, 3.0];
    let a = categorical_moments(&log_softmax(&logits))?;
    let shifted: Vec<f64> = logits.iter().map(|x| x + 250.0).collect();
    let b = categorical_moments(&log_softmax(&shifted))?;
    println!(
        "logit shift by 250: mu {:+.12} -> {:+.12}, sigma {:.12} -> {:.12}",
        a.mu, b.mu, a.sigma, b.sigma
    );
    Ok(())
}
