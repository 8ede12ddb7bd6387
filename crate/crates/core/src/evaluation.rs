//! Threshold decisions and threshold-free metrics over scored examples.
//!
//! AUROC is computed through the Mann-Whitney statistic with midranks, so a
//! tied member/nonmember pair counts one half. The count is kept as an
//! integer (twice the U statistic) until the final division.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DecisionRule, DetectorConfig, Label, ScoredExample};

pub const REPORT_SCHEMA: &str = "mia-eval/v1";

/// How [`tpr_at_fpr`] picks its operating point.
pub const TPR_CONVENTION: &str =
    "max TPR over achievable thresholds with FPR <= target; no interpolation";

/// 1 (member) iff `score >= threshold`.
pub fn decide(example: &ScoredExample, rule: DecisionRule) -> u8 {
    u8::from(example.score >= rule.threshold)
}

/// Scores split by class; unknown labels are dropped.
struct Split {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

fn split(scored: &[ScoredExample]) -> Result<Split> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for s in scored {
        match s.label {
            Label::Member => pos.push(s.score),
            Label::Nonmember => neg.push(s.score),
            Label::Unknown => {}
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::DegenerateLabels {
            n_pos: pos.len(),
            n_neg: neg.len(),
        });
    }
    Ok(Split { pos, neg })
}

/// Twice the Mann-Whitney U statistic of members over nonmembers.
fn twice_u(pos: &[f64], neg: &[f64]) -> u128 {
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of 2 * midrank over members; ranks are 1-based.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let members = all[i..j].iter().filter(|e| e.1).count() as u128;
        twice_rank_sum += members * (i as u128 + 1 + j as u128);
        i = j;
    }
    let n_pos = pos.len() as u128;
    twice_rank_sum - n_pos * (n_pos + 1)
}

/// Probability that a random member outscores a random nonmember, ties counting 1/2.
pub fn auroc(scored: &[ScoredExample]) -> Result<f64> {
    let s = split(scored)?;
    let denom = 2 * s.pos.len() as u128 * s.neg.len() as u128;
    Ok(twice_u(&s.pos, &s.neg) as f64 / denom as f64)
}

/// A point on the ROC curve. `threshold` is `None` for the origin, which
/// corresponds to a threshold above every score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: Option<f64>,
}

/// ROC curve: the origin, then one point per distinct score in decreasing
/// order. The last point is always `(1, 1)`.
pub fn roc_curve(scored: &[ScoredExample]) -> Result<Vec<RocPoint>> {
    let s = split(scored)?;
    let (n_pos, n_neg) = (s.pos.len() as f64, s.neg.len() as f64);
    let mut all: Vec<(f64, bool)> = s
        .pos
        .iter()
        .map(|&x| (x, true))
        .chain(s.neg.iter().map(|&x| (x, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: None,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let value = all[i].0;
        while i < all.len() && all[i].0 == value {
            if all[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg,
            tpr: tp as f64 / n_pos,
            threshold: Some(value),
        });
    }
    Ok(points)
}

/// Trapezoidal area under a sequence of ROC points.
pub fn trapezoid(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

fn tpr_on_curve(points: &[RocPoint], fpr_target: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.fpr <= fpr_target)
        .map(|p| p.tpr)
        .fold(0.0, f64::max)
}

/// Best TPR reachable by a single threshold whose FPR stays within `fpr_target`.
pub fn tpr_at_fpr(scored: &[ScoredExample], fpr_target: f64) -> Result<f64> {
    Ok(tpr_on_curve(&roc_curve(scored)?, fpr_target))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TprAtFpr {
    pub fpr: f64,
    pub tpr: f64,
}

/// Metrics for one scored dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub tool_version: String,
    pub auroc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub tpr_convention: String,
    pub n_pos: usize,
    pub n_neg: usize,
    /// Examples labeled `unknown`, excluded from every metric.
    pub n_unknown: usize,
    pub config_echo: Option<DetectorConfig>,
    pub roc_points: Vec<RocPoint>,
}

/// Computes AUROC, TPR at each FPR target, and the ROC curve.
pub fn evaluate(
    scored: &[ScoredExample],
    fpr_targets: &[f64],
    config: Option<&DetectorConfig>,
) -> Result<EvalReport> {
    let roc_points = roc_curve(scored)?;
    let count = |l: Label| scored.iter().filter(|s| s.label == l).count();
    Ok(EvalReport {
        schema: REPORT_SCHEMA.to_owned(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        auroc: auroc(scored)?,
        tpr_at_fpr: fpr_targets
            .iter()
            .map(|&fpr| TprAtFpr {
                fpr,
                tpr: tpr_on_curve(&roc_points, fpr),
            })
            .collect(),
        tpr_convention: TPR_CONVENTION.to_owned(),
        n_pos: count(Label::Member),
        n_neg: count(Label::Nonmember),
        n_unknown: count(Label::Unknown),
        config_echo: config.cloned(),
        roc_points,
    })
}

/// Writes ROC points as CSV with header `fpr,tpr,threshold`. The origin's
/// threshold is written as `inf`.
pub fn write_roc_csv<W: Write>(points: &[RocPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "fpr,tpr,threshold")?;
    for p in points {
        match p.threshold {
            Some(t) => writeln!(out, "{},{},{}", p.fpr, p.tpr, t)?,
            None => writeln!(out, "{},{},inf", p.fpr, p.tpr)?,
        }
    }
    Ok(())
}
