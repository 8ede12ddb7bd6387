//! Chunked ("detect while generating") scoring.
//!
//! A record's positions are tiled with non-overlapping windows and every
//! window is scored on its own positions. The per-position statistics are
//! never recomputed, so each window still conditions on the full preceding
//! context.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::min_k_selection;
use crate::error::{Error, Result};
use crate::token_scores::{mink_token, minkpp_token};
use crate::types::{
    DecisionRule, DetectorConfig, Label, Method, PositionStats, ScoredExample, SequenceRecord,
};

pub const DEFAULT_WINDOW: usize = 32;

/// Verdict for one window of a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowVerdict {
    pub record_id: String,
    pub window_index: usize,
    /// First position of the window.
    pub start: usize,
    /// One past the last position of the window.
    pub end: usize,
    pub score: f64,
    pub decision: u8,
    /// Positions (record-absolute) that entered the aggregate.
    pub selected_positions: Vec<usize>,
}

/// `[start, end)` ranges tiling `len` positions with windows of `window`.
pub fn windows(len: usize, window: usize) -> Vec<(usize, usize)> {
    (0..len)
        .step_by(window.max(1))
        .map(|s| (s, (s + window).min(len)))
        .collect()
}

fn window_score(slice: &[PositionStats], config: &DetectorConfig) -> Result<(f64, Vec<usize>)> {
    let scores: Vec<f64> = match config.method {
        Method::Loss => {
            let nll = -slice.iter().map(mink_token).sum::<f64>() / slice.len() as f64;
            return Ok((-nll, (0..slice.len()).collect()));
        }
        Method::Mink => slice.iter().map(mink_token).collect(),
        Method::Minkpp => slice
            .iter()
            .map(|ps| minkpp_token(ps, config.variant, config.sigma_floor))
            .collect(),
        other => return Err(Error::UnsupportedOnlineMethod(other)),
    };
    let selected = min_k_selection(&scores, config.k_percent)?;
    let mean = selected.iter().map(|&i| scores[i]).sum::<f64>() / selected.len() as f64;
    Ok((mean, selected))
}

/// Scores each window of `record` and applies `rule`.
///
/// Only detectors that work from per-position statistics alone (loss, mink,
/// minkpp) can run per window.
pub fn online_scan(
    record: &SequenceRecord,
    window: usize,
    config: &DetectorConfig,
    rule: DecisionRule,
) -> Result<Vec<WindowVerdict>> {
    if window == 0 {
        return Err(Error::InvalidWindow);
    }
    if !matches!(config.method, Method::Loss | Method::Mink | Method::Minkpp) {
        return Err(Error::UnsupportedOnlineMethod(config.method));
    }
    config.check()?;
    windows(record.positions.len(), window)
        .into_iter()
        .enumerate()
        .map(|(window_index, (start, end))| {
            let (score, selected) = window_score(&record.positions[start..end], config)?;
            if !score.is_finite() {
                return Err(Error::NonFiniteScore {
                    id: record.id.clone(),
                });
            }
            Ok(WindowVerdict {
                record_id: record.id.clone(),
                window_index,
                start,
                end,
                score,
                decision: u8::from(score >= rule.threshold),
                selected_positions: selected.into_iter().map(|i| i + start).collect(),
            })
        })
        .collect()
}

/// A nonmember prefix followed by a member suffix.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineSample {
    pub record: SequenceRecord,
    /// Index of the first member position.
    pub splice: usize,
    pub nonmember_id: String,
    pub member_id: String,
}

/// Default share of a window's positions that must lie after the splice
/// for the window to count as member.
pub const DEFAULT_MEMBER_SHARE: f64 = 0.5;

impl OnlineSample {
    /// Ground-truth label of each window: member iff at least
    /// `member_share` of its positions come after the splice.
    pub fn window_labels(&self, window: usize, member_share: f64) -> Vec<Label> {
        windows(self.record.positions.len(), window)
            .into_iter()
            .map(|(s, e)| {
                let after = e.saturating_sub(s.max(self.splice));
                if after as f64 >= member_share * (e - s) as f64 {
                    Label::Member
                } else {
                    Label::Nonmember
                }
            })
            .collect()
    }
}

/// Builds nonmember-then-member concatenations.
///
/// For every member record (in order) a nonmember is drawn from the pool,
/// and both parts get a length drawn from `lengths`. Part lengths count
/// scored positions. When both records carry text, the spliced record's
/// text is the nonmember's first `pre + 1` bytes followed by the member's
/// bytes `1..=suf`, so a byte-level model rescoring it yields the same
/// number of positions with the same splice index, now conditioned on the
/// full spliced context.
pub fn build_online_dataset(
    members: &[SequenceRecord],
    nonmembers: &[SequenceRecord],
    lengths: &[usize],
    seed: u64,
) -> Result<Vec<OnlineSample>> {
    if members.is_empty() || nonmembers.is_empty() {
        return Err(Error::InsufficientPool(
            "member and nonmember pools must be non-empty".into(),
        ));
    }
    if lengths.is_empty() || lengths.contains(&0) {
        return Err(Error::InsufficientPool(
            "lengths must be non-empty and positive".into(),
        ));
    }
    let max_len = *lengths.iter().max().unwrap();
    let short = members
        .iter()
        .chain(nonmembers)
        .find(|r| r.positions.len() < max_len);
    if let Some(r) = short {
        return Err(Error::InsufficientPool(format!(
            "record `{}` has {} positions, need {max_len}",
            r.id,
            r.positions.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    members
        .iter()
        .map(|member| {
            let nonmember = nonmembers.choose(&mut rng).expect("pool is non-empty");
            let pre = *lengths.choose(&mut rng).expect("lengths non-empty");
            let suf = *lengths.choose(&mut rng).expect("lengths non-empty");
            let mut positions = nonmember.positions[..pre].to_vec();
            positions.extend_from_slice(&member.positions[..suf]);
            let mut record = SequenceRecord::new(
                format!("{}+{}", nonmember.id, member.id),
                Label::Unknown,
                positions,
            );
            if let (Some(a), Some(b)) = (&nonmember.text_bytes, &member.text_bytes) {
                if a.len() > pre && b.len() > suf {
                    let mut text = a[..=pre].to_vec();
                    text.extend_from_slice(&b[1..=suf]);
                    record.text_bytes = Some(text);
                }
            }
            Ok(OnlineSample {
                record,
                splice: pre,
                nonmember_id: nonmember.id.clone(),
                member_id: member.id.clone(),
            })
        })
        .collect()
}

/// Scans every sample and pairs each window score with its ground-truth
/// label, ready for [`crate::evaluation::auroc`].
pub fn chunk_scores(
    samples: &[OnlineSample],
    window: usize,
    config: &DetectorConfig,
    member_share: f64,
) -> Result<Vec<ScoredExample>> {
    let rule = DecisionRule::new(0.0);
    let mut out = Vec::new();
    for sample in samples {
        let verdicts = online_scan(&sample.record, window, config, rule)?;
        let labels = sample.window_labels(window, member_share);
        for (v, label) in verdicts.into_iter().zip(labels) {
            out.push(ScoredExample::new(
                format!("{}#{}", v.record_id, v.window_index),
                label,
                v.score,
            ));
        }
    }
    Ok(out)
}
