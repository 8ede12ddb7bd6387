//! Sentence-level aggregation: the mean of the k% smallest token scores.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Number of tokens averaged for `len` scores at `k_percent`:
/// `max(1, floor(len * k / 100))`.
pub fn selection_size(len: usize, k_percent: f64) -> usize {
    let m = (k_percent * len as f64 / 100.0).floor() as usize;
    m.clamp(1, len.max(1))
}

fn check_k(k_percent: f64) -> Result<()> {
    if k_percent > 0.0 && k_percent <= 100.0 {
        Ok(())
    } else {
        Err(Error::InvalidK(k_percent))
    }
}

fn ascending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[a].total_cmp(&scores[b]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

/// Indices of the k% smallest scores, smallest first. Ties go to the lower index.
pub fn min_k_selection(scores: &[f64], k_percent: f64) -> Result<Vec<usize>> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    check_k(k_percent)?;
    let mut order = ascending(scores);
    order.truncate(selection_size(scores.len(), k_percent));
    Ok(order)
}

/// Mean of the k% smallest scores.
pub fn min_k_mean(scores: &[f64], k_percent: f64) -> Result<f64> {
    let picked = min_k_selection(scores, k_percent)?;
    let sum: f64 = picked.iter().map(|&i| scores[i]).sum();
    Ok(sum / picked.len() as f64)
}

/// Scores every record at every `k` in `k_grid`. Row `i`, column `j` holds
/// `min_k_mean(records[i], k_grid[j])`.
pub fn sweep_k<S: AsRef<[f64]>>(records: &[S], k_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    for &k in k_grid {
        check_k(k)?;
    }
    records
        .iter()
        .map(|scores| {
            let scores = scores.as_ref();
            if scores.is_empty() {
                return Err(Error::EmptyScores);
            }
            // One sort serves every column.
            let order = ascending(scores);
            let mut prefix = Vec::with_capacity(order.len());
            let mut acc = 0.0;
            for &i in &order {
                acc += scores[i];
                prefix.push(acc);
            }
            Ok(k_grid
                .iter()
                .map(|&k| {
                    let m = selection_size(scores.len(), k);
                    prefix[m - 1] / m as f64
                })
                .collect())
        })
        .collect()
}
