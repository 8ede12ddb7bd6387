//! Sentence-level detectors.
//!
//! Every detector returns a [`ScoredExample`] whose score is oriented so
//! that higher means "more likely a member". Loss is therefore the negated
//! mean NLL, and the reference-calibrated baselines report
//! `reference_nll - target_nll`.

use std::io::Write;

use flate2::write::ZlibEncoder;
use flate2::Compression;
use rayon::prelude::*;

use crate::aggregation::{min_k_mean, min_k_selection};
use crate::error::{Error, Result};
use crate::token_scores::{mink_token, minkpp_token};
use crate::types::{
    DetectorConfig, Method, Mode, RefCombine, ReferenceStats, ScoredExample, SequenceRecord,
    Variant,
};

/// zlib compression level used by the zlib detector.
pub const ZLIB_LEVEL: u32 = 6;

fn finish(record: &SequenceRecord, score: f64) -> Result<ScoredExample> {
    if !score.is_finite() {
        return Err(Error::NonFiniteScore {
            id: record.id.clone(),
        });
    }
    Ok(ScoredExample::new(record.id.clone(), record.label, score))
}

fn non_empty(record: &SequenceRecord) -> Result<()> {
    if record.positions.is_empty() {
        return Err(Error::InvalidRecord {
            id: record.id.clone(),
            reason: "no scored positions".into(),
        });
    }
    Ok(())
}

/// Byte length of `bytes` after zlib compression at [`ZLIB_LEVEL`].
pub fn zlib_compressed_len(bytes: &[u8]) -> usize {
    let mut enc = ZlibEncoder::new(Vec::new(), Compression::new(ZLIB_LEVEL));
    enc.write_all(bytes).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail").len()
}

/// Negated mean NLL.
pub fn score_loss(record: &SequenceRecord) -> Result<ScoredExample> {
    non_empty(record)?;
    finish(record, -record.mean_nll())
}

/// Negated mean NLL divided by the zlib-compressed length of the text.
pub fn score_zlib(record: &SequenceRecord) -> Result<ScoredExample> {
    non_empty(record)?;
    let text = match &record.text_bytes {
        Some(t) if !t.is_empty() => t,
        _ => {
            return Err(Error::MissingText {
                id: record.id.clone(),
            })
        }
    };
    let compressed = zlib_compressed_len(text) as f64;
    finish(record, -record.mean_nll() / compressed)
}

fn reference<'a>(record: &'a SequenceRecord, name: &str) -> Result<&'a ReferenceStats> {
    record
        .references
        .get(name)
        .ok_or_else(|| Error::MissingReference {
            id: record.id.clone(),
            name: name.to_owned(),
        })
}

fn calibrate(reference_nll: f64, target_nll: f64, combine: RefCombine) -> f64 {
    match combine {
        RefCombine::Difference => reference_nll - target_nll,
        RefCombine::Ratio => reference_nll / target_nll,
    }
}

/// Target loss calibrated by the loss of a named reference pass.
pub fn score_ref(
    record: &SequenceRecord,
    reference_name: &str,
    combine: RefCombine,
) -> Result<ScoredExample> {
    non_empty(record)?;
    let reference_nll =
        reference(record, reference_name)?
            .mean_nll
            .ok_or_else(|| Error::MissingReference {
                id: record.id.clone(),
                name: format!("{reference_name}.mean_nll"),
            })?;
    finish(record, calibrate(reference_nll, record.mean_nll(), combine))
}

/// Same contract as [`score_ref`], reading the lowercased-input pass.
pub fn score_lowercase(
    record: &SequenceRecord,
    reference_name: &str,
    combine: RefCombine,
) -> Result<ScoredExample> {
    score_ref(record, reference_name, combine)
}

/// Target loss calibrated by the average loss of its neighbors.
pub fn score_neighbor(record: &SequenceRecord, reference_name: &str) -> Result<ScoredExample> {
    non_empty(record)?;
    let neighbors = reference(record, reference_name)?
        .neighbor_nlls
        .as_deref()
        .unwrap_or_default();
    if neighbors.is_empty() {
        return Err(Error::EmptyNeighbors {
            id: record.id.clone(),
            name: reference_name.to_owned(),
        });
    }
    let mean = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
    finish(record, mean - record.mean_nll())
}

/// Token scores of the record under Min-K% (`method = mink`) or Min-K%++.
/// Returns `None` for detectors that do not score token by token.
pub fn token_scores(record: &SequenceRecord, config: &DetectorConfig) -> Option<Vec<f64>> {
    match config.method {
        Method::Mink => Some(record.positions.iter().map(mink_token).collect()),
        Method::Minkpp => Some(
            record
                .positions
                .iter()
                .map(|ps| minkpp_token(ps, config.variant, config.sigma_floor))
                .collect(),
        ),
        _ => None,
    }
}

/// Mean of the k% lowest target log-probabilities.
pub fn score_mink(record: &SequenceRecord, k_percent: f64) -> Result<ScoredExample> {
    non_empty(record)?;
    let scores: Vec<f64> = record.positions.iter().map(mink_token).collect();
    finish(record, min_k_mean(&scores, k_percent)?)
}

/// Mean of the k% lowest calibrated token scores.
pub fn score_minkpp(
    record: &SequenceRecord,
    k_percent: f64,
    variant: Variant,
    sigma_floor: f64,
) -> Result<ScoredExample> {
    non_empty(record)?;
    if !(sigma_floor > 0.0 && sigma_floor.is_finite()) {
        return Err(Error::InvalidSigmaFloor(sigma_floor));
    }
    let scores: Vec<f64> = record
        .positions
        .iter()
        .map(|ps| minkpp_token(ps, variant, sigma_floor))
        .collect();
    finish(record, min_k_mean(&scores, k_percent)?)
}

/// Scores one record with the configured detector.
pub fn score_record(record: &SequenceRecord, config: &DetectorConfig) -> Result<ScoredExample> {
    let reference_name = || config.reference_key().unwrap_or("ref");
    match config.method {
        Method::Loss => score_loss(record),
        Method::Zlib => score_zlib(record),
        Method::Ref => score_ref(record, reference_name(), config.ref_combine),
        Method::Lowercase => score_lowercase(record, reference_name(), config.ref_combine),
        Method::Neighbor => score_neighbor(record, reference_name()),
        Method::Mink => score_mink(record, config.k_percent),
        Method::Minkpp => {
            score_minkpp(record, config.k_percent, config.variant, config.sigma_floor)
        }
    }
}

/// Positions selected by the min-k aggregation (all positions for Loss).
pub fn selected_positions(record: &SequenceRecord, config: &DetectorConfig) -> Result<Vec<usize>> {
    match config.method {
        Method::Mink | Method::Minkpp => {
            let scores = token_scores(record, config).unwrap_or_default();
            min_k_selection(&scores, config.k_percent)
        }
        _ => Ok((0..record.positions.len()).collect()),
    }
}

/// Output of [`score_dataset`].
#[derive(Clone, Debug, Default)]
pub struct DatasetScores {
    /// One entry per scored record, in input order.
    pub scored: Vec<ScoredExample>,
    /// Records skipped in lenient mode, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Scores every record. Order is preserved regardless of scheduling.
///
/// In strict mode the first failing record (in input order) aborts; in
/// lenient mode failing records are skipped and listed in `skipped`.
pub fn score_dataset(
    records: &[SequenceRecord],
    config: &DetectorConfig,
    mode: Mode,
) -> Result<DatasetScores> {
    config.check()?;
    let results: Vec<Result<ScoredExample>> = records
        .par_iter()
        .map(|r| score_record(r, config))
        .collect();
    let mut out = DatasetScores::default();
    for (record, result) in records.iter().zip(results) {
        match result {
            Ok(s) => out.scored.push(s),
            Err(e) => match mode {
                Mode::Strict => return Err(e),
                Mode::Lenient => {
                    log::warn!("skipping record `{}`: {e}", record.id);
                    out.skipped.push((record.id.clone(), e.to_string()));
                }
            },
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::categorical_moments;
    use crate::types::{Label, PositionStats};

    const LN2: f64 = std::f64::consts::LN_2;

    fn from_logp(logp: &[f64]) -> SequenceRecord {
        let positions = logp
            .iter()
            .map(|&l| PositionStats::new(l, l, 0.0))
            .collect();
        SequenceRecord::new("r", Label::Member, positions)
    }

    fn with_nll(nll: f64) -> SequenceRecord {
        from_logp(&[-nll, -nll])
    }

    #[test]
    fn loss_is_negated_mean_nll() {
        assert_eq!(score_loss(&from_logp(&[-1.0; 3])).unwrap().score, -1.0);
        let s = score_loss(&from_logp(&[-LN2, -2.0 * LN2])).unwrap().score;
        assert!((s + 1.5 * LN2).abs() < 1e-12);
    }

    #[test]
    fn zlib_divides_by_compressed_length() {
        let text = b"the quick brown fox jumps over the lazy dog".to_vec();
        let c = zlib_compressed_len(&text) as f64;
        let r = with_nll(2.0).with_text(text.clone());
        let s = score_zlib(&r).unwrap().score;
        assert!((s + 2.0 / c).abs() < 1e-15);
        // Fixed settings make the score reproducible.
        assert_eq!(s, score_zlib(&r).unwrap().score);
        assert_eq!(zlib_compressed_len(&text), zlib_compressed_len(&text));
    }

    #[test]
    fn zlib_penalizes_incompressible_text_less() {
        let repetitive = b"abababababababababababababababababababababababababababab".to_vec();
        let noisy = b"q8#Lz!v0Pm@3Rk&w9Xn$e5Tb^y2Hj*u7Gc(i4Fd)o1Sa_p6Ql+r3Zx=t".to_vec();
        assert_eq!(repetitive.len(), noisy.len());
        let a = score_zlib(&with_nll(2.0).with_text(repetitive))
            .unwrap()
            .score;
        let b = score_zlib(&with_nll(2.0).with_text(noisy)).unwrap().score;
        assert!(a < b);
    }

    #[test]
    fn zlib_length_for_example_arithmetic() {
        // -NLL / C with NLL = 2 and C = 100
        assert!((-2.0f64 / 100.0 + 0.02).abs() < 1e-15);
    }

    #[test]
    fn zlib_requires_text() {
        assert!(matches!(
            score_zlib(&with_nll(1.0)),
            Err(Error::MissingText { .. })
        ));
        let empty = with_nll(1.0).with_text(Vec::new());
        assert!(matches!(score_zlib(&empty), Err(Error::MissingText { .. })));
    }

    #[test]
    fn ref_is_reference_minus_target() {
        let r = with_nll(2.0).with_reference("ref", ReferenceStats::mean_nll(2.5));
        let s = score_ref(&r, "ref", RefCombine::Difference).unwrap().score;
        assert!((s - 0.5).abs() < 1e-15);
        let r = with_nll(2.0).with_reference("ref", ReferenceStats::mean_nll(2.0));
        assert_eq!(
            score_ref(&r, "ref", RefCombine::Difference).unwrap().score,
            0.0
        );
        let s = score_ref(&r, "ref", RefCombine::Ratio).unwrap().score;
        assert_eq!(s, 1.0);
    }

    #[test]
    fn lowercase_mirrors_ref() {
        let r = with_nll(2.0).with_reference("lowercase", ReferenceStats::mean_nll(2.5));
        let s = score_lowercase(&r, "lowercase", RefCombine::Difference)
            .unwrap()
            .score;
        assert!((s - 0.5).abs() < 1e-15);
        let r = with_nll(2.0).with_reference("lowercase", ReferenceStats::mean_nll(2.0));
        assert_eq!(
            score_lowercase(&r, "lowercase", RefCombine::Difference)
                .unwrap()
                .score,
            0.0
        );
    }

    #[test]
    fn missing_reference() {
        let r = with_nll(2.0);
        assert!(matches!(
            score_ref(&r, "ref", RefCombine::Difference),
            Err(Error::MissingReference { .. })
        ));
        let r = with_nll(2.0).with_reference("ref", ReferenceStats::neighbors(vec![1.0]));
        assert!(matches!(
            score_ref(&r, "ref", RefCombine::Difference),
            Err(Error::MissingReference { .. })
        ));
        assert!(matches!(
            score_neighbor(&with_nll(1.0), "neighbors"),
            Err(Error::MissingReference { .. })
        ));
    }

    #[test]
    fn ratio_with_zero_loss_is_rejected() {
        let r = with_nll(0.0).with_reference("ref", ReferenceStats::mean_nll(1.0));
        assert!(matches!(
            score_ref(&r, "ref", RefCombine::Ratio),
            Err(Error::NonFiniteScore { .. })
        ));
    }

    #[test]
    fn neighbor_average() {
        let r = with_nll(2.0)
            .with_reference("neighbors", ReferenceStats::neighbors(vec![2.0, 2.2, 2.4]));
        let s = score_neighbor(&r, "neighbors").unwrap().score;
        assert!((s - 0.2).abs() < 1e-12);
        let r = with_nll(2.0).with_reference("neighbors", ReferenceStats::neighbors(vec![2.0]));
        assert_eq!(score_neighbor(&r, "neighbors").unwrap().score, 0.0);
        let r = with_nll(2.0).with_reference("neighbors", ReferenceStats::neighbors(vec![]));
        assert!(matches!(
            score_neighbor(&r, "neighbors"),
            Err(Error::EmptyNeighbors { .. })
        ));
        let r = with_nll(2.0).with_reference("neighbors", ReferenceStats::mean_nll(2.0));
        assert!(matches!(
            score_neighbor(&r, "neighbors"),
            Err(Error::EmptyNeighbors { .. })
        ));
    }

    #[test]
    fn mink_examples() {
        let r = from_logp(&[-0.3, -2.0, -1.1, -0.7, -0.05]);
        assert_eq!(
            score_mink(&r, 100.0).unwrap().score,
            score_loss(&r).unwrap().score
        );
        let r = from_logp(&[-3.0, -1.0, -1.0, -1.0]);
        assert_eq!(score_mink(&r, 25.0).unwrap().score, -3.0);
    }

    fn hqq_record(n: usize) -> SequenceRecord {
        let logp: Vec<f64> = [0.5f64, 0.25, 0.25].iter().map(|p| p.ln()).collect();
        let m = categorical_moments(&logp).unwrap();
        let ps = PositionStats::new(logp[0], m.mu, m.sigma);
        SequenceRecord::new("hqq", Label::Member, vec![ps; n])
    }

    #[test]
    fn minkpp_examples() {
        let l = 0.25f64.ln();
        let m = categorical_moments(&[l; 4]).unwrap();
        let uniform = SequenceRecord::new(
            "u",
            Label::Nonmember,
            vec![PositionStats::new(l, m.mu, m.sigma); 5],
        );
        let modes = hqq_record(3);
        for k in [10.0, 20.0, 50.0, 100.0] {
            assert_eq!(
                score_minkpp(&uniform, k, Variant::Full, 1e-6)
                    .unwrap()
                    .score,
                0.0
            );
            let s = score_minkpp(&modes, k, Variant::Full, 1e-6).unwrap().score;
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dataset_scoring_preserves_order() {
        let recs: Vec<_> = (0..4)
            .map(|i| {
                let mut r = hqq_record(3 + i);
                r.id = format!("r{i}");
                r
            })
            .collect();
        let out = score_dataset(
            &recs,
            &DetectorConfig::minkpp(20.0, Variant::Full),
            Mode::Strict,
        )
        .unwrap();
        let ids: Vec<_> = out.scored.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["r0", "r1", "r2", "r3"]);
    }

    #[test]
    fn dataset_zlib_strict_and_lenient() {
        let recs = vec![
            with_nll(1.0).with_text("alpha"),
            {
                let mut r = with_nll(1.0);
                r.id = "no-text".into();
                r
            },
            with_nll(1.5).with_text("beta"),
        ];
        let cfg = DetectorConfig::new(Method::Zlib);
        let err = score_dataset(&recs, &cfg, Mode::Strict).unwrap_err();
        assert!(err.to_string().contains("no-text"));
        let out = score_dataset(&recs, &cfg, Mode::Lenient).unwrap();
        assert_eq!(out.scored.len(), 2);
        assert_eq!(out.skipped.len(), 1);
        assert_eq!(out.skipped[0].0, "no-text");
    }

    #[test]
    fn empty_record_is_rejected() {
        let r = SequenceRecord::new("e", Label::Member, vec![]);
        assert!(score_loss(&r).is_err());
        assert!(score_mink(&r, 20.0).is_err());
    }
}
