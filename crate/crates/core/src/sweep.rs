//! Grid evaluation over `k` and, for Min-K%++, the calibration variant.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::sweep_k;
use crate::detectors::token_scores;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, TprAtFpr};
use crate::types::{DetectorConfig, Method, ScoredExample, SequenceRecord, Variant};

/// One grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    /// `None` for Min-K%, which has no variants.
    pub variant: Option<Variant>,
    pub k_percent: f64,
    pub auroc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
}

/// Evaluates every `(variant, k)` pair, variants outermost. Token scores are
/// computed once per variant and every `k` reuses a single sort.
///
/// For `Method::Mink` the variant list is ignored and one row per `k` is
/// produced. Other methods return [`Error::UnsupportedSweepMethod`].
pub fn sweep(
    records: &[SequenceRecord],
    method: Method,
    k_grid: &[f64],
    variants: &[Variant],
    sigma_floor: f64,
    fpr_targets: &[f64],
) -> Result<Vec<SweepRow>> {
    let variant_axis: Vec<Option<Variant>> = match method {
        Method::Mink => vec![None],
        Method::Minkpp => variants.iter().copied().map(Some).collect(),
        other => return Err(Error::UnsupportedSweepMethod(other)),
    };
    let mut rows = Vec::with_capacity(variant_axis.len() * k_grid.len());
    for variant in variant_axis {
        let mut config = DetectorConfig::new(method);
        config.sigma_floor = sigma_floor;
        if let Some(v) = variant {
            config.variant = v;
        }
        config.check()?;
        let per_record: Vec<Vec<f64>> = records
            .par_iter()
            .map(|r| token_scores(r, &config).unwrap_or_default())
            .collect();
        let by_record = sweep_k(&per_record, k_grid)?;
        for (ki, &k) in k_grid.iter().enumerate() {
            let scored: Vec<ScoredExample> = records
                .iter()
                .zip(&by_record)
                .map(|(r, s)| {
                    let score = s[ki];
                    if score.is_finite() {
                        Ok(ScoredExample::new(r.id.clone(), r.label, score))
                    } else {
                        Err(Error::NonFiniteScore { id: r.id.clone() })
                    }
                })
                .collect::<Result<_>>()?;
            let report = evaluate(&scored, fpr_targets, None)?;
            rows.push(SweepRow {
                method,
                variant,
                k_percent: k,
                auroc: report.auroc,
                tpr_at_fpr: report.tpr_at_fpr,
            });
        }
    }
    Ok(rows)
}

/// Writes rows as CSV: `method,variant,k_percent,auroc` followed by one
/// `tpr@<fpr>` column per FPR target of the first row.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    write!(out, "method,variant,k_percent,auroc")?;
    if let Some(first) = rows.first() {
        for t in &first.tpr_at_fpr {
            write!(out, ",tpr@{}", t.fpr)?;
        }
    }
    writeln!(out)?;
    for row in rows {
        let variant = row.variant.map_or("", Variant::as_str);
        write!(
            out,
            "{},{},{},{}",
            row.method, variant, row.k_percent, row.auroc
        )?;
        for t in &row.tpr_at_fpr {
            write!(out, ",{}", t.tpr)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
