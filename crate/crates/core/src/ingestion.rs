//! `mia-stats/v1` JSON Lines wire format.
//!
//! One record per line:
//!
//! ```text
//! {"schema":"mia-stats/v1","id":"doc-1","label":"member",
//!  "logp":[...],"mu":[...],"sigma":[...],
//!  "text":"...","logp_vectors":[[...],...],
//!  "refs":{"ref":{"mean_nll":2.1},"neighbors":{"neighbor_nlls":[2.3,2.4]}}}
//! ```
//!
//! `text`, `logp_vectors` and `refs` are optional. Numbers are written with
//! shortest round-trip formatting, so `parse(write(r)) == r` bit for bit.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::types::{validate_record, Label, Mode, PositionStats, ReferenceStats, SequenceRecord};

pub const SCHEMA: &str = "mia-stats/v1";

#[derive(Serialize, Deserialize)]
struct WireRecord {
    schema: String,
    id: String,
    label: String,
    logp: Vec<f64>,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    logp_vectors: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refs: Option<BTreeMap<String, WireRef>>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean_nll: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neighbor_nlls: Option<Vec<f64>>,
}

/// Problem found while parsing; `line` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    /// The line was rejected.
    Error,
    /// The line was accepted with fields ignored.
    Warning,
}

/// Result of [`parse_records`].
#[derive(Clone, Debug, Default)]
pub struct Parsed {
    pub records: Vec<SequenceRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedLine {
        line,
        reason: reason.into(),
    }
}

/// A parsed record and the names of its ignored top-level fields.
type LineResult = Result<(SequenceRecord, Vec<String>)>;

fn parse_line(line: usize, text: &str, mode: Mode) -> LineResult {
    let wire: WireRecord =
        serde_json::from_str(text).map_err(|e| malformed(line, e.to_string()))?;
    if wire.schema != SCHEMA {
        return Err(Error::SchemaVersionMismatch {
            line,
            found: wire.schema,
            expected: SCHEMA,
        });
    }
    let ignored: Vec<String> = wire.extra.keys().cloned().collect();
    if mode == Mode::Strict && !ignored.is_empty() {
        return Err(malformed(
            line,
            format!("unknown field(s): {}", ignored.join(", ")),
        ));
    }
    let label: Label = wire.label.parse().map_err(|e: String| malformed(line, e))?;
    let p = wire.logp.len();
    if wire.mu.len() != p || wire.sigma.len() != p {
        return Err(Error::LengthMismatch {
            line,
            logp: p,
            mu: wire.mu.len(),
            sigma: wire.sigma.len(),
        });
    }
    let mut vectors = match wire.logp_vectors {
        Some(v) if v.len() != p => {
            return Err(malformed(
                line,
                format!("logp_vectors has {} rows, expected {p}", v.len()),
            ))
        }
        Some(v) => v.into_iter().map(Some).collect(),
        None => vec![None; p],
    };
    let positions = (0..p)
        .map(|i| PositionStats {
            logp_target: wire.logp[i],
            mu: wire.mu[i],
            sigma: wire.sigma[i],
            logp_vector: vectors[i].take(),
        })
        .collect();
    let references = wire
        .refs
        .unwrap_or_default()
        .into_iter()
        .map(|(name, r)| {
            (
                name,
                ReferenceStats {
                    mean_nll: r.mean_nll,
                    neighbor_nlls: r.neighbor_nlls,
                },
            )
        })
        .collect();
    let record = SequenceRecord {
        id: wire.id,
        label,
        positions,
        text_bytes: wire.text.map(String::into_bytes),
        references,
    };
    let violations = validate_record(&record);
    if !violations.is_empty() {
        let reasons: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(malformed(
            line,
            format!("invalid record: {}", reasons.join("; ")),
        ));
    }
    Ok((record, ignored))
}

/// Reads `mia-stats/v1` records.
///
/// Strict mode stops at the first bad line. Lenient mode skips bad lines,
/// ignores unknown top-level fields, and reports both as diagnostics.
/// Empty lines are skipped. Records come back in file order.
pub fn parse_records<R: BufRead>(reader: R, mode: Mode) -> Result<Parsed> {
    let lines: Vec<(usize, String)> = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .collect::<std::io::Result<_>>()?;
    let results: Vec<(usize, LineResult)> = lines
        .par_iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| (*n, parse_line(*n, l, mode)))
        .collect();

    let mut out = Parsed::default();
    let mut seen = HashSet::new();
    for (line, result) in results {
        let result = result.and_then(|(rec, ignored)| {
            if seen.contains(&rec.id) {
                Err(malformed(line, format!("duplicate id `{}`", rec.id)))
            } else {
                Ok((rec, ignored))
            }
        });
        match result {
            Ok((rec, ignored)) => {
                if !ignored.is_empty() {
                    out.diagnostics.push(Diagnostic {
                        line,
                        severity: Severity::Warning,
                        message: format!("ignored unknown field(s): {}", ignored.join(", ")),
                    });
                }
                seen.insert(rec.id.clone());
                out.records.push(rec);
            }
            Err(e) if mode == Mode::Lenient => out.diagnostics.push(Diagnostic {
                line,
                severity: Severity::Error,
                message: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn to_wire(record: &SequenceRecord) -> Result<WireRecord> {
    let text = match &record.text_bytes {
        None => None,
        Some(b) => Some(
            String::from_utf8(b.clone()).map_err(|_| Error::InvalidRecord {
                id: record.id.clone(),
                reason: "text is not valid UTF-8".into(),
            })?,
        ),
    };
    let any_vectors = record.positions.iter().any(|p| p.logp_vector.is_some());
    let logp_vectors = if any_vectors {
        Some(
            record
                .positions
                .iter()
                .map(|p| {
                    p.logp_vector.clone().ok_or_else(|| Error::InvalidRecord {
                        id: record.id.clone(),
                        reason: "logp_vectors must be present on every position or none".into(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let refs = if record.references.is_empty() {
        None
    } else {
        Some(
            record
                .references
                .iter()
                .map(|(k, r)| {
                    (
                        k.clone(),
                        WireRef {
                            mean_nll: r.mean_nll,
                            neighbor_nlls: r.neighbor_nlls.clone(),
                        },
                    )
                })
                .collect(),
        )
    };
    Ok(WireRecord {
        schema: SCHEMA.to_owned(),
        id: record.id.clone(),
        label: record.label.as_str().to_owned(),
        logp: record.positions.iter().map(|p| p.logp_target).collect(),
        mu: record.positions.iter().map(|p| p.mu).collect(),
        sigma: record.positions.iter().map(|p| p.sigma).collect(),
        text,
        logp_vectors,
        refs,
        extra: Map::new(),
    })
}

/// Writes records, one per line, and returns the number of bytes written.
pub fn write_records<W: Write>(records: &[SequenceRecord], mut sink: W) -> Result<u64> {
    let mut written = 0u64;
    for record in records {
        let violations = validate_record(record);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidRecord {
                id: record.id.clone(),
                reason: v.to_string(),
            });
        }
        let mut line = serde_json::to_vec(&to_wire(record)?)?;
        line.push(b'\n');
        sink.write_all(&line)?;
        written += line.len() as u64;
    }
    sink.flush()?;
    Ok(written)
}
