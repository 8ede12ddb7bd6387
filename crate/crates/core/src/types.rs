//! Domain types shared by every detector.
//!
//! All log-probabilities are natural logs. A `T`-token input produces
//! `T - 1` scored positions: the first token has no prefix and is never
//! scored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::moments::categorical_moments;

/// Tolerance used when a position carries its full log-probability vector.
pub const VECTOR_TOLERANCE: f64 = 1e-6;

/// Statistics of one scored token position.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionStats {
    /// `log p(x_t | x_<t)` of the observed token.
    pub logp_target: f64,
    /// Expected log-probability under the predicted distribution (negative entropy).
    pub mu: f64,
    /// Standard deviation of the log-probability under the predicted distribution.
    pub sigma: f64,
    /// Full log-probability vector, when the producer emitted it.
    pub logp_vector: Option<Vec<f64>>,
}

impl PositionStats {
    pub fn new(logp_target: f64, mu: f64, sigma: f64) -> Self {
        Self {
            logp_target,
            mu,
            sigma,
            logp_vector: None,
        }
    }

    pub fn with_vector(mut self, logp_vector: Vec<f64>) -> Self {
        self.logp_vector = Some(logp_vector);
        self
    }
}

/// Membership label of a record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Member,
    Nonmember,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Member => "member",
            Label::Nonmember => "nonmember",
            Label::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "member" => Ok(Label::Member),
            "nonmember" => Ok(Label::Nonmember),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

/// Loss of a record under an auxiliary pass: a reference model, the
/// lowercased input, or a set of perturbed neighbors.
///
/// At least one of the two fields is present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceStats {
    /// Mean negative log-likelihood per token, nats.
    pub mean_nll: Option<f64>,
    /// Mean NLL of each neighbor, nats.
    pub neighbor_nlls: Option<Vec<f64>>,
}

impl ReferenceStats {
    pub fn mean_nll(mean_nll: f64) -> Self {
        Self {
            mean_nll: Some(mean_nll),
            neighbor_nlls: None,
        }
    }

    pub fn neighbors(neighbor_nlls: Vec<f64>) -> Self {
        Self {
            mean_nll: None,
            neighbor_nlls: Some(neighbor_nlls),
        }
    }
}

/// One text instance and everything the detectors need to score it.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRecord {
    pub id: String,
    pub label: Label,
    pub positions: Vec<PositionStats>,
    /// Raw UTF-8 text; only the zlib detector reads it.
    pub text_bytes: Option<Vec<u8>>,
    pub references: BTreeMap<String, ReferenceStats>,
}

impl SequenceRecord {
    pub fn new(id: impl Into<String>, label: Label, positions: Vec<PositionStats>) -> Self {
        Self {
            id: id.into(),
            label,
            positions,
            text_bytes: None,
            references: BTreeMap::new(),
        }
    }

    pub fn with_text(mut self, text: impl Into<Vec<u8>>) -> Self {
        self.text_bytes = Some(text.into());
        self
    }

    pub fn with_reference(mut self, name: impl Into<String>, stats: ReferenceStats) -> Self {
        self.references.insert(name.into(), stats);
        self
    }

    /// Number of scored positions.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Mean negative log-likelihood over the scored positions, nats/token.
    pub fn mean_nll(&self) -> f64 {
        let sum: f64 = self.positions.iter().map(|p| p.logp_target).sum();
        -sum / self.positions.len() as f64
    }
}

/// Detector family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Loss,
    Zlib,
    Ref,
    Lowercase,
    Neighbor,
    Mink,
    Minkpp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Loss,
        Method::Zlib,
        Method::Ref,
        Method::Lowercase,
        Method::Neighbor,
        Method::Mink,
        Method::Minkpp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Loss => "loss",
            Method::Zlib => "zlib",
            Method::Ref => "ref",
            Method::Lowercase => "lowercase",
            Method::Neighbor => "neighbor",
            Method::Mink => "mink",
            Method::Minkpp => "minkpp",
        }
    }

    /// Reference key read by `ref`, `lowercase` and `neighbor` when the
    /// config does not name one.
    pub fn default_reference(self) -> Option<&'static str> {
        match self {
            Method::Ref => Some("ref"),
            Method::Lowercase => Some("lowercase"),
            Method::Neighbor => Some("neighbors"),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Calibration applied to the target log-probability at each position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `log p`
    Raw,
    /// `log p - mu`
    SubMu,
    /// `log p / sigma`
    DivSigma,
    /// `(log p - mu) / sigma`
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Raw,
        Variant::SubMu,
        Variant::DivSigma,
        Variant::Full,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::SubMu => "sub_mu",
            Variant::DivSigma => "div_sigma",
            Variant::Full => "full",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

/// How the reference-calibrated detectors combine target and reference loss.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefCombine {
    /// `reference_nll - target_nll`
    #[default]
    Difference,
    /// `reference_nll / target_nll`
    Ratio,
}

/// Detector identifier and parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub method: Method,
    pub k_percent: f64,
    pub variant: Variant,
    pub sigma_floor: f64,
    pub reference_name: Option<String>,
    #[serde(default)]
    pub ref_combine: RefCombine,
}

pub const DEFAULT_K_PERCENT: f64 = 20.0;
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-6;

impl DetectorConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k_percent: DEFAULT_K_PERCENT,
            variant: Variant::Full,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            reference_name: method.default_reference().map(str::to_owned),
            ref_combine: RefCombine::Difference,
        }
    }

    pub fn loss() -> Self {
        Self::new(Method::Loss)
    }

    pub fn mink(k_percent: f64) -> Self {
        Self {
            k_percent,
            ..Self::new(Method::Mink)
        }
    }

    pub fn minkpp(k_percent: f64, variant: Variant) -> Self {
        Self {
            k_percent,
            variant,
            ..Self::new(Method::Minkpp)
        }
    }

    pub fn with_reference(mut self, name: impl Into<String>) -> Self {
        self.reference_name = Some(name.into());
        self
    }

    /// Reference key this detector reads, falling back to the method default.
    pub fn reference_key(&self) -> Option<&str> {
        self.reference_name
            .as_deref()
            .or_else(|| self.method.default_reference())
    }

    /// Checks the parameter ranges.
    pub fn check(&self) -> crate::Result<()> {
        if !(self.k_percent > 0.0 && self.k_percent <= 100.0) {
            return Err(crate::Error::InvalidK(self.k_percent));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(crate::Error::InvalidSigmaFloor(self.sigma_floor));
        }
        Ok(())
    }
}

/// Error policy for batch operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The first bad item aborts the batch.
    #[default]
    Strict,
    /// Bad items are skipped and reported.
    Lenient,
}

/// A record's score, oriented so that higher means more likely a member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub id: String,
    pub label: Label,
    pub score: f64,
}

impl ScoredExample {
    pub fn new(id: impl Into<String>, label: Label, score: f64) -> Self {
        Self {
            id: id.into(),
            label,
            score,
        }
    }
}

/// Threshold rule: predict member iff `score >= threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub threshold: f64,
}

impl DecisionRule {
    pub fn new(threshold: f64) -> Self {
        Self { threshold }
    }
}

/// One broken invariant found by [`validate_record`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Position index, when the violation is tied to one position.
    pub position: Option<usize>,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn record(field: &str, message: impl Into<String>) -> Self {
        Self {
            position: None,
            field: field.to_owned(),
            message: message.into(),
        }
    }

    fn at(position: usize, field: &str, message: impl Into<String>) -> Self {
        Self {
            position: Some(position),
            field: field.to_owned(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(f, "position {p}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// Lists every invariant the record breaks. An empty list means the record is valid.
pub fn validate_record(record: &SequenceRecord) -> Vec<Violation> {
    let mut out = Vec::new();
    if record.id.is_empty() {
        out.push(Violation::record("id", "must be non-empty"));
    }
    if record.positions.is_empty() {
        out.push(Violation::record(
            "positions",
            "need at least 1 scored position (inputs of at least 2 tokens)",
        ));
    }
    for (i, ps) in record.positions.iter().enumerate() {
        check_position(i, ps, &mut out);
    }
    for (name, r) in &record.references {
        let field = format!("references.{name}");
        if r.mean_nll.is_none() && r.neighbor_nlls.is_none() {
            out.push(Violation::record(&field, "needs mean_nll or neighbor_nlls"));
        }
        if let Some(m) = r.mean_nll {
            if !m.is_finite() {
                out.push(Violation::record(&field, "mean_nll is not finite"));
            }
        }
        if let Some(n) = &r.neighbor_nlls {
            if n.is_empty() {
                out.push(Violation::record(&field, "neighbor_nlls is empty"));
            } else if n.iter().any(|v| !v.is_finite()) {
                out.push(Violation::record(
                    &field,
                    "neighbor_nlls has non-finite entries",
                ));
            }
        }
    }
    out
}

fn check_position(i: usize, ps: &PositionStats, out: &mut Vec<Violation>) {
    for (field, v) in [("logp", ps.logp_target), ("mu", ps.mu), ("sigma", ps.sigma)] {
        if !v.is_finite() {
            out.push(Violation::at(i, field, format!("{v} is not finite")));
        }
    }
    if ps.logp_target > 0.0 {
        out.push(Violation::at(i, "logp", "log-probability > 0"));
    }
    if ps.mu > 0.0 {
        out.push(Violation::at(i, "mu", "mu > 0"));
    }
    if ps.sigma < 0.0 {
        out.push(Violation::at(i, "sigma", "sigma < 0"));
    }
    let Some(vector) = &ps.logp_vector else {
        return;
    };
    if vector.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        out.push(Violation::at(i, "logp_vectors", "contains NaN or +inf"));
        return;
    }
    match categorical_moments(vector) {
        Ok(m) => {
            if (m.mu - ps.mu).abs() > VECTOR_TOLERANCE {
                out.push(Violation::at(
                    i,
                    "mu",
                    format!("stored {} but vector gives {}", ps.mu, m.mu),
                ));
            }
            if (m.sigma - ps.sigma).abs() > VECTOR_TOLERANCE {
                out.push(Violation::at(
                    i,
                    "sigma",
                    format!("stored {} but vector gives {}", ps.sigma, m.sigma),
                ));
            }
        }
        Err(e) => out.push(Violation::at(
            i,
            "logp_vectors",
            format!("normalization: {e}"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(positions: Vec<PositionStats>) -> SequenceRecord {
        SequenceRecord::new("r0", Label::Member, positions)
    }

    #[test]
    fn well_formed_record_has_no_violations() {
        let r = record(vec![PositionStats::new(-0.5, -1.0, 0.3); 3]);
        assert!(validate_record(&r).is_empty());
    }

    #[test]
    fn negative_sigma_is_reported_with_position() {
        let mut ps = vec![PositionStats::new(-0.5, -1.0, 0.3); 3];
        ps[1].sigma = -0.1;
        let v = validate_record(&record(ps));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].position, Some(1));
        assert_eq!(v[0].field, "sigma");
    }

    #[test]
    fn unnormalized_vector_is_reported() {
        // 0.4 + 0.4 = 0.8
        let vector = vec![0.4f64.ln(), 0.4f64.ln()];
        let sum: f64 = vector.iter().map(|l| l.exp()).sum();
        assert!((sum - 0.8).abs() < 1e-12);
        let ps = PositionStats::new(0.4f64.ln(), 0.4f64.ln(), 0.0).with_vector(vector);
        let v = validate_record(&record(vec![ps]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "logp_vectors");
        assert!(v[0].message.contains("normalization"));
    }

    #[test]
    fn empty_id_and_positions_are_reported() {
        let r = SequenceRecord::new("", Label::Unknown, vec![]);
        let fields: Vec<_> = validate_record(&r).into_iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["id", "positions"]);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let r = record(vec![PositionStats::new(f64::NAN, f64::NEG_INFINITY, 0.1)]);
        let v = validate_record(&r);
        assert!(v.iter().any(|v| v.field == "logp"));
        assert!(v.iter().any(|v| v.field == "mu"));
    }

    #[test]
    fn mismatched_stored_moments_are_reported() {
        let half = 0.5f64.ln();
        let ps = PositionStats::new(half, -0.5, 0.0).with_vector(vec![half, half]);
        let v = validate_record(&record(vec![ps]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "mu");
    }

    #[test]
    fn reference_without_values_is_reported() {
        let r = record(vec![PositionStats::new(-0.5, -1.0, 0.3)])
            .with_reference("ref", ReferenceStats::default())
            .with_reference("neighbors", ReferenceStats::neighbors(vec![]));
        assert_eq!(validate_record(&r).len(), 2);
    }

    #[test]
    fn validation_is_pure() {
        let mut ps = vec![PositionStats::new(-0.5, -1.0, 0.3); 2];
        ps[0].sigma = -1.0;
        let r = record(ps);
        let before = r.clone();
        assert_eq!(validate_record(&r), validate_record(&r));
        assert_eq!(r, before);
    }

    #[test]
    fn config_range_checks() {
        assert!(DetectorConfig::mink(0.0).check().is_err());
        assert!(DetectorConfig::mink(100.0).check().is_ok());
        assert!(DetectorConfig::mink(100.5).check().is_err());
        let mut c = DetectorConfig::minkpp(20.0, Variant::Full);
        c.sigma_floor = 0.0;
        assert!(c.check().is_err());
    }

    #[test]
    fn names_parse_back() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert!("bogus".parse::<Label>().is_err());
    }
}
