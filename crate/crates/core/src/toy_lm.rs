//! A byte-level interpolated n-gram language model.
//!
//! Every conditional distribution is an interpolation of additively
//! smoothed maximum-likelihood estimates of orders `1..=n`:
//!
//! ```text
//! p(z | ctx) = sum_o w_o * (c_o(ctx_o, z) + alpha) / (c_o(ctx_o) + alpha * V)
//! ```
//!
//! where `ctx_o` is the last `o - 1` symbols. Each term is a proper
//! distribution, so the mixture is one too and every symbol keeps a
//! strictly positive probability. Near the start of a text, orders whose
//! context is not yet available are dropped and the remaining weights are
//! renormalized.
//!
//! The model gives exact full distributions, which makes it a convenient
//! target for checking detectors end to end.

use std::collections::HashMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::categorical_moments;
use crate::types::{Label, PositionStats, ReferenceStats, SequenceRecord};

pub const MODEL_FORMAT: &str = "minkpp-ngram/v1";
pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct NGramConfig {
    pub order: usize,
    pub alpha: f64,
    /// Interpolation weight of each order, lowest first. Uniform when `None`.
    pub weights: Option<Vec<f64>>,
}

impl Default for NGramConfig {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            alpha: DEFAULT_ALPHA,
            weights: None,
        }
    }
}

impl NGramConfig {
    pub fn new(order: usize, alpha: f64) -> Self {
        Self {
            order,
            alpha,
            weights: None,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    /// Dense counts indexed by symbol id.
    counts: Vec<u32>,
}

/// Trained model. Immutable after [`NGramModel::train`].
#[derive(Clone, Debug, PartialEq)]
pub struct NGramModel {
    order: usize,
    alpha: f64,
    weights: Vec<f64>,
    /// Observed bytes in ascending order; id `vocab.len()` is the unknown symbol.
    vocab: Vec<u8>,
    byte_to_id: [u16; 256],
    /// `tables[o]` holds counts for contexts of length `o`.
    tables: Vec<HashMap<Vec<u16>, ContextCounts>>,
}

impl NGramModel {
    /// Counts every order over `corpus`.
    pub fn train(corpus: &[u8], config: &NGramConfig) -> Result<Self> {
        let order = config.order;
        if order == 0 {
            return Err(Error::InvalidModel("order must be at least 1".into()));
        }
        if !(config.alpha > 0.0 && config.alpha.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "alpha must be positive and finite, got {}",
                config.alpha
            )));
        }
        if corpus.len() < order {
            return Err(Error::CorpusTooShort {
                len: corpus.len(),
                needed: order,
            });
        }
        let weights = match &config.weights {
            None => vec![1.0 / order as f64; order],
            Some(w) => {
                if w.len() != order || w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "need {order} non-negative weights, got {w:?}"
                    )));
                }
                let s: f64 = w.iter().sum();
                if s <= 0.0 {
                    return Err(Error::InvalidModel("weights sum to zero".into()));
                }
                w.iter().map(|x| x / s).collect()
            }
        };

        let mut seen = [false; 256];
        for &b in corpus {
            seen[b as usize] = true;
        }
        let vocab: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        let unk = vocab.len() as u16;
        let mut byte_to_id = [unk; 256];
        for (i, &b) in vocab.iter().enumerate() {
            byte_to_id[b as usize] = i as u16;
        }
        let v = vocab.len() + 1;
        let ids: Vec<u16> = corpus.iter().map(|&b| byte_to_id[b as usize]).collect();

        let mut tables: Vec<HashMap<Vec<u16>, ContextCounts>> = vec![HashMap::new(); order];
        for i in 0..ids.len() {
            for (ctx_len, table) in tables.iter_mut().enumerate() {
                if ctx_len > i {
                    break;
                }
                let entry = table
                    .entry(ids[i - ctx_len..i].to_vec())
                    .or_insert_with(|| ContextCounts {
                        total: 0,
                        counts: vec![0; v],
                    });
                entry.total += 1;
                entry.counts[ids[i] as usize] += 1;
            }
        }
        Ok(Self {
            order,
            alpha: config.alpha,
            weights,
            vocab,
            byte_to_id,
            tables,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Vocabulary size including the unknown symbol.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() + 1
    }

    /// Symbol id of a byte; unseen bytes map to the unknown symbol.
    pub fn symbol(&self, byte: u8) -> usize {
        self.byte_to_id[byte as usize] as usize
    }

    fn encode(&self, text: &[u8]) -> Vec<u16> {
        text.iter().map(|&b| self.byte_to_id[b as usize]).collect()
    }

    /// Probabilities of the next symbol given `history` (symbol ids; only
    /// the last `order - 1` are used).
    fn distribution_ids(&self, history: &[u16]) -> Vec<f64> {
        let v = self.vocab_size();
        let usable = self.order.min(history.len() + 1);
        let weight_sum: f64 = self.weights[..usable].iter().sum();
        let mut probs = vec![0.0; v];
        for ctx_len in 0..usable {
            let w = self.weights[ctx_len] / weight_sum;
            if w == 0.0 {
                continue;
            }
            let ctx = &history[history.len() - ctx_len..];
            match self.tables[ctx_len].get(ctx) {
                Some(c) => {
                    let denom = c.total as f64 + self.alpha * v as f64;
                    for (p, &n) in probs.iter_mut().zip(&c.counts) {
                        *p += w * (n as f64 + self.alpha) / denom;
                    }
                }
                None => {
                    let u = w / v as f64;
                    for p in probs.iter_mut() {
                        *p += u;
                    }
                }
            }
        }
        probs
    }

    /// Next-symbol distribution after the byte string `history`, indexed by symbol id.
    pub fn distribution(&self, history: &[u8]) -> Vec<f64> {
        let start = history.len().saturating_sub(self.order - 1);
        self.distribution_ids(&self.encode(&history[start..]))
    }

    /// Per-position statistics of `text`. Position `t` scores byte `t + 1`
    /// given bytes `..=t`.
    pub fn stats_for(&self, text: &[u8], emit_vectors: bool) -> Result<Vec<PositionStats>> {
        if text.len() < 2 {
            return Err(Error::TextTooShort(text.len()));
        }
        let ids = self.encode(text);
        (1..ids.len())
            .map(|t| {
                let start = t.saturating_sub(self.order - 1);
                let probs = self.distribution_ids(&ids[start..t]);
                let logp: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
                let m = categorical_moments(&logp)?;
                let ps = PositionStats::new(logp[ids[t] as usize], m.mu, m.sigma);
                Ok(if emit_vectors {
                    ps.with_vector(logp)
                } else {
                    ps
                })
            })
            .collect()
    }

    /// A labeled record for `text`, carrying the text itself.
    pub fn record_for(
        &self,
        id: impl Into<String>,
        label: Label,
        text: &[u8],
        emit_vectors: bool,
    ) -> Result<SequenceRecord> {
        Ok(SequenceRecord::new(id, label, self.stats_for(text, emit_vectors)?).with_text(text))
    }

    /// Mean NLL of `text` in nats per scored position.
    pub fn mean_nll(&self, text: &[u8]) -> Result<f64> {
        let stats = self.stats_for(text, false)?;
        Ok(-stats.iter().map(|p| p.logp_target).sum::<f64>() / stats.len() as f64)
    }

    /// Writes the model as versioned JSON.
    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, &ModelFile::from(self))?;
        Ok(())
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_reader(input).map_err(|e| Error::InvalidModel(e.to_string()))?;
        file.into_model()
    }
}

/// `(context, [(symbol, count)])` rows of one context length.
type SparseTable = Vec<(Vec<u16>, Vec<(u16, u32)>)>;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    order: usize,
    alpha: f64,
    weights: Vec<f64>,
    vocab: Vec<u8>,
    /// One sorted table per context length.
    tables: Vec<SparseTable>,
}

impl From<&NGramModel> for ModelFile {
    fn from(m: &NGramModel) -> Self {
        let tables = m
            .tables
            .iter()
            .map(|t| {
                let mut rows: Vec<_> = t
                    .iter()
                    .map(|(ctx, c)| {
                        let sparse = c
                            .counts
                            .iter()
                            .enumerate()
                            .filter(|(_, &n)| n > 0)
                            .map(|(s, &n)| (s as u16, n))
                            .collect();
                        (ctx.clone(), sparse)
                    })
                    .collect();
                rows.sort();
                rows
            })
            .collect();
        Self {
            format: MODEL_FORMAT.to_owned(),
            order: m.order,
            alpha: m.alpha,
            weights: m.weights.clone(),
            vocab: m.vocab.clone(),
            tables,
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<NGramModel> {
        if self.format != MODEL_FORMAT {
            return Err(Error::InvalidModel(format!(
                "format `{}` is not `{MODEL_FORMAT}`",
                self.format
            )));
        }
        if self.order == 0 || self.tables.len() != self.order || self.weights.len() != self.order {
            return Err(Error::InvalidModel(
                "order does not match tables/weights".into(),
            ));
        }
        if self.vocab.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel(
                "vocabulary must be strictly ascending".into(),
            ));
        }
        let unk = self.vocab.len() as u16;
        let v = self.vocab.len() + 1;
        let mut byte_to_id = [unk; 256];
        for (i, &b) in self.vocab.iter().enumerate() {
            byte_to_id[b as usize] = i as u16;
        }
        let mut tables = Vec::with_capacity(self.order);
        for (ctx_len, rows) in self.tables.into_iter().enumerate() {
            let mut table = HashMap::with_capacity(rows.len());
            for (ctx, sparse) in rows {
                if ctx.len() != ctx_len || ctx.iter().any(|&s| s as usize >= v) {
                    return Err(Error::InvalidModel(format!("bad context {ctx:?}")));
                }
                let mut counts = vec![0u32; v];
                let mut total = 0u64;
                for (s, n) in sparse {
                    let slot = counts
                        .get_mut(s as usize)
                        .ok_or_else(|| Error::InvalidModel(format!("symbol {s} out of range")))?;
                    *slot = n;
                    total += n as u64;
                }
                table.insert(ctx, ContextCounts { total, counts });
            }
            tables.push(table);
        }
        Ok(NGramModel {
            order: self.order,
            alpha: self.alpha,
            weights: self.weights,
            vocab: self.vocab,
            byte_to_id,
            tables,
        })
    }
}

/// Options for [`make_membership_benchmark`].
#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    /// Bytes per snippet; each snippet yields `snippet_len - 1` positions.
    pub snippet_len: usize,
    /// Snippets per class.
    pub n_snippets: usize,
    pub seed: u64,
    /// Attach full log-probability vectors.
    pub emit_vectors: bool,
    /// Attach `refs.lowercase` from the lowercased snippet.
    pub lowercase: bool,
    /// Attach `refs.neighbors` with this many perturbed neighbors (0 = none).
    pub neighbors: usize,
    /// Share of a neighbor's letters that get replaced.
    pub neighbor_edit_rate: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            snippet_len: 64,
            n_snippets: 200,
            seed: 0,
            emit_vectors: false,
            lowercase: false,
            neighbors: 0,
            neighbor_edit_rate: 0.05,
        }
    }
}

/// Samples `n` snippet offsets, distinct when the corpus allows it.
fn sample_offsets(len: usize, snippet_len: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let slots = len - snippet_len + 1;
    if slots >= n {
        let mut all: Vec<usize> = (0..slots).collect();
        let (picked, _) = all.partial_shuffle(rng, n);
        picked.to_vec()
    } else {
        (0..n).map(|_| rng.random_range(0..slots)).collect()
    }
}

/// A copy of `text` with `rate` of its ASCII letters replaced by another
/// letter of the same case.
pub fn perturb(text: &[u8], rate: f64, rng: &mut impl Rng) -> Vec<u8> {
    let letters: Vec<usize> = (0..text.len())
        .filter(|&i| text[i].is_ascii_alphabetic())
        .collect();
    let mut out = text.to_vec();
    if letters.is_empty() {
        return out;
    }
    let edits = ((letters.len() as f64 * rate).round() as usize).max(1);
    for _ in 0..edits {
        let i = letters[rng.random_range(0..letters.len())];
        let base = if out[i].is_ascii_lowercase() {
            b'a'
        } else {
            b'A'
        };
        let shift = rng.random_range(1..26u8);
        out[i] = base + (out[i] - base + shift) % 26;
    }
    out
}

/// Labeled dataset: `n_snippets` members sampled from `member_corpus` (the
/// text the model was trained on) and `n_snippets` nonmembers from
/// `holdout_corpus`. Optionally attaches a reference model's loss under
/// `refs.ref`.
pub fn make_membership_benchmark(
    model: &NGramModel,
    member_corpus: &[u8],
    holdout_corpus: &[u8],
    config: &BenchmarkConfig,
    reference: Option<&NGramModel>,
) -> Result<Vec<SequenceRecord>> {
    if config.snippet_len < 2 {
        return Err(Error::InsufficientCorpus(
            "snippet_len must be at least 2".into(),
        ));
    }
    for (name, corpus) in [("member", member_corpus), ("holdout", holdout_corpus)] {
        if corpus.len() < config.snippet_len {
            return Err(Error::InsufficientCorpus(format!(
                "{name} corpus has {} bytes, snippets need {}",
                corpus.len(),
                config.snippet_len
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let member_offsets = sample_offsets(
        member_corpus.len(),
        config.snippet_len,
        config.n_snippets,
        &mut rng,
    );
    let holdout_offsets = sample_offsets(
        holdout_corpus.len(),
        config.snippet_len,
        config.n_snippets,
        &mut rng,
    );
    // Neighbors draw from their own stream so the snippets do not depend on them.
    let mut neighbor_rng = ChaCha8Rng::seed_from_u64(config.seed);
    neighbor_rng.set_stream(1);

    let mut out = Vec::with_capacity(2 * config.n_snippets);
    for (label, prefix, corpus, offsets) in [
        (Label::Member, "member", member_corpus, member_offsets),
        (
            Label::Nonmember,
            "nonmember",
            holdout_corpus,
            holdout_offsets,
        ),
    ] {
        for (i, off) in offsets.into_iter().enumerate() {
            let text = &corpus[off..off + config.snippet_len];
            let mut record =
                model.record_for(format!("{prefix}-{i:04}"), label, text, config.emit_vectors)?;
            if let Some(r) = reference {
                record = record.with_reference("ref", ReferenceStats::mean_nll(r.mean_nll(text)?));
            }
            if config.lowercase {
                let lower = text.to_ascii_lowercase();
                record = record.with_reference(
                    "lowercase",
                    ReferenceStats::mean_nll(model.mean_nll(&lower)?),
                );
            }
            if config.neighbors > 0 {
                let nlls = (0..config.neighbors)
                    .map(|_| {
                        model.mean_nll(&perturb(text, config.neighbor_edit_rate, &mut neighbor_rng))
                    })
                    .collect::<Result<Vec<_>>>()?;
                record = record.with_reference("neighbors", ReferenceStats::neighbors(nlls));
            }
            out.push(record);
        }
    }
    Ok(out)
}

/// Fraction of positions whose target is an argmax of its distribution.
/// Requires records built with `emit_vectors`; positions without a vector
/// are skipped.
pub fn mode_rate(records: &[SequenceRecord]) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for r in records {
        for ps in &r.positions {
            if let Some(v) = &ps.logp_vector {
                let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                total += 1;
                if ps.logp_target >= max {
                    hits += 1;
                }
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_text() -> &'static [u8] {
        b"the cat sat on the mat. the dog sat on the log. a cat and a dog met on a mat."
    }

    #[test]
    fn bigram_limit_on_abab() {
        let cfg = NGramConfig::new(2, 1e-9).with_weights(vec![0.0, 1.0]);
        let m = NGramModel::train(b"abab", &cfg).unwrap();
        let a = m.symbol(b'a');
        let b = m.symbol(b'b');
        assert!(m.distribution(b"a")[b] > 1.0 - 1e-8);
        assert!(m.distribution(b"b")[a] > 1.0 - 1e-8);
    }

    #[test]
    fn target_is_mode_after_a() {
        let m = NGramModel::train(b"abab", &NGramConfig::new(2, 0.01)).unwrap();
        let stats = m.stats_for(b"ab", true).unwrap();
        assert_eq!(stats.len(), 1);
        let v = stats[0].logp_vector.as_ref().unwrap();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(stats[0].logp_target, max);
    }

    #[test]
    fn unigram_is_smoothed_frequency() {
        let corpus = b"aab";
        let alpha = 0.5;
        let m = NGramModel::train(corpus, &NGramConfig::new(1, alpha)).unwrap();
        let p = m.distribution(b"");
        let v = 3.0; // a, b, unknown
        let denom = 3.0 + alpha * v;
        assert!((p[m.symbol(b'a')] - (2.0 + alpha) / denom).abs() < 1e-15);
        assert!((p[m.symbol(b'b')] - (1.0 + alpha) / denom).abs() < 1e-15);
        assert!((p[m.symbol(b'z')] - alpha / denom).abs() < 1e-15);
    }

    #[test]
    fn distributions_normalize_and_stay_positive() {
        let m = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        for h in [&b""[..], b"t", b"th", b"zq", b"the cat"] {
            let p = m.distribution(h);
            assert_eq!(p.len(), m.vocab_size());
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn training_is_deterministic() {
        let a = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        let b = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        assert_eq!(a, b);
        let mut sa = Vec::new();
        let mut sb = Vec::new();
        a.save(&mut sa).unwrap();
        b.save(&mut sb).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn save_load_roundtrip() {
        let m = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let back = NGramModel::load(&buf[..]).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            back.stats_for(b"the cat", false).unwrap(),
            m.stats_for(b"the cat", false).unwrap()
        );
    }

    #[test]
    fn load_rejects_wrong_format() {
        let m = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let text = String::from_utf8(buf)
            .unwrap()
            .replace(MODEL_FORMAT, "other/v9");
        assert!(matches!(
            NGramModel::load(text.as_bytes()),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn emitted_vectors_agree_with_moments() {
        let m = NGramModel::train(sample_text(), &NGramConfig::default()).unwrap();
        for ps in m.stats_for(b"the mat met a dog", true).unwrap() {
            let v = ps.logp_vector.as_ref().unwrap();
            let mm = categorical_moments(v).unwrap();
            assert!((mm.mu - ps.mu).abs() < 1e-9);
            assert!((mm.sigma - ps.sigma).abs() < 1e-9);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            NGramModel::train(b"ab", &NGramConfig::new(3, 0.1)),
            Err(Error::CorpusTooShort { len: 2, needed: 3 })
        ));
        assert!(NGramModel::train(b"abc", &NGramConfig::new(2, 0.0)).is_err());
        assert!(NGramModel::train(b"abc", &NGramConfig::new(0, 0.1)).is_err());
        assert!(
            NGramModel::train(b"abc", &NGramConfig::new(2, 0.1).with_weights(vec![1.0])).is_err()
        );
        let m = NGramModel::train(b"abc", &NGramConfig::new(2, 0.1)).unwrap();
        assert!(matches!(
            m.stats_for(b"a", false),
            Err(Error::TextTooShort(1))
        ));
    }

    #[test]
    fn unseen_bytes_map_to_unknown() {
        let m = NGramModel::train(b"abab", &NGramConfig::new(2, 0.1)).unwrap();
        assert_eq!(m.symbol(b'z'), m.vocab_size() - 1);
        let stats = m.stats_for(b"azb", false).unwrap();
        assert_eq!(stats.len(), 2);
        assert!(stats.iter().all(|p| p.logp_target < 0.0));
    }

    #[test]
    fn large_alpha_flattens_distributions() {
        let m = NGramModel::train(sample_text(), &NGramConfig::new(3, 1e9)).unwrap();
        let uniform = -(m.vocab_size() as f64).ln();
        for ps in m.stats_for(b"the cat sat", false).unwrap() {
            assert!((ps.mu - uniform).abs() < 1e-6);
            assert!(ps.sigma < 1e-6);
            let s = crate::token_scores::minkpp_token(&ps, crate::Variant::SubMu, 1e-6);
            assert!(s.abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn benchmark_shape_and_determinism() {
        let corpus = sample_text().repeat(20);
        let (train, hold) = corpus.split_at(corpus.len() * 4 / 5);
        let m = NGramModel::train(train, &NGramConfig::default()).unwrap();
        let cfg = BenchmarkConfig {
            snippet_len: 16,
            n_snippets: 10,
            seed: 3,
            lowercase: true,
            neighbors: 2,
            ..Default::default()
        };
        let a = make_membership_benchmark(&m, train, hold, &cfg, Some(&m)).unwrap();
        let b = make_membership_benchmark(&m, train, hold, &cfg, Some(&m)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|r| r.positions.len() == 15));
        assert!(a.iter().all(|r| r.references.len() == 3));
        assert_eq!(a.iter().filter(|r| r.label == Label::Member).count(), 10);

        let short = BenchmarkConfig {
            snippet_len: hold.len() + 1,
            ..cfg
        };
        assert!(matches!(
            make_membership_benchmark(&m, train, hold, &short, None),
            Err(Error::InsufficientCorpus(_))
        ));
    }

    #[test]
    fn perturb_changes_letters_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let text = b"Hello, World! 123";
        let p = perturb(text, 0.3, &mut rng);
        assert_eq!(p.len(), text.len());
        assert_ne!(&p[..], &text[..]);
        for (a, b) in text.iter().zip(&p) {
            if !a.is_ascii_alphabetic() {
                assert_eq!(a, b);
            } else {
                assert_eq!(a.is_ascii_lowercase(), b.is_ascii_lowercase());
            }
        }
    }
}
