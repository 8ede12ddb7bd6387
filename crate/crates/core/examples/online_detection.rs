//! Flag memorized spans in a stream: prepend held-out text to training text
//! and score windows of 32 positions.
//!
//! cargo run --release --example online_detection

use minkpp::evaluation::auroc;
use minkpp::online::{build_online_dataset, chunk_scores, online_scan, DEFAULT_MEMBER_SHARE};
use minkpp::toy_lm::{make_membership_benchmark, BenchmarkConfig, NGramConfig, NGramModel};
use minkpp::{corpus, DecisionRule, DetectorConfig, Label, Variant};

fn main() -> minkpp::Result<()> {
    let (train, holdout) = corpus::split();
    let model = NGramModel::train(train, &NGramConfig::new(5, 0.1))?;
    let config = BenchmarkConfig {
        snippet_len: 129,
        n_snippets: 100,
        seed: 7,
        ..BenchmarkConfig::default()
    };
    let pool = make_membership_benchmark(&model, train, holdout, &config, None)?;
    let (members, nonmembers): (Vec<_>, Vec<_>) =
        pool.into_iter().partition(|r| r.label == Label::Member);

    let mut samples = build_online_dataset(&members, &nonmembers, &[32, 64, 128], 7)?;
    for s in &mut samples {
        // Rescore so the member part is conditioned on the prepended text.
        let text = s
            .record
            .text_bytes
            .clone()
            .expect("benchmark records carry text");
        s.record = model.record_for(s.record.id.clone(), Label::Unknown, &text, false)?;
    }

    let detector = DetectorConfig::minkpp(20.0, Variant::Full);
    let first = &samples[0];
    println!(
        "{} (member part starts at position {}):",
        first.record.id, first.splice
    );
    for v in online_scan(&first.record, 32, &detector, DecisionRule::new(0.0))? {
        println!(
            "  [{:>3}, {:>3})  score {:+.3}  flagged {}",
            v.start, v.end, v.score, v.decision
        );
    }

    let chunks = chunk_scores(&samples, 32, &detector, DEFAULT_MEMBER_SHARE)?;
    println!(
        "chunk-level AUROC over {} windows: {:.4}",
        chunks.len(),
        auroc(&chunks)?
    );
    Ok(())
}
