//! Train byte n-gram models on the bundled text, build a member/nonmember
//! benchmark from the training and held-out splits, and compare detectors.
//!
//! cargo run --release --example membership_study

use minkpp::detectors::score_dataset;
use minkpp::evaluation::evaluate;
use minkpp::toy_lm::{
    make_membership_benchmark, mode_rate, BenchmarkConfig, NGramConfig, NGramModel,
};
use minkpp::{corpus, DetectorConfig, Label, Method, Mode, Variant};

fn study(order: usize) -> minkpp::Result<()> {
    let (train, holdout) = corpus::split();
    let model = NGramModel::train(train, &NGramConfig::new(order, 0.1))?;
    // A unigram trained on the same text plays the smaller reference model.
    let reference = NGramModel::train(train, &NGramConfig::new(1, 0.1))?;
    let config = BenchmarkConfig {
        emit_vectors: true,
        lowercase: true,
        neighbors: 8,
        ..BenchmarkConfig::default()
    };
    let records = make_membership_benchmark(&model, train, holdout, &config, Some(&reference))?;
    println!(
        "order {order}: {} records ({} training / {} held-out bytes)",
        records.len(),
        train.len(),
        holdout.len()
    );

    let detectors = [
        DetectorConfig::loss(),
        DetectorConfig::new(Method::Zlib),
        DetectorConfig::new(Method::Ref),
        DetectorConfig::new(Method::Lowercase),
        DetectorConfig::new(Method::Neighbor),
        DetectorConfig::mink(20.0),
        DetectorConfig::minkpp(20.0, Variant::Full),
    ];
    println!("  {:<10} {:>7} {:>10}", "detector", "AUROC", "TPR@5%FPR");
    for d in &detectors {
        let scored = score_dataset(&records, d, Mode::Strict)?.scored;
        let report = evaluate(&scored, &[0.05], Some(d))?;
        println!(
            "  {:<10} {:>7.4} {:>10.4}",
            d.method, report.auroc, report.tpr_at_fpr[0].tpr
        );
    }

    let (members, nonmembers): (Vec<_>, Vec<_>) =
        records.into_iter().partition(|r| r.label == Label::Member);
    println!(
        "  target is the argmax at {:.4} of member positions vs {:.4} of nonmember positions",
        mode_rate(&members),
        mode_rate(&nonmembers)
    );
    Ok(())
}

fn main() -> minkpp::Result<()> {
    study(3)?;
    study(5)
}
