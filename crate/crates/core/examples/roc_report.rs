//! Evaluate hand-made scores: AUROC with ties, TPR at low FPR, ROC as CSV.
//!
//! cargo run --example roc_report

use minkpp::evaluation::{evaluate, write_roc_csv};
use minkpp::{Label, ScoredExample};

fn main() -> minkpp::Result<()> {
    let data = [
        ("a", Label::Member, 0.9),
        ("b", Label::Member, 0.7),
        ("c", Label::Member, 0.4),
        ("d", Label::Nonmember, 0.7),
        ("e", Label::Nonmember, 0.3),
        ("f", Label::Nonmember, 0.1),
        ("g", Label::Unknown, 0.5),
    ];
    let scored: Vec<ScoredExample> = data
        .iter()
        .map(|&(id, label, s)| ScoredExample::new(id, label, s))
        .collect();
    let report = evaluate(&scored, &[0.0, 1.0 / 3.0], None)?;
    println!(
        "AUROC {:.4} over {} members / {} nonmembers ({} unlabeled ignored)",
        report.auroc, report.n_pos, report.n_neg, report.n_unknown
    );
    for t in &report.tpr_at_fpr {
        println!("TPR at FPR <= {:.3}: {:.3}", t.fpr, t.tpr);
    }
    write_roc_csv(&report.roc_points, std::io::stdout().lock())?;
    Ok(())
}
