//! Write and read `mia-stats/v1` records, and see what lenient parsing reports.
//!
//! cargo run --example wire_format

use minkpp::ingestion::{parse_records, write_records};
use minkpp::moments::categorical_moments;
use minkpp::{Label, Mode, PositionStats, ReferenceStats, SequenceRecord};

fn main() -> minkpp::Result<()> {
    let logp = [0.7f64.ln(), 0.2f64.ln(), 0.1f64.ln()];
    let m = categorical_moments(&logp)?;
    let record = SequenceRecord::new(
        "doc-1",
        Label::Member,
        vec![
            PositionStats::new(logp[0], m.mu, m.sigma).with_vector(logp.to_vec()),
            PositionStats::new(logp[2], m.mu, m.sigma).with_vector(logp.to_vec()),
        ],
    )
    .with_text("ab")
    .with_reference("ref", ReferenceStats::mean_nll(1.9));

    let mut buf = Vec::new();
    write_records(std::slice::from_ref(&record), &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));
    assert_eq!(parse_records(&buf[..], Mode::Strict)?.records, vec![record]);

    buf.extend_from_slice(
        br#"{"schema":"mia-stats/v1","id":"doc-2","label":"unknown","logp":[-1.0,-2.0],"mu":[-1.0],"sigma":[0.1,0.2]}
{"schema":"mia-stats/v1","id":"doc-3","label":"nonmember","logp":[-0.5],"mu":[-0.9],"sigma":[0.3],"source":"crawl"}
"#,
    );
    if let Err(e) = parse_records(&buf[..], Mode::Strict) {
        println!("strict: {e}");
    }
    let lenient = parse_records(&buf[..], Mode::Lenient)?;
    println!("lenient: kept {} records", lenient.records.len());
    for d in &lenient.diagnostics {
        println!("  line {}: {:?}: {}", d.line, d.severity, d.message);
    }
    Ok(())
}
