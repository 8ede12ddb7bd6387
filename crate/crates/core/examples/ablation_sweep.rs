//! Sweep k and the four calibration variants on the toy-model benchmark.
//!
//! cargo run --release --example ablation_sweep

use minkpp::sweep::{sweep, write_sweep_csv};
use minkpp::toy_lm::{make_membership_benchmark, BenchmarkConfig, NGramConfig, NGramModel};
use minkpp::{corpus, Method, Variant};

fn main() -> minkpp::Result<()> {
    let (train, holdout) = corpus::split();
    // A 5-gram memorizes its training text far more than a trigram does.
    let model = NGramModel::train(train, &NGramConfig::new(5, 0.1))?;
    let records =
        make_membership_benchmark(&model, train, holdout, &BenchmarkConfig::default(), None)?;
    let k_grid = [5.0, 10.0, 20.0, 50.0, 100.0];
    let rows = sweep(
        &records,
        Method::Minkpp,
        &k_grid,
        &Variant::ALL,
        1e-6,
        &[0.05],
    )?;
    write_sweep_csv(&rows, std::io::stdout().lock())?;
    let mink = sweep(&records, Method::Mink, &k_grid, &[], 1e-6, &[0.05])?;
    write_sweep_csv(&mink, std::io::stdout().lock())?;
    Ok(())
}
