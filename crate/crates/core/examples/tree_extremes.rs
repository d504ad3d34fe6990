//! Extremal process of the tree Gaussian free field.
//!
//! `cargo run --release --example tree_extremes -- [N] [replicas]`

use gff_extremes::experiment::{run_tree_pipeline_detailed, ExperimentConfig, Mode};

fn main() -> gff_extremes::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = ExperimentConfig {
        mode: Mode::Tree,
        n: args.first().and_then(|s| s.parse().ok()).unwrap_or(1 << 14),
        replicas: args.get(1).and_then(|s| s.parse().ok()).unwrap_or(400),
        ..ExperimentConfig::default()
    };
    let (report, processes) = run_tree_pipeline_detailed(&cfg)?;
    let ex = report
        .extremes
        .first()
        .expect("tree run has one extremes section");
    println!("N = {}, {} replicas", cfg.n, processes.len());
    if let Some(ks) = &ex.ks {
        println!(
            "KS vs Gumbel: D = {:.4}, p = {:.3}",
            ks.statistic, ks.p_value
        );
    }
    for t in &ex.intervals {
        println!(
            "mean count in {}: {:.3} (limit {:.3})",
            t.interval, t.mean_count, t.target_mean
        );
    }
    for (i, l) in ex.laplace.iter().enumerate() {
        println!(
            "Laplace functional {i}: {:.4} vs {:.4}",
            l.result.empirical, l.result.target
        );
    }
    for c in &report.checks {
        println!("{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name);
    }
    Ok(())
}
