//! Runs an experiment config and prints the per-(N, k) summary.
//!
//! `cargo run --release --example experiment -- configs/resolvability_dsbs.json`

use std::path::PathBuf;

use polarcov::bench::{run_experiment, ExperimentConfig};

fn main() -> polarcov::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/empirical_dsbs.json"));
    let mut cfg = ExperimentConfig::load(&path)?;
    cfg.output_dir = std::env::temp_dir().join("polarcov-example");
    let out = run_experiment(&cfg)?;
    for g in &out.summary.groups {
        println!("N = {} k = {} ({} trials, {})", g.block_len, g.k, g.trials, g.profile_method);
        println!("  sets {:?}", g.set_sizes);
        for r in &g.rates.rows {
            println!("  {:36} {:.4} -> {:.4}", r.name, r.finite, r.target);
        }
        println!("  V(q, T) mean {:.4} sd {:.4}", g.histogram_dist.mean, g.histogram_dist.std);
        if let Some(e) = &g.exact {
            println!("  exact V {:.4}, D {:.4}", e.vdist_xy.value, e.kl_xy.value);
        }
        for b in &g.bounds {
            println!("  {:60} {}", b.name, b.holds.map_or("skipped", |h| if h { "holds" } else { "FAILS" }));
        }
    }
    println!("outputs in {}", cfg.output_dir.display());
    Ok(())
}
