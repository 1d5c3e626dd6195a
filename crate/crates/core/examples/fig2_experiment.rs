//! The five-channel block-Markov experiment, averaged over many runs.
//!
//! Usage: `cargo run --release --example fig2_experiment [scale] [out.csv]`.
//! `scale` divides the horizon and run count of `presets/fig2.json`
//! (default 10).

use std::path::Path;

use queue_regret::harness::{emit_csv, run_many, ExperimentConfig};

fn main() -> queue_regret::Result<()> {
    let mut args = std::env::args().skip(1);
    let scale: f64 = args.next().map_or(10.0, |s| s.parse().expect("scale must be a number"));
    let out = args.next().unwrap_or_else(|| "fig2_queue_regret.csv".into());
    let preset = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets/fig2.json");
    let cfg = ExperimentConfig::load(preset)?.with_env_seed()?.scaled(scale)?;
    println!("N={} T={} runs={} seed={}", cfg.n_arms, cfg.horizon, cfg.num_runs, cfg.master_seed);

    let started = std::time::Instant::now();
    let agg = run_many(&cfg)?;
    for p in &agg.policies {
        let last = agg.horizon - 1;
        println!(
            "{:>8}: mean final queue regret {:.3} (stderr {:.3})",
            p.policy.to_string(),
            p.mean[last],
            p.stderr[last]
        );
    }
    emit_csv(&agg, &out)?;
    println!("wrote {out} in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
