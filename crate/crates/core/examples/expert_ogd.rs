//! Full-information online gradient descent on block-switching gains, with
//! its worst interval regret compared to `G sqrt(2T)`.

use queue_regret::audit::{max_interval_regret, theorem1_bound, Accounting};
use queue_regret::env::ServiceMatrix;
use queue_regret::ogd::OgdState;
use queue_regret::sim::run_expert_ogd;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> queue_regret::Result<()> {
    let (n, t) = (3usize, 1200usize);
    // The paying arm changes every 300 slots.
    let rows = (0..t)
        .map(|s| (0..n).map(|i| if i == (s / 300) % n { 1.0 } else { 0.1 }).collect())
        .collect();
    let gains = ServiceMatrix::from_rows(rows)?;
    let g = (n as f64).sqrt();
    let ogd = OgdState::with_horizon(n, g, t as u64)?;
    println!("eta = {:.5}, gain bound G = {g:.4}", ogd.eta());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trace = run_expert_ogd(ogd, &gains, &mut rng)?;
    let laws = trace.play_distributions.as_ref().expect("OGD records its laws");
    for s in [0, 299, 300, 320, 600, 1199] {
        let p: Vec<String> = laws[s].as_slice().iter().map(|x| format!("{x:.3}")).collect();
        println!("slot {:>4}: p = [{}]", s + 1, p.join(", "));
    }

    let report = max_interval_regret(&gains, &trace, Accounting::ExpectedPlay)?;
    println!(
        "worst interval regret {:.2} on slots {}..={} against arm {}; bound {:.2}",
        report.max_regret,
        report.start,
        report.end,
        report.best_arm,
        theorem1_bound(g, t as u64)
    );
    Ok(())
}
