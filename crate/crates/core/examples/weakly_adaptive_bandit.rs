//! Driving the bandit learner by hand: select, observe one rate, feed it back.

use queue_regret::bandit::WaMabState;
use queue_regret::policy::Policy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> queue_regret::Result<()> {
    let (n, t) = (4usize, 4096u64);
    let mut learner = WaMabState::new(n, t)?;
    println!(
        "gamma = {:.4}, eta = {:.6}, estimate bound N/gamma = {:.2}",
        learner.gamma(),
        learner.ogd().eta(),
        learner.ogd().gain_bound()
    );

    // Arm 2 is best for the first half, arm 0 afterwards.
    let mean = |slot: u64, arm: usize| match (slot < t / 2, arm) {
        (true, 2) | (false, 0) => 0.8,
        _ => 0.4,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pulls = vec![0usize; n];
    for slot in 0..t {
        let arm = learner.select(&mut rng)?;
        let rate: f64 = (mean(slot, arm) + rng.random_range(-0.2f64..0.2)).clamp(0.0, 1.0);
        learner.feed(arm, rate)?;
        pulls[arm] += 1;
        if slot + 1 == t / 2 || slot + 1 == t {
            let p: Vec<String> = learner.distribution().as_slice().iter().map(|x| format!("{x:.3}")).collect();
            println!("after slot {:>4}: p = [{}], pulls so far {pulls:?}", slot + 1, p.join(", "));
        }
    }
    Ok(())
}
