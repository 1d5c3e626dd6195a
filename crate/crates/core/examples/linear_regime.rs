//! With one unit arriving every slot and rates in [0, 1] the queue never
//! drains, so queue gaps are exactly cumulative gain gaps.

use queue_regret::env::{generate_service_matrix, ChannelModel, Purpose, RngStream, StreamId};
use queue_regret::policy::PolicySpec;
use queue_regret::queue::queue_length_regret;
use queue_regret::sim::{fixed_arm_queues, run_policy};

fn main() -> queue_regret::Result<()> {
    let (n, t) = (3usize, 2000usize);
    let services = generate_service_matrix(&ChannelModel::IidUniform, t, n, &RngStream::new(2, StreamId::new(Purpose::Services, 1)))?;
    let arrivals = vec![1.0; t];
    let fixed = fixed_arm_queues(&services, &arrivals)?;
    let mut policy = PolicySpec::Uniform.build(n, t as u64)?;
    let mut rng = RngStream::new(2, StreamId::new(Purpose::Policy, 1)).rng();
    let run = run_policy(policy.as_mut(), &services, &arrivals, &mut rng)?;

    let policy_gain: f64 = run.schedule.observed_gains.iter().sum();
    let best_total = services.column_sums().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let terminal_gap = fixed.iter().map(|q| run.queue.lengths[t] - q.lengths[t]).fold(f64::NEG_INFINITY, f64::max);
    println!("full-horizon gain regret {:.6}", best_total - policy_gain);
    println!("largest terminal queue gap {terminal_gap:.6}");
    println!("queue regret over all slots {:.6}", queue_length_regret(&run.queue, &fixed)?.value);
    Ok(())
}
