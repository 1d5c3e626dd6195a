//! Queue-length regret of a learning policy against every fixed channel.

use queue_regret::env::{generate_arrivals, generate_service_matrix, ArrivalModel, ArrivalRate, ChannelModel, Purpose, RngStream, StreamId};
use queue_regret::policy::PolicySpec;
use queue_regret::queue::{queue_length_regret, queue_regret_curve};
use queue_regret::sim::{fixed_arm_queues, run_policy};

fn main() -> queue_regret::Result<()> {
    let (n, t, seed) = (4usize, 3000usize, 11u64);
    let services = generate_service_matrix(
        &ChannelModel::BlockMarkov { num_blocks: 5, initial_rate: None },
        t,
        n,
        &RngStream::new(seed, StreamId::new(Purpose::Services, 1)),
    )?;
    let arrivals = generate_arrivals(
        &ArrivalModel::UniformRate { lambda: ArrivalRate::AUTO, epsilon: 0.05 },
        t,
        &RngStream::new(seed, StreamId::new(Purpose::Arrivals, 1)),
        Some(&services),
    )?;
    let fixed = fixed_arm_queues(&services, &arrivals)?;
    for (i, q) in fixed.iter().enumerate() {
        println!("fixed channel {i}: peak queue {:.2}, final {:.2}", q.peak(), q.lengths[t]);
    }

    for spec in [PolicySpec::WaMab, PolicySpec::Exp3, PolicySpec::Uniform] {
        let mut policy = spec.build(n, t as u64)?;
        let mut rng = RngStream::new(seed, StreamId::new(Purpose::Policy, 1)).rng();
        let run = run_policy(policy.as_mut(), &services, &arrivals, &mut rng)?;
        let r = queue_length_regret(&run.queue, &fixed)?;
        let curve = queue_regret_curve(&run.queue, &fixed)?;
        println!(
            "{:>8}: queue regret {:.3} at slot {} against channel {}; R_Q(T/2) = {:.3}",
            spec.to_string(),
            r.value,
            r.slot,
            r.arm,
            curve[t / 2 - 1]
        );
    }
    Ok(())
}
