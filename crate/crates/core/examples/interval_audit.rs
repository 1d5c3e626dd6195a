//! Auditing a schedule: the worst interval regret in linear time, checked
//! against full enumeration, and the queue regret it dominates.

use queue_regret::audit::{check_pathwise_domination, max_interval_regret, Accounting};
use queue_regret::harness::{materialize, AuditFlags, ExperimentConfig, SCHEMA_VERSION};
use queue_regret::oracle::brute_force_interval_regret;
use queue_regret::policy::PolicySpec;
use queue_regret::queue::queue_length_regret;
use queue_regret::sim::{fixed_arm_queues, run_policy};
use queue_regret::{ArrivalModel, ChannelModel};

fn main() -> queue_regret::Result<()> {
    let cfg = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        n_arms: 3,
        horizon: 400,
        channel: ChannelModel::BlockMarkov { num_blocks: 3, initial_rate: None },
        arrivals: ArrivalModel::Constant { value: 0.45 },
        policies: vec![PolicySpec::WaMab],
        num_runs: 1,
        master_seed: 99,
        audit: AuditFlags::all(),
        topology: None,
    };
    let env = materialize(&cfg, 1)?;
    let mut policy = PolicySpec::WaMab.build(3, 400)?;
    let mut rng = queue_regret::RngStream::new(99, queue_regret::StreamId::new(queue_regret::env::Purpose::Policy, 1)).rng();
    let run = run_policy(policy.as_mut(), &env.services, &env.arrivals, &mut rng)?;

    for accounting in [Accounting::Realized, Accounting::ExpectedPlay] {
        let fast = max_interval_regret(&env.services, &run.schedule, accounting)?;
        let (slow, start, end, arm) = brute_force_interval_regret(&env.services, &run.schedule, accounting)?;
        println!(
            "{accounting:?}: scan {:.4} on [{}, {}] arm {}; enumeration {slow:.4} on [{start}, {end}] arm {arm}",
            fast.max_regret, fast.start, fast.end, fast.best_arm
        );
    }

    let fixed = fixed_arm_queues(&env.services, &env.arrivals)?;
    let rq = queue_length_regret(&run.queue, &fixed)?;
    let realized = max_interval_regret(&env.services, &run.schedule, Accounting::Realized)?;
    println!(
        "queue regret {:.4} <= worst interval regret {:.4}: {}",
        rq.value,
        realized.max_regret,
        check_pathwise_domination(rq.value, &realized)
    );
    Ok(())
}
