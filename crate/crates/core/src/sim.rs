//! Single-queue simulation: drive a policy against a materialized environment.

use rand::{Rng, RngCore};

use crate::audit::ScheduleTrace;
use crate::env::ServiceMatrix;
use crate::error::{Error, Result};
use crate::ogd::OgdState;
use crate::policy::Policy;
use crate::queue::{queue_trajectory, QueueTrace};
use crate::simplex::sample_arm;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub schedule: ScheduleTrace,
    pub queue: QueueTrace,
}

fn check_shapes(services: &ServiceMatrix, arrivals: &[f64]) -> Result<()> {
    if arrivals.len() != services.horizon() {
        return Err(Error::invalid(format!(
            "{} arrivals for a horizon of {}",
            arrivals.len(),
            services.horizon()
        )));
    }
    Ok(())
}

/// Runs `policy` for every slot of `services`.
///
/// The pulled channel's rate is revealed every slot, including when the queue
/// is empty and nothing is actually transmitted.
pub fn run_policy(
    policy: &mut dyn Policy,
    services: &ServiceMatrix,
    arrivals: &[f64],
    rng: &mut dyn RngCore,
) -> Result<PolicyRun> {
    check_shapes(services, arrivals)?;
    if policy.n_arms() != services.n_arms() {
        return Err(Error::invalid(format!(
            "policy has {} arms, environment has {} channels",
            policy.n_arms(),
            services.n_arms()
        )));
    }
    let horizon = services.horizon();
    let mut arms = Vec::with_capacity(horizon);
    let mut observed = Vec::with_capacity(horizon);
    let mut laws = Vec::with_capacity(horizon);
    let mut has_laws = true;
    for (t, row) in services.rows().enumerate() {
        let arm = policy.select(rng)?;
        if arm >= row.len() {
            return Err(Error::contract(format!("slot {}: policy chose arm {arm}", t + 1)));
        }
        match policy.play_distribution() {
            Some(law) if has_laws => laws.push(law),
            _ => has_laws = false,
        }
        let gain = row[arm];
        policy.feed(arm, gain)?;
        arms.push(arm);
        observed.push(gain);
    }
    let queue = queue_trajectory(arrivals, &observed)?;
    Ok(PolicyRun {
        schedule: ScheduleTrace {
            arms,
            play_distributions: has_laws.then_some(laws),
            observed_gains: observed,
        },
        queue,
    })
}

/// Queue under the policy that always uses channel `arm`.
pub fn fixed_arm_queue(services: &ServiceMatrix, arrivals: &[f64], arm: usize) -> Result<QueueTrace> {
    check_shapes(services, arrivals)?;
    if arm >= services.n_arms() {
        return Err(Error::invalid(format!("arm {arm} out of range")));
    }
    let rates: Vec<f64> = services.column(arm).collect();
    queue_trajectory(arrivals, &rates)
}

/// One fixed-arm queue per channel, in arm order.
pub fn fixed_arm_queues(services: &ServiceMatrix, arrivals: &[f64]) -> Result<Vec<QueueTrace>> {
    (0..services.n_arms())
        .map(|arm| fixed_arm_queue(services, arrivals, arm))
        .collect()
}

/// Full-information OGD on the rows of `services`, recording each `p_t`.
///
/// An arm is still sampled from `p_t` each slot so the trace has realized
/// pulls, but the learner updates on the whole gain vector.
pub fn run_expert_ogd(
    mut ogd: OgdState,
    services: &ServiceMatrix,
    rng: &mut dyn RngCore,
) -> Result<ScheduleTrace> {
    if ogd.n_arms() != services.n_arms() {
        return Err(Error::invalid("learner and environment differ in arm count"));
    }
    let horizon = services.horizon();
    let mut arms = Vec::with_capacity(horizon);
    let mut laws = Vec::with_capacity(horizon);
    let mut observed = Vec::with_capacity(horizon);
    for row in services.rows() {
        let p = ogd.distribution().clone();
        let arm = sample_arm(&p, rng.random());
        arms.push(arm);
        observed.push(row[arm]);
        laws.push(p);
        ogd.update(row)?;
    }
    Ok(ScheduleTrace {
        arms,
        play_distributions: Some(laws),
        observed_gains: observed,
    })
}
