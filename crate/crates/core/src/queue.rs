//! Fluid single-queue dynamics and the queue-length regret metric.
//!
//! Slots are numbered from 1 in this module's outputs: `lengths[t]` is the
//! queue after slot `t`, with `lengths[0] = Q(0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueTrace {
    /// `Q(0), Q(1), ..., Q(T)`.
    pub lengths: Vec<f64>,
    /// Amount actually served in each slot.
    pub departures: Vec<f64>,
}

impl QueueTrace {
    pub fn horizon(&self) -> usize {
        self.departures.len()
    }

    /// `Q(t)` for `t` in `0..=T`.
    pub fn at(&self, t: usize) -> f64 {
        self.lengths[t]
    }

    pub fn peak(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }
}

/// One Lindley update: `(max(0, q + a - s), min(q + a, s))`.
pub fn lindley_step(q: f64, arrival: f64, service: f64) -> Result<(f64, f64)> {
    for (name, v) in [("queue", q), ("arrival", arrival), ("service", service)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    let content = q + arrival;
    Ok(((content - service).max(0.0), content.min(service)))
}

/// Folds [`lindley_step`] from an empty queue.
pub fn queue_trajectory(arrivals: &[f64], served_rates: &[f64]) -> Result<QueueTrace> {
    if arrivals.len() != served_rates.len() {
        return Err(Error::invalid(format!(
            "{} arrivals but {} service rates",
            arrivals.len(),
            served_rates.len()
        )));
    }
    let mut lengths = Vec::with_capacity(arrivals.len() + 1);
    let mut departures = Vec::with_capacity(arrivals.len());
    let mut q = 0.0;
    lengths.push(q);
    for (&a, &s) in arrivals.iter().zip(served_rates) {
        let (next, gone) = lindley_step(q, a, s)?;
        q = next;
        lengths.push(q);
        departures.push(gone);
    }
    Ok(QueueTrace {
        lengths,
        departures,
    })
}

/// Net increments `b_t = A(t) - served(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetIncrementSequence(Vec<f64>);

impl NetIncrementSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(t) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("increment at slot {} is not finite", t + 1)));
        }
        Ok(Self(values))
    }

    pub fn from_flows(arrivals: &[f64], served_rates: &[f64]) -> Result<Self> {
        if arrivals.len() != served_rates.len() {
            return Err(Error::invalid("arrivals and service rates differ in length"));
        }
        Self::new(arrivals.iter().zip(served_rates).map(|(a, s)| a - s).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `Q(t)` for `t = 1..=T` as the largest suffix sum of increments ending at
/// `t`, floored at zero (the empty suffix).
///
/// The maximum is maintained incrementally as `max(0, Q(t-1) + b_t)`; see
/// [`crate::oracle::suffix_max_queue`] for the direct quadratic evaluation.
pub fn queue_closed_form(increments: &NetIncrementSequence) -> Vec<f64> {
    let mut best_suffix = 0.0f64;
    increments
        .as_slice()
        .iter()
        .map(|&b| {
            best_suffix = (best_suffix + b).max(0.0);
            best_suffix
        })
        .collect()
}

/// Worst-case gap between the policy queue and any fixed-arm queue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueRegret {
    /// Signed: negative when the policy beats every fixed arm at every slot.
    pub value: f64,
    /// Slot `t` (from 1) attaining the maximum.
    pub slot: usize,
    /// Fixed arm attaining the maximum.
    pub arm: usize,
}

fn check_same_horizon(policy: &QueueTrace, per_arm: &[QueueTrace]) -> Result<()> {
    if per_arm.is_empty() {
        return Err(Error::invalid("need at least one fixed-arm queue"));
    }
    let t = policy.horizon();
    if t == 0 {
        return Err(Error::invalid("queue traces are empty"));
    }
    if let Some(i) = per_arm.iter().position(|q| q.horizon() != t) {
        return Err(Error::invalid(format!(
            "fixed-arm trace {i} has {} slots, policy trace has {t}",
            per_arm[i].horizon()
        )));
    }
    Ok(())
}

/// `max_t max_i (Q_policy(t) - Q_i(t))`, ties to the smallest `t`, then `i`.
pub fn queue_length_regret(policy: &QueueTrace, per_arm: &[QueueTrace]) -> Result<QueueRegret> {
    check_same_horizon(policy, per_arm)?;
    let mut best = QueueRegret {
        value: f64::NEG_INFINITY,
        slot: 1,
        arm: 0,
    };
    for t in 1..=policy.horizon() {
        for (i, q) in per_arm.iter().enumerate() {
            let gap = policy.lengths[t] - q.lengths[t];
            if gap > best.value {
                best = QueueRegret {
                    value: gap,
                    slot: t,
                    arm: i,
                };
            }
        }
    }
    Ok(best)
}

/// Running maximum `R_Q(t)` for `t = 1..=T`; the last entry is the regret.
pub fn queue_regret_curve(policy: &QueueTrace, per_arm: &[QueueTrace]) -> Result<Vec<f64>> {
    check_same_horizon(policy, per_arm)?;
    let mut running = f64::NEG_INFINITY;
    Ok((1..=policy.horizon())
        .map(|t| {
            let gap = per_arm
                .iter()
                .map(|q| policy.lengths[t] - q.lengths[t])
                .fold(f64::NEG_INFINITY, f64::max);
            running = running.max(gap);
            running
        })
        .collect())
}
