//! Interval-regret audits and the theoretical bounds they are checked against.
//!
//! The central object is the interval regret of a schedule on `I = [s, e]`:
//! `max_i sum_{t in I} (S_i(t) - gain_t)`, where `gain_t` is either the rate
//! of the pulled arm ([`Accounting::Realized`]) or the expected rate under the
//! play distribution ([`Accounting::ExpectedPlay`]). Slots in reports are
//! numbered from 1 and intervals are inclusive.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::bandit::{estimate_gain, select_mixed};
use crate::env::{RngStream, ServiceMatrix};
use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// What a policy did in each slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleTrace {
    /// Pulled arm per slot (counted from 0).
    pub arms: Vec<usize>,
    /// Law each arm was drawn from, when the policy exposes one.
    pub play_distributions: Option<Vec<ProbabilityVector>>,
    /// Rate of the pulled arm per slot.
    pub observed_gains: Vec<f64>,
}

impl ScheduleTrace {
    pub fn horizon(&self) -> usize {
        self.arms.len()
    }

    /// Builds the trace of a fixed sequence of pulls.
    pub fn from_arms(services: &ServiceMatrix, arms: Vec<usize>) -> Result<Self> {
        if arms.len() != services.horizon() {
            return Err(Error::invalid("one arm per slot required"));
        }
        if let Some(t) = arms.iter().position(|&a| a >= services.n_arms()) {
            return Err(Error::invalid(format!("arm {} at slot {} out of range", arms[t], t + 1)));
        }
        let observed_gains = arms
            .iter()
            .enumerate()
            .map(|(t, &a)| services.get(t, a))
            .collect();
        Ok(Self {
            arms,
            play_distributions: None,
            observed_gains,
        })
    }

    /// Checks that the trace was generated against `services`.
    pub fn validate(&self, services: &ServiceMatrix) -> Result<()> {
        let t = services.horizon();
        if self.arms.len() != t || self.observed_gains.len() != t {
            return Err(Error::invalid(format!(
                "schedule covers {} slots, service matrix has {t}",
                self.arms.len()
            )));
        }
        if let Some(p) = &self.play_distributions {
            if p.len() != t || p.iter().any(|d| d.len() != services.n_arms()) {
                return Err(Error::invalid("play distributions do not match the service matrix"));
            }
        }
        for (slot, (&arm, &g)) in self.arms.iter().zip(&self.observed_gains).enumerate() {
            if arm >= services.n_arms() || services.get(slot, arm) != g {
                return Err(Error::invalid(format!(
                    "slot {}: observed gain does not match the service matrix",
                    slot + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Policy earns the rate of the arm it actually pulled.
    Realized,
    /// Policy earns `<S(t), p_t>` under its recorded play distribution.
    ExpectedPlay,
}

/// Per-slot policy gain under the chosen accounting.
pub fn policy_gains(
    services: &ServiceMatrix,
    trace: &ScheduleTrace,
    accounting: Accounting,
) -> Result<Vec<f64>> {
    trace.validate(services)?;
    match accounting {
        Accounting::Realized => Ok(trace.observed_gains.clone()),
        Accounting::ExpectedPlay => {
            let dists = trace.play_distributions.as_ref().ok_or_else(|| {
                Error::invalid("expected-play accounting needs recorded play distributions")
            })?;
            Ok(dists
                .iter()
                .zip(services.rows())
                .map(|(p, row)| p.dot(row))
                .collect())
        }
    }
}

/// Realized regret on the inclusive slot range `[start, end]` (from 1).
pub fn interval_regret(
    services: &ServiceMatrix,
    trace: &ScheduleTrace,
    start: usize,
    end: usize,
) -> Result<f64> {
    interval_regret_with(services, trace, start, end, Accounting::Realized)
}

pub fn interval_regret_with(
    services: &ServiceMatrix,
    trace: &ScheduleTrace,
    start: usize,
    end: usize,
    accounting: Accounting,
) -> Result<f64> {
    if start < 1 || start > end || end > services.horizon() {
        return Err(Error::invalid(format!(
            "interval [{start}, {end}] is not inside [1, {}]",
            services.horizon()
        )));
    }
    let gains = policy_gains(services, trace, accounting)?;
    Ok((0..services.n_arms())
        .map(|arm| {
            (start - 1..end).fold(0.0, |acc, t| acc + (services.get(t, arm) - gains[t]))
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalRegretReport {
    pub max_regret: f64,
    /// First slot of the maximizing interval (from 1).
    pub start: usize,
    /// Last slot of the maximizing interval (inclusive).
    pub end: usize,
    pub best_arm: usize,
    pub accounting: Accounting,
    /// `per_prefix[k]` is the largest interval regret among intervals ending
    /// at or before slot `k + 1`.
    pub per_prefix: Vec<f64>,
}

/// Whether `(value, start, end, arm)` beats `best`: larger value first, then
/// earlier interval, then lower arm.
pub(crate) fn beats(value: f64, key: (usize, usize, usize), best: Option<(f64, (usize, usize, usize))>) -> bool {
    match best {
        None => true,
        Some((bv, bk)) => value > bv || (value == bv && key < bk),
    }
}

/// Exact maximum of the interval regret over all `O(T^2)` intervals and all
/// arms, by one maximum-subarray scan per arm over `d_t = S_i(t) - gain_t`.
///
/// Each running sum is accumulated left to right from its start slot, so the
/// reported value is bit-identical to summing the maximizing interval
/// directly.
pub fn max_interval_regret(
    services: &ServiceMatrix,
    trace: &ScheduleTrace,
    accounting: Accounting,
) -> Result<IntervalRegretReport> {
    let gains = policy_gains(services, trace, accounting)?;
    let horizon = services.horizon();
    if horizon == 0 {
        return Err(Error::invalid("cannot audit an empty schedule"));
    }
    let n = services.n_arms();
    // Per arm: best sum of an interval ending at the current slot, and its start.
    let mut running: Vec<(f64, usize)> = vec![(0.0, 0); n];
    let mut best: Option<(f64, (usize, usize, usize))> = None;
    let mut per_prefix = Vec::with_capacity(horizon);
    for (t, row) in services.rows().enumerate() {
        for (arm, cell) in running.iter_mut().enumerate() {
            let d = row[arm] - gains[t];
            if t == 0 || !(cell.0 + d >= d) {
                *cell = (d, t);
            } else {
                cell.0 += d;
            }
            let key = (cell.1, t, arm);
            if beats(cell.0, key, best) {
                best = Some((cell.0, key));
            }
        }
        per_prefix.push(best.map_or(f64::NEG_INFINITY, |b| b.0));
    }
    let (max_regret, (start, end, best_arm)) = best.expect("horizon is positive");
    Ok(IntervalRegretReport {
        max_regret,
        start: start + 1,
        end: end + 1,
        best_arm,
        accounting,
        per_prefix,
    })
}

/// Absolute slack allowed in exact-arithmetic identities.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Queue regret must not exceed the largest realized interval regret.
pub fn check_pathwise_domination(queue_regret: f64, report: &IntervalRegretReport) -> bool {
    queue_regret <= report.max_regret + IDENTITY_TOLERANCE
}

/// Full-information OGD interval-regret bound `G sqrt(2T)`.
pub fn theorem1_bound(gain_bound: f64, horizon: u64) -> f64 {
    gain_bound * (2.0 * horizon as f64).sqrt()
}

/// High-probability bandit bound
/// `3 sqrt(N) T^(3/4) (1 + sqrt(ln(3 N T^2 / delta)))`.
pub fn theorem2_bound(n_arms: usize, horizon: u64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta {delta} outside (0, 1)")));
    }
    if n_arms == 0 || horizon == 0 {
        return Err(Error::invalid("n_arms and horizon must be positive"));
    }
    if (horizon as u128) < (n_arms as u128).pow(2) {
        log::warn!("horizon {horizon} < n_arms^2; the bound's hypothesis fails");
    }
    let n = n_arms as f64;
    let t = horizon as f64;
    let log_term = (3.0 * n * t * t / delta).ln();
    Ok(3.0 * n.sqrt() * t.powf(0.75) * (1.0 + log_term.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorCheck {
    /// `max_i |mean(g_hat_i) - g_i|`.
    pub max_error: f64,
    /// Largest Euclidean norm of any single estimate.
    pub max_norm: f64,
    /// `N / gamma`, the bound every estimate norm must respect.
    pub norm_bound: f64,
}

/// Monte Carlo check that importance-weighted estimates are unbiased when the
/// OGD distribution is frozen at `p`.
pub fn estimator_unbiasedness_test(
    p: &ProbabilityVector,
    gamma: f64,
    true_gains: &[f64],
    samples: usize,
    rng: &RngStream,
) -> Result<EstimatorCheck> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    if true_gains.len() != p.len() {
        return Err(Error::invalid("gain vector and distribution differ in length"));
    }
    if let Some(i) = true_gains.iter().position(|g| !(0.0..=1.0).contains(g)) {
        return Err(Error::invalid(format!("true gain {i} outside [0, 1]")));
    }
    let mut g = rng.rng();
    let mut sums = vec![0.0; p.len()];
    let mut max_norm: f64 = 0.0;
    for _ in 0..samples {
        let (arm, law) = select_mixed(p, gamma, g.random(), g.random())?;
        let est = estimate_gain(true_gains[arm], arm, &law)?;
        max_norm = max_norm.max(est.norm());
        for (s, v) in sums.iter_mut().zip(est.as_slice()) {
            *s += v;
        }
    }
    let max_error = sums
        .iter()
        .zip(true_gains)
        .map(|(s, g)| (s / samples as f64 - g).abs())
        .fold(0.0, f64::max);
    Ok(EstimatorCheck {
        max_error,
        max_norm,
        norm_bound: p.len() as f64 / gamma,
    })
}

/// One line of the audit CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub run: u64,
    pub metric: String,
    pub value: f64,
    pub interval_start: Option<usize>,
    pub interval_end: Option<usize>,
    pub arm: Option<usize>,
}

impl AuditRow {
    pub fn scalar(run: u64, metric: impl Into<String>, value: f64) -> Self {
        Self {
            run,
            metric: metric.into(),
            value,
            interval_start: None,
            interval_end: None,
            arm: None,
        }
    }
}

/// Writes `run,metric,value,interval_start,interval_end,arm`; missing fields are empty.
pub fn write_audit_csv<W: Write>(out: W, rows: &[AuditRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::invalid(format!("writing audit CSV: {e}"));
    w.write_record(["run", "metric", "value", "interval_start", "interval_end", "arm"])
        .map_err(to_err)?;
    let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.run.to_string(),
            r.metric.clone(),
            crate::harness::format_sig9(r.value),
            opt(r.interval_start),
            opt(r.interval_end),
            opt(r.arm),
        ])
        .map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::invalid(format!("writing audit CSV: {e}")))
}

pub fn write_audit_csv_file(path: impl AsRef<Path>, rows: &[AuditRow]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_audit_csv(std::io::BufWriter::new(f), rows)
}
