//! Brute-force reference computations.
//!
//! Each function here recomputes a quantity from its definition, with no code
//! shared with the fast path it checks. They back the `oracle` CLI command and
//! the test suites.

use rand::Rng;
use serde::Serialize;

use crate::audit::{
    max_interval_regret, policy_gains, Accounting, IntervalRegretReport, ScheduleTrace,
};
use crate::env::{RngStream, ServiceMatrix};
use crate::error::{Error, Result};
use crate::queue::{queue_closed_form, queue_trajectory, NetIncrementSequence};
use crate::simplex::project_to_simplex;

/// `Q(t) = max(0, max_{1 <= s <= t} sum_{k=s}^{t} b_k)` evaluated directly.
pub fn suffix_max_queue(increments: &[f64]) -> Vec<f64> {
    (0..increments.len())
        .map(|t| {
            (0..=t)
                .map(|s| increments[s..=t].iter().sum::<f64>())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Enumerates every interval and arm. `O(N T^2)`.
pub fn brute_force_interval_regret(
    services: &ServiceMatrix,
    trace: &ScheduleTrace,
    accounting: Accounting,
) -> Result<(f64, usize, usize, usize)> {
    let gains = policy_gains(services, trace, accounting)?;
    let horizon = services.horizon();
    let mut best: Option<(f64, (usize, usize, usize))> = None;
    for start in 0..horizon {
        for arm in 0..services.n_arms() {
            let mut acc = 0.0;
            for end in start..horizon {
                acc += services.get(end, arm) - gains[end];
                let key = (start, end, arm);
                let better = match best {
                    None => true,
                    Some((v, k)) => acc > v || (acc == v && key < k),
                };
                if better {
                    best = Some((acc, key));
                }
            }
        }
    }
    let (v, (s, e, a)) = best.ok_or_else(|| Error::invalid("empty schedule"))?;
    Ok((v, s + 1, e + 1, a))
}

/// Minimizes the distance to `v` over a grid of step `step` on the simplex.
/// Only `N <= 3` is supported.
pub fn grid_search_projection(v: &[f64], step: f64) -> Result<Vec<f64>> {
    let k = (1.0 / step).round() as usize;
    let dist = |w: &[f64]| -> f64 { w.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum() };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |w: Vec<f64>| {
        let d = dist(&w);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, w));
        }
    };
    match v.len() {
        1 => consider(vec![1.0]),
        2 => {
            for i in 0..=k {
                let a = i as f64 / k as f64;
                consider(vec![a, 1.0 - a]);
            }
        }
        3 => {
            for i in 0..=k {
                for j in 0..=k - i {
                    let a = i as f64 / k as f64;
                    let b = j as f64 / k as f64;
                    consider(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        n => return Err(Error::invalid(format!("grid search supports N <= 3, got {n}"))),
    }
    Ok(best.expect("grid is nonempty").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleCheck {
    Lindley,
    Interval,
    Projection,
}

impl std::str::FromStr for OracleCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lindley" => Ok(OracleCheck::Lindley),
            "interval" => Ok(OracleCheck::Interval),
            "projection" => Ok(OracleCheck::Projection),
            other => Err(Error::invalid(format!("unknown oracle check {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub check: OracleCheck,
    pub instances: usize,
    pub mismatches: usize,
    /// Largest absolute discrepancy seen.
    pub max_error: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Compares the fold, the incremental closed form, and [`suffix_max_queue`].
pub fn check_lindley(instances: usize, rng: &RngStream) -> OracleReport {
    let tol = 1e-9;
    let mut g = rng.rng();
    let mut mismatches = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..instances {
        let len = g.random_range(1..=200);
        let b: Vec<f64> = (0..len).map(|_| g.random_range(-5.0..=5.0)).collect();
        let arrivals: Vec<f64> = b.iter().map(|x| x.max(0.0)).collect();
        let services: Vec<f64> = b.iter().map(|x| (-x).max(0.0)).collect();
        let fold = queue_trajectory(&arrivals, &services).expect("valid flows");
        let closed = queue_closed_form(&NetIncrementSequence::new(b.clone()).expect("finite"));
        let direct = suffix_max_queue(&b);
        let mut bad = false;
        for t in 0..len {
            let e1 = (fold.lengths[t + 1] - closed[t]).abs();
            let e2 = (closed[t] - direct[t]).abs();
            max_error = max_error.max(e1).max(e2);
            bad |= e1 > tol || e2 > tol;
        }
        mismatches += usize::from(bad);
    }
    OracleReport {
        check: OracleCheck::Lindley,
        instances,
        mismatches,
        max_error,
        tolerance: tol,
    }
}

/// Compares the linear-time scan with full enumeration on random schedules.
pub fn check_interval(instances: usize, rng: &RngStream) -> OracleReport {
    let mut g = rng.rng();
    let mut mismatches = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..instances {
        let t = g.random_range(1..=64);
        let n = g.random_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..n).map(|_| g.random::<f64>()).collect())
            .collect();
        let services = ServiceMatrix::from_rows(rows).expect("rates in [0,1)");
        let arms: Vec<usize> = (0..t).map(|_| g.random_range(0..n)).collect();
        let trace = ScheduleTrace::from_arms(&services, arms).expect("valid arms");
        let fast: IntervalRegretReport =
            max_interval_regret(&services, &trace, Accounting::Realized).expect("valid trace");
        let (slow, ..) = brute_force_interval_regret(&services, &trace, Accounting::Realized)
            .expect("valid trace");
        let err = (fast.max_regret - slow).abs();
        max_error = max_error.max(err);
        mismatches += usize::from(fast.max_regret != slow);
    }
    OracleReport {
        check: OracleCheck::Interval,
        instances,
        mismatches,
        max_error,
        tolerance: 0.0,
    }
}

/// Compares the threshold projection with a `1e-3` grid search for `N <= 3`.
pub fn check_projection(instances: usize, rng: &RngStream) -> OracleReport {
    let tol = 2e-3;
    let mut g = rng.rng();
    let mut mismatches = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..instances {
        let n = g.random_range(1..=3);
        let v: Vec<f64> = (0..n).map(|_| g.random_range(-2.0..=2.0)).collect();
        let fast = project_to_simplex(&v).expect("finite input");
        let slow = grid_search_projection(&v, 1e-3).expect("n <= 3");
        let err = fast
            .as_slice()
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_error = max_error.max(err);
        mismatches += usize::from(err > tol);
    }
    OracleReport {
        check: OracleCheck::Projection,
        instances,
        mismatches,
        max_error,
        tolerance: tol,
    }
}

pub fn run_check(check: OracleCheck, rng: &RngStream) -> OracleReport {
    match check {
        OracleCheck::Lindley => check_lindley(1000, rng),
        OracleCheck::Interval => check_interval(200, rng),
        OracleCheck::Projection => check_projection(200, rng),
    }
}
