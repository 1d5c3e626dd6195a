//! Euclidean geometry of the probability simplex.
//!
//! [`ProbabilityVector`] is the only way distributions over arms move through
//! the crate. Construction checks nonnegativity and renormalizes sums that
//! drift from 1 by at most [`SUM_TOLERANCE`]; anything worse is rejected.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest deviation of a weight sum from 1 that construction will absorb.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A point on the (N-1)-dimensional probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates `weights` and renormalizes small floating-point drift.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("probability vector must have at least one weight"));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::invalid(format!("weight {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|&w| w < 0.0) {
            return Err(Error::invalid(format!(
                "weight {i} is negative ({})",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "weights sum to {total}, not 1 within {SUM_TOLERANCE:e}"
            )));
        }
        let mut weights = weights;
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self(weights))
    }

    /// Skips validation. Callers must already satisfy the invariants up to rounding.
    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        debug_assert!(!weights.is_empty());
        debug_assert!(weights.iter().all(|&w| w >= 0.0));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-6);
        Self(weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("probability vector must have at least one weight"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// All mass on arm `arm`.
    pub fn vertex(n: usize, arm: usize) -> Result<Self> {
        if arm >= n {
            return Err(Error::invalid(format!("arm {arm} out of range for {n} arms")));
        }
        let mut w = vec![0.0; n];
        w[arm] = 1.0;
        Ok(Self(w))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Inner product with a gain vector of the same length.
    pub fn dot(&self, gains: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), gains.len());
        self.0.iter().zip(gains).map(|(p, g)| p * g).sum()
    }
}

impl Index<usize> for ProbabilityVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

/// Euclidean projection of `v` onto the simplex.
///
/// Sort-based threshold method: find the largest `rho` such that the `rho`
/// biggest entries stay positive after subtracting a common `theta`, then
/// return `max(v_i - theta, 0)`. Runs in `O(N log N)`.
pub fn project_to_simplex(v: &[f64]) -> Result<ProbabilityVector> {
    if v.is_empty() {
        return Err(Error::invalid("cannot project an empty vector"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("entry {i} is not finite")));
    }
    let theta = simplex_threshold(v);
    let mut w: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let total: f64 = w.iter().sum();
    // The support is nonempty, so total > 0; this only strips rounding.
    if total != 1.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    Ok(ProbabilityVector(w))
}

/// The KKT threshold `theta` with `sum_i max(v_i - theta, 0) = 1`.
pub fn simplex_threshold(v: &[f64]) -> f64 {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (j, &x) in sorted.iter().enumerate() {
        cumsum += x;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if x - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    theta
}

/// Inverse-CDF sampling with half-open intervals `[c_{i-1}, c_i)`.
///
/// `u` must lie in `[0, 1)`. If rounding leaves the final cumulative weight
/// below `u`, the last arm with positive weight is returned.
pub fn sample_arm(p: &ProbabilityVector, u: f64) -> usize {
    debug_assert!((0.0..1.0).contains(&u), "u = {u} outside [0, 1)");
    let mut cdf = 0.0;
    for (i, &w) in p.0.iter().enumerate() {
        cdf += w;
        if u < cdf {
            return i;
        }
    }
    p.0.iter().rposition(|&w| w > 0.0).unwrap_or(p.0.len() - 1)
}

/// `(1 - gamma) p + gamma / N`, the play law after uniform exploration.
pub fn mix_with_uniform(p: &ProbabilityVector, gamma: f64) -> Result<ProbabilityVector> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::invalid(format!("mixing rate {gamma} outside [0, 1]")));
    }
    let floor = gamma / p.len() as f64;
    let mixed = p.0.iter().map(|&w| (1.0 - gamma) * w + floor).collect();
    Ok(ProbabilityVector::from_raw(mixed))
}
