//! Online gradient ascent over the simplex for the full-information expert problem.
//!
//! Each round the learner plays `p_t`, sees the whole gain vector `g_t`, and
//! moves to `Proj(p_t + eta * g_t)`. With `eta = sqrt(2) / (G sqrt(T))` the
//! regret on every subinterval of `[T]` is at most `G sqrt(2T)`, provided every
//! gain vector has Euclidean norm at most `G`. That precondition is enforced.

use crate::error::{Error, Result};
use crate::simplex::{project_to_simplex, ProbabilityVector};

/// Relative slack on the gain-norm check, absorbing rounding in `N / gamma`.
const NORM_SLACK: f64 = 1e-9;

/// `sqrt(2) / (G sqrt(T))`.
pub fn recommended_step_size(gain_bound: f64, horizon: u64) -> Result<f64> {
    if !(gain_bound > 0.0) || !gain_bound.is_finite() {
        return Err(Error::invalid(format!("gain bound must be positive, got {gain_bound}")));
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    Ok(std::f64::consts::SQRT_2 / (gain_bound * (horizon as f64).sqrt()))
}

#[derive(Debug, Clone)]
pub struct OgdState {
    p: ProbabilityVector,
    eta: f64,
    gain_bound: f64,
    round: u64,
}

impl OgdState {
    /// Starts from `p0`, or from the uniform distribution when `p0` is `None`.
    pub fn new(
        n_arms: usize,
        eta: f64,
        gain_bound: f64,
        p0: Option<ProbabilityVector>,
    ) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("need at least one arm"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!("step size must be positive, got {eta}")));
        }
        if !(gain_bound > 0.0) || !gain_bound.is_finite() {
            return Err(Error::invalid(format!("gain bound must be positive, got {gain_bound}")));
        }
        let p = match p0 {
            Some(p) if p.len() != n_arms => {
                return Err(Error::invalid(format!(
                    "initial distribution has {} weights but there are {n_arms} arms",
                    p.len()
                )))
            }
            Some(p) => p,
            None => ProbabilityVector::uniform(n_arms)?,
        };
        Ok(Self {
            p,
            eta,
            gain_bound,
            round: 0,
        })
    }

    /// Uniform start with the recommended step size for `horizon`.
    pub fn with_horizon(n_arms: usize, gain_bound: f64, horizon: u64) -> Result<Self> {
        let eta = recommended_step_size(gain_bound, horizon)?;
        Self::new(n_arms, eta, gain_bound, None)
    }

    pub fn distribution(&self) -> &ProbabilityVector {
        &self.p
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gain_bound(&self) -> f64 {
        self.gain_bound
    }

    /// Number of updates applied so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn n_arms(&self) -> usize {
        self.p.len()
    }

    /// `p <- Proj(p + eta * gains)`.
    pub fn update(&mut self, gains: &[f64]) -> Result<()> {
        if gains.len() != self.p.len() {
            return Err(Error::invalid(format!(
                "gain vector has {} entries, expected {}",
                gains.len(),
                self.p.len()
            )));
        }
        if let Some(i) = gains.iter().position(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::invalid(format!(
                "round {}: gain {i} must be finite and nonnegative, got {}",
                self.round + 1,
                gains[i]
            )));
        }
        let norm = gains.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > self.gain_bound * (1.0 + NORM_SLACK) {
            return Err(Error::contract(format!(
                "round {}: gain norm {norm} exceeds bound {}",
                self.round + 1,
                self.gain_bound
            )));
        }
        let stepped: Vec<f64> = self
            .p
            .as_slice()
            .iter()
            .zip(gains)
            .map(|(p, g)| p + self.eta * g)
            .collect();
        self.p = project_to_simplex(&stepped)?;
        self.round += 1;
        Ok(())
    }
}
