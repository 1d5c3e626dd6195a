//! The weakly adaptive adversarial bandit policy.
//!
//! Each round the policy explores uniformly with probability `gamma` and
//! otherwise samples from the distribution held by an internal
//! [`OgdState`]. The observed gain of the pulled arm is turned into an
//! importance-weighted estimate of the full gain vector, which is then fed to
//! the OGD learner as if it were full information.
//!
//! Parameters for `N` arms and horizon `T`:
//!
//! * `gamma = min(1, sqrt(N) * T^(-1/4))`
//! * OGD gain bound `G = N / gamma` (the largest possible estimated gain)
//! * OGD step size `eta = sqrt(2) * gamma / (N * sqrt(T))`, which is the
//!   recommended step `sqrt(2) / (G sqrt(T))` for that `G`.

use crate::error::{Error, Result};
use crate::ogd::OgdState;
use crate::policy::{check_observation, Policy, Turn};
use crate::simplex::{mix_with_uniform, sample_arm, ProbabilityVector};

/// `min(1, sqrt(N) * T^(-1/4))`.
pub fn exploration_probability(n_arms: usize, horizon: u64) -> f64 {
    let raw = (n_arms as f64).sqrt() * (horizon.max(1) as f64).powf(-0.25);
    raw.min(1.0)
}

/// Draws an arm from the `gamma`-mixture of `p` and the uniform law.
///
/// `u_explore < gamma` selects the exploration branch, in which case `u_arm`
/// picks an arm uniformly; otherwise `u_arm` samples from `p`. The returned
/// distribution is always the mixture, the true sampling law of the arm.
pub fn select_mixed(
    p: &ProbabilityVector,
    gamma: f64,
    u_explore: f64,
    u_arm: f64,
) -> Result<(usize, ProbabilityVector)> {
    let law = mix_with_uniform(p, gamma)?;
    let n = p.len();
    let arm = if u_explore < gamma {
        ((u_arm * n as f64) as usize).min(n - 1)
    } else {
        sample_arm(p, u_arm)
    };
    Ok((arm, law))
}

/// Importance-weighted gain estimate: one nonzero entry at the pulled arm.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedGainVector(Vec<f64>);

impl EstimatedGainVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// `observed / P(J = arm)` at position `arm`, zero elsewhere.
pub fn estimate_gain(
    observed: f64,
    arm: usize,
    play_distribution: &ProbabilityVector,
) -> Result<EstimatedGainVector> {
    if arm >= play_distribution.len() {
        return Err(Error::invalid(format!(
            "arm {arm} out of range for {} arms",
            play_distribution.len()
        )));
    }
    let prob = play_distribution[arm];
    if !(prob > 0.0) {
        return Err(Error::contract(format!(
            "arm {arm} was pulled with zero probability"
        )));
    }
    let mut values = vec![0.0; play_distribution.len()];
    values[arm] = observed / prob;
    Ok(EstimatedGainVector(values))
}

#[derive(Debug, Clone)]
pub struct WaMabState {
    n_arms: usize,
    horizon: u64,
    gamma: f64,
    ogd: OgdState,
    last_play_distribution: ProbabilityVector,
    turn: Turn,
    round: u64,
}

impl WaMabState {
    pub fn new(n_arms: usize, horizon: u64) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("need at least one arm"));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if (horizon as u128) < (n_arms as u128).pow(2) {
            log::warn!(
                "horizon {horizon} is below n_arms^2 = {}; the high-probability regret bound does not apply",
                n_arms * n_arms
            );
        }
        let gamma = exploration_probability(n_arms, horizon);
        let n = n_arms as f64;
        let gain_bound = n / gamma;
        let eta = std::f64::consts::SQRT_2 * gamma / (n * (horizon as f64).sqrt());
        let ogd = OgdState::new(n_arms, eta, gain_bound, None)?;
        let last_play_distribution = mix_with_uniform(ogd.distribution(), gamma)?;
        Ok(Self {
            n_arms,
            horizon,
            gamma,
            ogd,
            last_play_distribution,
            turn: Turn::default(),
            round: 0,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn ogd(&self) -> &OgdState {
        &self.ogd
    }

    /// The OGD distribution `p_t` before exploration is mixed in.
    pub fn distribution(&self) -> &ProbabilityVector {
        self.ogd.distribution()
    }

    /// The mixed law `(1 - gamma) p_t + gamma / N` of the most recent pull.
    pub fn last_play_distribution(&self) -> &ProbabilityVector {
        &self.last_play_distribution
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Picks this round's arm from two independent uniform draws.
    pub fn select_with(&mut self, u_explore: f64, u_arm: f64) -> Result<(usize, ProbabilityVector)> {
        self.turn.check_select()?;
        let (arm, law) = select_mixed(self.ogd.distribution(), self.gamma, u_explore, u_arm)?;
        self.last_play_distribution = law.clone();
        self.turn.selected(arm);
        Ok((arm, law))
    }

    /// Builds the gain estimate for `arm` and advances the OGD learner.
    pub fn feed(&mut self, arm: usize, observed: f64) -> Result<()> {
        check_observation(observed)?;
        self.turn.check_feed(arm)?;
        let estimate = estimate_gain(observed, arm, &self.last_play_distribution)?;
        self.ogd.update(estimate.as_slice())?;
        self.turn.fed();
        self.round += 1;
        Ok(())
    }
}

impl Policy for WaMabState {
    fn name(&self) -> String {
        "wamab".into()
    }

    fn n_arms(&self) -> usize {
        self.n_arms
    }

    fn select(&mut self, rng: &mut dyn rand::RngCore) -> Result<usize> {
        use rand::Rng;
        let u_explore: f64 = rng.random();
        let u_arm: f64 = rng.random();
        self.select_with(u_explore, u_arm).map(|(arm, _)| arm)
    }

    fn feed(&mut self, arm: usize, observed: f64) -> Result<()> {
        WaMabState::feed(self, arm, observed)
    }

    fn play_distribution(&self) -> Option<ProbabilityVector> {
        Some(self.last_play_distribution.clone())
    }
}
