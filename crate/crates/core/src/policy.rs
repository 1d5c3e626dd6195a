//! The select/feed protocol shared by every scheduling policy, plus baselines.
//!
//! Policies see bandit feedback only: after `select` returns an arm, `feed`
//! receives the gain of that arm and nothing else. Calls must alternate.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bandit::WaMabState;
use crate::env::ServiceMatrix;
use crate::error::{Error, Result};
use crate::simplex::{sample_arm, ProbabilityVector};

pub trait Policy: Send {
    /// Identifier in config syntax, e.g. `"fixed:2"`.
    fn name(&self) -> String;

    fn n_arms(&self) -> usize;

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize>;

    fn feed(&mut self, arm: usize, observed: f64) -> Result<()>;

    /// Law the most recent arm was drawn from, when the policy has one.
    fn play_distribution(&self) -> Option<ProbabilityVector> {
        None
    }
}

/// Observed gains are normalized rates and must lie in `[0, 1]`.
pub(crate) fn check_observation(observed: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&observed) {
        return Err(Error::invalid(format!(
            "observed gain {observed} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Tracks select/feed alternation.
#[derive(Debug, Clone, Default)]
pub(crate) struct Turn {
    pending: Option<usize>,
}

impl Turn {
    pub(crate) fn check_select(&self) -> Result<()> {
        match self.pending {
            Some(arm) => Err(Error::contract(format!(
                "select called twice; arm {arm} was never fed"
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn selected(&mut self, arm: usize) {
        self.pending = Some(arm);
    }

    pub(crate) fn check_feed(&self, arm: usize) -> Result<()> {
        match self.pending {
            Some(p) if p == arm => Ok(()),
            Some(p) => Err(Error::contract(format!(
                "fed arm {arm} but arm {p} was selected"
            ))),
            None => Err(Error::contract("feed called without a preceding select")),
        }
    }

    pub(crate) fn fed(&mut self) {
        self.pending = None;
    }
}

/// EXP3 with importance-weighted log-weights and optional uniform mixing.
#[derive(Debug, Clone)]
pub struct Exp3State {
    log_weights: Vec<f64>,
    eta: f64,
    mix: f64,
    last_law: Option<ProbabilityVector>,
    turn: Turn,
}

impl Exp3State {
    pub fn new(n_arms: usize, eta: f64, mix: f64) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("need at least one arm"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid(format!("EXP3 step size must be positive, got {eta}")));
        }
        if !(0.0..1.0).contains(&mix) {
            return Err(Error::invalid(format!("EXP3 mixing rate {mix} outside [0, 1)")));
        }
        Ok(Self {
            log_weights: vec![0.0; n_arms],
            eta,
            mix,
            last_law: None,
            turn: Turn::default(),
        })
    }

    /// `eta = sqrt(2 ln N / (N T))`, no mixing.
    pub fn tuned(n_arms: usize, horizon: u64) -> Result<Self> {
        let n = n_arms as f64;
        let t = horizon.max(1) as f64;
        let eta = if n_arms > 1 {
            (2.0 * n.ln() / (n * t)).sqrt()
        } else {
            1.0 / t.sqrt()
        };
        Self::new(n_arms, eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Softmax of the log-weights, mixed with the uniform law at rate `mix`.
    pub fn distribution(&self) -> ProbabilityVector {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = self.log_weights.iter().map(|w| (w - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        let floor = self.mix / exp.len() as f64;
        ProbabilityVector::from_raw(
            exp.iter()
                .map(|e| (1.0 - self.mix) * e / total + floor)
                .collect(),
        )
    }

    /// Importance-weighted update of the pulled arm's log-weight.
    pub fn step(&mut self, arm: usize, observed: f64) -> Result<()> {
        check_observation(observed)?;
        self.turn.check_feed(arm)?;
        let prob = match &self.last_law {
            Some(law) => law[arm],
            None => self.distribution()[arm],
        };
        self.log_weights[arm] += self.eta * observed / prob;
        self.turn.fed();
        Ok(())
    }
}

impl Policy for Exp3State {
    fn name(&self) -> String {
        "exp3".into()
    }

    fn n_arms(&self) -> usize {
        self.log_weights.len()
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize> {
        self.turn.check_select()?;
        let law = self.distribution();
        let arm = sample_arm(&law, rng.random());
        self.last_law = Some(law);
        self.turn.selected(arm);
        Ok(arm)
    }

    fn feed(&mut self, arm: usize, observed: f64) -> Result<()> {
        self.step(arm, observed)
    }

    fn play_distribution(&self) -> Option<ProbabilityVector> {
        self.last_law.clone()
    }
}

/// Queue- and gain-oblivious baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleKind {
    Fixed(usize),
    Uniform,
    RoundRobin,
}

/// Arm chosen by a simple baseline in round `round` (counted from 0).
pub fn simple_select(kind: SimpleKind, n_arms: usize, round: u64, u: f64) -> Result<usize> {
    match kind {
        SimpleKind::Fixed(i) if i >= n_arms => Err(Error::invalid(format!(
            "fixed arm {i} out of range for {n_arms} arms"
        ))),
        SimpleKind::Fixed(i) => Ok(i),
        SimpleKind::Uniform => Ok(((u * n_arms as f64) as usize).min(n_arms - 1)),
        SimpleKind::RoundRobin => Ok((round % n_arms as u64) as usize),
    }
}

#[derive(Debug, Clone)]
pub struct SimplePolicy {
    kind: SimpleKind,
    n_arms: usize,
    round: u64,
    turn: Turn,
}

impl SimplePolicy {
    pub fn new(kind: SimpleKind, n_arms: usize) -> Result<Self> {
        if n_arms == 0 {
            return Err(Error::invalid("need at least one arm"));
        }
        simple_select(kind, n_arms, 0, 0.0)?;
        Ok(Self {
            kind,
            n_arms,
            round: 0,
            turn: Turn::default(),
        })
    }
}

impl Policy for SimplePolicy {
    fn name(&self) -> String {
        PolicySpec::from(self.kind).to_string()
    }

    fn n_arms(&self) -> usize {
        self.n_arms
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<usize> {
        self.turn.check_select()?;
        let u = match self.kind {
            SimpleKind::Uniform => rng.random(),
            _ => 0.0,
        };
        let arm = simple_select(self.kind, self.n_arms, self.round, u)?;
        self.turn.selected(arm);
        Ok(arm)
    }

    fn feed(&mut self, arm: usize, observed: f64) -> Result<()> {
        check_observation(observed)?;
        self.turn.check_feed(arm)?;
        self.turn.fed();
        self.round += 1;
        Ok(())
    }

    fn play_distribution(&self) -> Option<ProbabilityVector> {
        match self.kind {
            SimpleKind::Uniform => ProbabilityVector::uniform(self.n_arms).ok(),
            _ => None,
        }
    }
}

/// Offline benchmark: the arm with the largest total rate, lowest index on ties.
pub fn best_fixed_arm(services: &ServiceMatrix) -> Result<usize> {
    if services.horizon() == 0 {
        return Err(Error::invalid("service matrix is empty"));
    }
    let sums = services.column_sums();
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate() {
        if s > sums[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Policy identifier as written in experiment configs.
///
/// Accepted forms: `wamab`, `exp3`, `fixed:<arm>` (arm counted from 0),
/// `uniform`, `round_robin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicySpec {
    WaMab,
    Exp3,
    Fixed(usize),
    Uniform,
    RoundRobin,
}

impl PolicySpec {
    /// Instantiates the policy for `n_arms` arms and horizon `horizon`.
    pub fn build(&self, n_arms: usize, horizon: u64) -> Result<Box<dyn Policy>> {
        Ok(match *self {
            PolicySpec::WaMab => Box::new(WaMabState::new(n_arms, horizon)?),
            PolicySpec::Exp3 => Box::new(Exp3State::tuned(n_arms, horizon)?),
            PolicySpec::Fixed(i) => Box::new(SimplePolicy::new(SimpleKind::Fixed(i), n_arms)?),
            PolicySpec::Uniform => Box::new(SimplePolicy::new(SimpleKind::Uniform, n_arms)?),
            PolicySpec::RoundRobin => {
                Box::new(SimplePolicy::new(SimpleKind::RoundRobin, n_arms)?)
            }
        })
    }
}

impl From<SimpleKind> for PolicySpec {
    fn from(kind: SimpleKind) -> Self {
        match kind {
            SimpleKind::Fixed(i) => PolicySpec::Fixed(i),
            SimpleKind::Uniform => PolicySpec::Uniform,
            SimpleKind::RoundRobin => PolicySpec::RoundRobin,
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::WaMab => f.write_str("wamab"),
            PolicySpec::Exp3 => f.write_str("exp3"),
            PolicySpec::Fixed(i) => write!(f, "fixed:{i}"),
            PolicySpec::Uniform => f.write_str("uniform"),
            PolicySpec::RoundRobin => f.write_str("round_robin"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wamab" => Ok(PolicySpec::WaMab),
            "exp3" => Ok(PolicySpec::Exp3),
            "uniform" => Ok(PolicySpec::Uniform),
            "round_robin" => Ok(PolicySpec::RoundRobin),
            other => match other.strip_prefix("fixed:") {
                Some(arm) => arm
                    .parse()
                    .map(PolicySpec::Fixed)
                    .map_err(|_| Error::invalid(format!("bad fixed arm in policy {other:?}"))),
                None => Err(Error::invalid(format!("unknown policy {other:?}"))),
            },
        }
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> Self {
        p.to_string()
    }
}
