//! Channel scheduling with queue-length regret guarantees.
//!
//! The crate simulates a fluid queue served over one of `N` time-varying
//! channels, learns which channel to use with a weakly adaptive bandit
//! (online gradient descent on the simplex with uniform exploration and
//! importance-weighted gain estimates), and audits the resulting schedules:
//! queue-length regret against every fixed channel, interval regret over all
//! subintervals, and the bounds the learner is meant to satisfy.
//!
//! Arms are counted from 0. Slots are counted from 1 wherever they appear in
//! reports; `QueueTrace::lengths[0]` is the empty initial queue.

pub mod audit;
pub mod bandit;
pub mod cli;
pub mod env;
pub mod error;
pub mod harness;
pub mod network;
pub mod ogd;
pub mod oracle;
pub mod policy;
pub mod queue;
pub mod sim;
pub mod simplex;

pub use audit::{max_interval_regret, Accounting, IntervalRegretReport, ScheduleTrace};
pub use bandit::WaMabState;
pub use env::{ArrivalModel, ChannelModel, RngStream, ServiceMatrix, StreamId};
pub use error::{Error, Result};
pub use harness::{run_many, run_single, ExperimentConfig};
pub use ogd::OgdState;
pub use policy::{Exp3State, Policy, PolicySpec};
pub use queue::{queue_length_regret, queue_trajectory, QueueTrace};
pub use simplex::{project_to_simplex, ProbabilityVector};
