//! Experiment configs, seeded multi-run execution, aggregation, and CSV output.
//!
//! A run is fully determined by the config and its run index: the service
//! matrix, the arrivals, and each policy's coin flips come from separate
//! substreams of the master seed. Runs are executed in parallel but merged in
//! run-index order, so output bytes do not depend on the thread count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{
    check_pathwise_domination, max_interval_regret, theorem2_bound, Accounting, AuditRow,
};
use crate::env::{
    generate_arrivals, generate_service_matrix, ArrivalModel, ChannelModel, Purpose, RngStream,
    ServiceMatrix, StreamId,
};
use crate::error::{Error, Result};
use crate::network::{
    benchmark_traces, best_benchmark, enumerate_joint_assignments, network_peak, network_regret,
    simulate_network, JointAssignment, NetworkTopology,
};
use crate::policy::PolicySpec;
use crate::queue::{queue_length_regret, queue_regret_curve, QueueRegret};
use crate::sim::{fixed_arm_queues, run_policy};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides `master_seed` when set.
pub const SEED_ENV_VAR: &str = "QREGRET_SEED";

/// Runs are computed this many at a time before being folded into the
/// aggregate, which bounds memory without making the fold order depend on
/// scheduling.
const RUN_BATCH: usize = 64;

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditFlags {
    #[serde(default)]
    pub interval_regret: bool,
    #[serde(default)]
    pub domination: bool,
    #[serde(default)]
    pub theorem_bounds: bool,
    /// Failure probability used for the high-probability bound.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for AuditFlags {
    fn default() -> Self {
        Self {
            interval_regret: false,
            domination: false,
            theorem_bounds: false,
            delta: default_delta(),
        }
    }
}

impl AuditFlags {
    pub fn all() -> Self {
        Self {
            interval_regret: true,
            domination: true,
            theorem_bounds: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub n_arms: usize,
    pub horizon: usize,
    pub channel: ChannelModel,
    pub arrivals: ArrivalModel,
    #[serde(default)]
    pub policies: Vec<PolicySpec>,
    pub num_runs: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub audit: AuditFlags,
    /// Topology file for `network` runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative trace and topology paths are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => Error::input(path, m),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ChannelModel::Trace { path } = &mut cfg.channel {
            rebase(path);
        }
        if let ArrivalModel::Trace { path } = &mut cfg.arrivals {
            rebase(path);
        }
        if let Some(t) = &mut cfg.topology {
            rebase(t);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.horizon == 0 || self.n_arms == 0 || self.num_runs == 0 {
            return Err(Error::invalid("horizon, n_arms and num_runs must be at least 1"));
        }
        for p in &self.policies {
            if let PolicySpec::Fixed(i) = p {
                if *i >= self.n_arms {
                    return Err(Error::invalid(format!("policy {p} names a channel out of range")));
                }
            }
        }
        if !(self.audit.delta > 0.0 && self.audit.delta < 1.0) {
            return Err(Error::invalid(format!("audit delta {} outside (0, 1)", self.audit.delta)));
        }
        Ok(())
    }

    /// Shrinks the horizon and run count by `factor`, rounding up.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 1.0) || !factor.is_finite() {
            return Err(Error::invalid(format!("scale factor {factor} must be at least 1")));
        }
        let shrink = |x: usize| ((x as f64 / factor).ceil() as usize).max(1);
        Ok(Self {
            horizon: shrink(self.horizon),
            num_runs: shrink(self.num_runs),
            ..self.clone()
        })
    }

    /// Applies `QREGRET_SEED` if it is set.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Some(seed) = seed_override()? {
            self.master_seed = seed;
        }
        Ok(self)
    }

    fn stream(&self, purpose: Purpose, run: u64) -> RngStream {
        RngStream::new(self.master_seed, StreamId::new(purpose, run))
    }
}

/// The seed from `QREGRET_SEED`, if set.
pub fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::invalid(format!("{SEED_ENV_VAR}={v:?} is not a u64"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::invalid(format!("{SEED_ENV_VAR}: {e}"))),
    }
}

/// The channels and arrivals shared by every policy and benchmark of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub services: ServiceMatrix,
    pub arrivals: Vec<f64>,
}

pub fn materialize(config: &ExperimentConfig, run_index: u64) -> Result<Environment> {
    let services = generate_service_matrix(
        &config.channel,
        config.horizon,
        config.n_arms,
        &config.stream(Purpose::Services, run_index),
    )?;
    let arrivals = generate_arrivals(
        &config.arrivals,
        config.horizon,
        &config.stream(Purpose::Arrivals, run_index),
        Some(&services),
    )?;
    Ok(Environment { services, arrivals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSummary {
    pub max_regret: f64,
    pub start: usize,
    pub end: usize,
    pub arm: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOutcome {
    pub policy: PolicySpec,
    /// Running maximum `R_Q(t)` for `t = 1..=T`.
    pub curve: Vec<f64>,
    pub queue_regret: QueueRegret,
    /// Realized accounting.
    pub interval: Option<IntervalSummary>,
    /// Queue regret within the largest interval regret.
    pub dominated: Option<bool>,
    /// High-probability bound, reported for the bandit policy only.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub run_index: u64,
    pub policies: Vec<PolicyOutcome>,
    #[serde(skip)]
    pub wall_clock: Duration,
}

/// Timing is not part of a run's identity.
impl PartialEq for RunResult {
    fn eq(&self, other: &Self) -> bool {
        self.run_index == other.run_index && self.policies == other.policies
    }
}

impl RunResult {
    pub fn audit_rows(&self) -> Vec<AuditRow> {
        let mut rows = Vec::new();
        for o in &self.policies {
            let p = &o.policy;
            rows.push(AuditRow {
                run: self.run_index,
                metric: format!("queue_regret/{p}"),
                value: o.queue_regret.value,
                interval_start: Some(o.queue_regret.slot),
                interval_end: Some(o.queue_regret.slot),
                arm: Some(o.queue_regret.arm),
            });
            if let Some(i) = &o.interval {
                rows.push(AuditRow {
                    run: self.run_index,
                    metric: format!("max_interval_regret/{p}"),
                    value: i.max_regret,
                    interval_start: Some(i.start),
                    interval_end: Some(i.end),
                    arm: Some(i.arm),
                });
            }
            if let Some(d) = o.dominated {
                rows.push(AuditRow::scalar(self.run_index, format!("dominated/{p}"), f64::from(u8::from(d))));
            }
            if let (Some(b), Some(w)) = (o.bound, o.within_bound) {
                rows.push(AuditRow::scalar(self.run_index, format!("theorem2_bound/{p}"), b));
                rows.push(AuditRow::scalar(self.run_index, format!("within_bound/{p}"), f64::from(u8::from(w))));
            }
        }
        rows
    }
}

/// Simulates every configured policy and all fixed-arm benchmarks on the
/// environment of `run_index`.
pub fn run_single(config: &ExperimentConfig, run_index: u64) -> Result<RunResult> {
    run_single_inner(config, run_index).map_err(|e| Error::Run {
        run: run_index,
        source: Box::new(e),
    })
}

fn run_single_inner(config: &ExperimentConfig, run_index: u64) -> Result<RunResult> {
    let started = Instant::now();
    config.validate()?;
    let env = materialize(config, run_index)?;
    let benchmarks = fixed_arm_queues(&env.services, &env.arrivals)?;
    let horizon = config.horizon as u64;
    let policies = config
        .policies
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let mut policy = spec.build(config.n_arms, horizon)?;
            let stream = config.stream(Purpose::Policy, run_index);
            let mut rng = stream.with_id(stream.id.node(k as u32)).rng();
            let run = run_policy(policy.as_mut(), &env.services, &env.arrivals, &mut rng)?;
            let curve = queue_regret_curve(&run.queue, &benchmarks)?;
            let queue_regret = queue_length_regret(&run.queue, &benchmarks)?;
            let audits = &config.audit;
            let interval = if audits.interval_regret || audits.domination {
                let r = max_interval_regret(&env.services, &run.schedule, Accounting::Realized)?;
                let dominated = audits.domination.then(|| check_pathwise_domination(queue_regret.value, &r));
                Some((
                    IntervalSummary {
                        max_regret: r.max_regret,
                        start: r.start,
                        end: r.end,
                        arm: r.best_arm,
                    },
                    dominated,
                ))
            } else {
                None
            };
            let (bound, within_bound) = match (&interval, spec) {
                (Some((i, _)), PolicySpec::WaMab) if audits.theorem_bounds => {
                    let b = theorem2_bound(config.n_arms, horizon, audits.delta)?;
                    (Some(b), Some(i.max_regret <= b))
                }
                _ => (None, None),
            };
            let (interval, dominated) = match interval {
                Some((i, d)) => (audits.interval_regret.then_some(i), d),
                None => (None, None),
            };
            Ok(PolicyOutcome {
                policy: *spec,
                curve,
                queue_regret,
                interval,
                dominated,
                bound,
                within_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunResult {
        run_index,
        policies,
        wall_clock: started.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyAggregate {
    pub policy: PolicySpec,
    /// Per-slot mean of `R_Q(t)` over runs.
    pub mean: Vec<f64>,
    /// Per-slot standard error (sample deviation over `sqrt(n)`; 0 for one run).
    pub stderr: Vec<f64>,
    /// Final queue regret of every run, in run order.
    pub final_regrets: Vec<f64>,
}

impl PolicyAggregate {
    pub fn mean_final(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub horizon: usize,
    pub n_runs: usize,
    pub policies: Vec<PolicyAggregate>,
}

/// Welford accumulator per slot.
struct SlotStats {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl SlotStats {
    fn new(horizon: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; horizon],
            m2: vec![0.0; horizon],
        }
    }

    fn push(&mut self, curve: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(curve) {
            let d = x - *m;
            *m += d / n;
            *s += d * (x - *m);
        }
    }

    fn stderr(&self) -> Vec<f64> {
        if self.n < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.n as f64;
        self.m2.iter().map(|s| (s / (n - 1.0)).sqrt() / n.sqrt()).collect()
    }
}

/// Runs `1..=num_runs` and averages the regret curves per policy.
pub fn run_many(config: &ExperimentConfig) -> Result<AggregateResult> {
    run_many_with(config, None, |_| {})
}

/// [`run_many`] with an optional thread count and a callback that sees each
/// run, in run-index order.
pub fn run_many_with(
    config: &ExperimentConfig,
    threads: Option<usize>,
    mut on_run: impl FnMut(&RunResult),
) -> Result<AggregateResult> {
    config.validate()?;
    let mut stats: Vec<SlotStats> = config.policies.iter().map(|_| SlotStats::new(config.horizon)).collect();
    let mut finals: Vec<Vec<f64>> = vec![Vec::with_capacity(config.num_runs); config.policies.len()];
    let mut fold = |runs: Vec<RunResult>| {
        for r in &runs {
            for ((o, s), f) in r.policies.iter().zip(&mut stats).zip(&mut finals) {
                s.push(&o.curve);
                f.push(o.queue_regret.value);
            }
            on_run(r);
        }
    };
    let pool = threads
        .map(|n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Resource(format!("thread pool: {e}")))
        })
        .transpose()?;
    let indices: Vec<u64> = (1..=config.num_runs as u64).collect();
    for batch in indices.chunks(RUN_BATCH) {
        let compute = || {
            batch
                .par_iter()
                .map(|&i| run_single(config, i))
                .collect::<Result<Vec<_>>>()
        };
        let runs = match &pool {
            Some(p) => p.install(compute)?,
            None => compute()?,
        };
        fold(runs);
    }
    let policies = config
        .policies
        .iter()
        .zip(stats)
        .zip(finals)
        .map(|((&policy, s), final_regrets)| PolicyAggregate {
            policy,
            stderr: s.stderr(),
            mean: s.mean,
            final_regrets,
        })
        .collect();
    Ok(AggregateResult {
        horizon: config.horizon,
        n_runs: config.num_runs,
        policies,
    })
}

/// `x` as a plain decimal with 9 significant digits. Magnitudes outside
/// `[1e-20, 1e21)` fall back to scientific notation.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-20..=20).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else if exp >= 8 {
        format!("{digits}{}", "0".repeat((exp - 8) as usize))
    } else {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// Writes `policy,t,mean_queue_regret,stderr,n_runs`, slot-major.
pub fn write_csv<W: Write>(result: &AggregateResult, out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::invalid(format!("writing CSV: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["policy", "t", "mean_queue_regret", "stderr", "n_runs"])
        .map_err(to_err)?;
    let n_runs = result.n_runs.to_string();
    for t in 0..result.horizon {
        let slot = (t + 1).to_string();
        for p in &result.policies {
            w.write_record([
                p.policy.to_string().as_str(),
                &slot,
                &format_sig9(p.mean[t]),
                &format_sig9(p.stderr[t]),
                &n_runs,
            ])
            .map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| Error::invalid(format!("writing CSV: {e}")))
}

pub fn emit_csv(result: &AggregateResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(result, std::io::BufWriter::new(f)).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::input(path, m),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRunRow {
    pub run: u64,
    pub policy: PolicySpec,
    /// Per-node regret against every joint assignment, maximized over nodes.
    pub network_regret: f64,
    pub argmax_node: String,
    pub policy_peak: f64,
    /// Joint assignment with the smallest network-wide peak queue.
    pub best_assignment: JointAssignment,
    pub best_peak: f64,
}

/// Runs every configured policy on the config's topology, one policy per
/// node, against all joint fixed assignments.
///
/// Each node gets its own service matrix; exogenous nodes get their own
/// arrivals, with an automatic rate resolved against that node's channels.
pub fn run_network(config: &ExperimentConfig) -> Result<Vec<NetworkRunRow>> {
    config.validate()?;
    let path = config
        .topology
        .as_ref()
        .ok_or_else(|| Error::invalid("network runs need a topology path in the config"))?;
    let topology = NetworkTopology::from_csv_path(path, config.n_arms)?;
    let assignments = enumerate_joint_assignments(&topology)?;
    let mut rows = Vec::new();
    for run in 1..=config.num_runs as u64 {
        let wrap = |e: Error| Error::Run {
            run,
            source: Box::new(e),
        };
        let mut services = Vec::with_capacity(topology.len());
        let mut exogenous = Vec::with_capacity(topology.len());
        for v in 0..topology.len() {
            let node_stream = |purpose| {
                let s = config.stream(purpose, run);
                s.with_id(s.id.node(v as u32))
            };
            let s = generate_service_matrix(&config.channel, config.horizon, config.n_arms, &node_stream(Purpose::Services))
                .map_err(wrap)?;
            let a = if topology.is_exogenous(v) {
                generate_arrivals(&config.arrivals, config.horizon, &node_stream(Purpose::Arrivals), Some(&s))
                    .map_err(wrap)?
            } else {
                vec![0.0; config.horizon]
            };
            services.push(s);
            exogenous.push(a);
        }
        let benchmarks = benchmark_traces(&topology, &services, &exogenous, &assignments).map_err(wrap)?;
        let (best_assignment, best_peak) = best_benchmark(&benchmarks).expect("assignments are nonempty");
        for (k, spec) in config.policies.iter().enumerate() {
            let mut policies = (0..topology.len())
                .map(|_| spec.build(config.n_arms, config.horizon as u64))
                .collect::<Result<Vec<_>>>()
                .map_err(wrap)?;
            let s = config.stream(Purpose::Policy, run);
            let stream = s.with_id(s.id.channel(k as u32));
            let trace = simulate_network(&topology, &services, &exogenous, &mut policies, &stream).map_err(wrap)?;
            let regret = network_regret(&trace, &benchmarks).map_err(wrap)?;
            rows.push(NetworkRunRow {
                run,
                policy: *spec,
                network_regret: regret.value,
                argmax_node: topology.nodes()[regret.node].clone(),
                policy_peak: network_peak(&trace),
                best_assignment: best_assignment.clone(),
                best_peak,
            });
        }
    }
    Ok(rows)
}

/// Writes `run,policy,network_regret,argmax_node,policy_peak,best_assignment,best_peak`;
/// the assignment is `;`-separated arms in node order.
pub fn write_network_csv<W: Write>(rows: &[NetworkRunRow], out: W) -> Result<()> {
    let to_err = |e: csv::Error| Error::invalid(format!("writing CSV: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record([
        "run",
        "policy",
        "network_regret",
        "argmax_node",
        "policy_peak",
        "best_assignment",
        "best_peak",
    ])
    .map_err(to_err)?;
    for r in rows {
        let assignment: Vec<String> = r.best_assignment.0.iter().map(ToString::to_string).collect();
        w.write_record([
            r.run.to_string(),
            r.policy.to_string(),
            format_sig9(r.network_regret),
            r.argmax_node.clone(),
            format_sig9(r.policy_peak),
            assignment.join(";"),
            format_sig9(r.best_peak),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("writing CSV: {e}")))
}
