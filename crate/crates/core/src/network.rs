//! Multihop networks with fixed routing and per-node channel scheduling.
//!
//! Every node runs its own policy over its own channels. Traffic served at a
//! node in slot `t` arrives at its next hop in slot `t + 1`; sinks absorb it.
//! The benchmark for network regret is the set of joint fixed assignments,
//! one channel per node held for the whole horizon.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::audit::ScheduleTrace;
use crate::env::{Purpose, RngStream, ServiceMatrix};
use crate::error::{Error, Result};
use crate::policy::{Policy, SimpleKind, SimplePolicy};
use crate::queue::{lindley_step, QueueTrace};

/// Largest number of joint assignments we are willing to enumerate.
pub const MAX_JOINT_ASSIGNMENTS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    nodes: Vec<String>,
    next_hop: Vec<Option<usize>>,
    exogenous: Vec<bool>,
    channels_per_node: usize,
}

/// One line of a topology file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub node: String,
    /// `None` routes to the sink.
    pub next_hop: Option<String>,
    pub exogenous: bool,
}

impl NetworkTopology {
    pub fn new(specs: Vec<NodeSpec>, channels_per_node: usize) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::invalid("topology has no nodes"));
        }
        if channels_per_node == 0 {
            return Err(Error::invalid("nodes need at least one channel"));
        }
        let mut index = HashMap::new();
        for (i, s) in specs.iter().enumerate() {
            if index.insert(s.node.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate node {:?}", s.node)));
            }
        }
        let next_hop = specs
            .iter()
            .map(|s| match &s.next_hop {
                None => Ok(None),
                Some(h) => index
                    .get(h)
                    .copied()
                    .map(Some)
                    .ok_or_else(|| Error::invalid(format!("node {:?} routes to unknown node {h:?}", s.node))),
            })
            .collect::<Result<Vec<_>>>()?;
        let n = specs.len();
        for start in 0..n {
            let mut v = start;
            let mut steps = 0;
            while let Some(next) = next_hop[v] {
                v = next;
                steps += 1;
                if steps > n {
                    return Err(Error::invalid(format!(
                        "routing from node {:?} never reaches a sink",
                        specs[start].node
                    )));
                }
            }
        }
        Ok(Self {
            nodes: specs.iter().map(|s| s.node.clone()).collect(),
            next_hop,
            exogenous: specs.iter().map(|s| s.exogenous).collect(),
            channels_per_node,
        })
    }

    /// `n` nodes in a line: `0 -> 1 -> ... -> n-1 -> sink`, traffic entering at node 0.
    pub fn line(n: usize, channels_per_node: usize) -> Result<Self> {
        let specs = (0..n)
            .map(|i| NodeSpec {
                node: i.to_string(),
                next_hop: (i + 1 < n).then(|| (i + 1).to_string()),
                exogenous: i == 0,
            })
            .collect();
        Self::new(specs, channels_per_node)
    }

    /// Parses `node,next_hop,exogenous` rows. An empty next hop, `sink`, or
    /// `-` routes to the sink; `exogenous` is `0` or `1`.
    pub fn from_csv_path(path: impl AsRef<Path>, channels_per_node: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::input(path, e.to_string()))?;
        let header = rdr
            .headers()
            .map_err(|e| Error::input(path, e.to_string()))?
            .clone();
        if header.iter().ne(["node", "next_hop", "exogenous"]) {
            return Err(Error::input(path, "header must be node,next_hop,exogenous"));
        }
        let mut specs = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec.map_err(|e| Error::input(path, e.to_string()))?;
            let exogenous = match &rec[2] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::input(path, format!("line {line}: exogenous must be 0 or 1, got {other:?}")))
                }
            };
            let next_hop = match &rec[1] {
                "" | "sink" | "-" => None,
                h => Some(h.to_string()),
            };
            specs.push(NodeSpec {
                node: rec[0].to_string(),
                next_hop,
                exogenous,
            });
        }
        Self::new(specs, channels_per_node).map_err(|e| Error::input(path, e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn next_hop(&self, node: usize) -> Option<usize> {
        self.next_hop[node]
    }

    pub fn is_exogenous(&self, node: usize) -> bool {
        self.exogenous[node]
    }

    pub fn channels_per_node(&self) -> usize {
        self.channels_per_node
    }
}

/// One fixed channel per node, indexed like the topology's nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct JointAssignment(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkTrace {
    pub queues: Vec<QueueTrace>,
    pub schedules: Vec<ScheduleTrace>,
    /// Total arrivals (exogenous plus forwarded) per node and slot.
    pub arrivals: Vec<Vec<f64>>,
}

impl NetworkTrace {
    pub fn horizon(&self) -> usize {
        self.arrivals.first().map_or(0, Vec::len)
    }
}

fn check_inputs(
    topology: &NetworkTopology,
    services: &[ServiceMatrix],
    exogenous: &[Vec<f64>],
) -> Result<usize> {
    let n = topology.len();
    if services.len() != n || exogenous.len() != n {
        return Err(Error::invalid(format!(
            "topology has {n} nodes but got {} service matrices and {} arrival sequences",
            services.len(),
            exogenous.len()
        )));
    }
    let horizon = services[0].horizon();
    for (v, (s, a)) in services.iter().zip(exogenous).enumerate() {
        if s.horizon() != horizon || s.n_arms() != topology.channels_per_node() {
            return Err(Error::invalid(format!(
                "node {v}: service matrix is {}x{}, expected {horizon}x{}",
                s.horizon(),
                s.n_arms(),
                topology.channels_per_node()
            )));
        }
        if a.len() != horizon {
            return Err(Error::invalid(format!("node {v}: {} arrivals for horizon {horizon}", a.len())));
        }
        if !topology.is_exogenous(v) && a.iter().any(|&x| x != 0.0) {
            return Err(Error::invalid(format!("node {v} is not exogenous but has external arrivals")));
        }
    }
    Ok(horizon)
}

/// Slot-synchronous simulation with one policy per node.
///
/// Node `v` draws its randomness from `rng` relabelled with
/// `Purpose::Policy` and node `v`.
pub fn simulate_network(
    topology: &NetworkTopology,
    services: &[ServiceMatrix],
    exogenous: &[Vec<f64>],
    policies: &mut [Box<dyn Policy>],
    rng: &RngStream,
) -> Result<NetworkTrace> {
    let horizon = check_inputs(topology, services, exogenous)?;
    let n = topology.len();
    if policies.len() != n {
        return Err(Error::invalid(format!("{} policies for {n} nodes", policies.len())));
    }
    let mut rngs: Vec<_> = (0..n)
        .map(|v| {
            let mut id = rng.id.node(v as u32);
            id.purpose = Purpose::Policy;
            rng.with_id(id).rng()
        })
        .collect();
    let mut q = vec![0.0; n];
    let mut lengths: Vec<Vec<f64>> = vec![vec![0.0]; n];
    let mut departures: Vec<Vec<f64>> = vec![Vec::with_capacity(horizon); n];
    let mut arms: Vec<Vec<usize>> = vec![Vec::with_capacity(horizon); n];
    let mut observed: Vec<Vec<f64>> = vec![Vec::with_capacity(horizon); n];
    let mut arrivals: Vec<Vec<f64>> = vec![Vec::with_capacity(horizon); n];
    let mut in_flight = vec![0.0; n];
    for t in 0..horizon {
        let mut next_flight = vec![0.0; n];
        for v in 0..n {
            let inbound = exogenous[v][t] + in_flight[v];
            let arm = policies[v].select(&mut rngs[v])?;
            if arm >= topology.channels_per_node() {
                return Err(Error::contract(format!("node {v} chose arm {arm}")));
            }
            let gain = services[v].get(t, arm);
            policies[v].feed(arm, gain)?;
            let (next, gone) = lindley_step(q[v], inbound, gain)?;
            q[v] = next;
            if let Some(h) = topology.next_hop(v) {
                next_flight[h] += gone;
            }
            lengths[v].push(next);
            departures[v].push(gone);
            arms[v].push(arm);
            observed[v].push(gain);
            arrivals[v].push(inbound);
        }
        in_flight = next_flight;
    }
    let queues = lengths
        .into_iter()
        .zip(departures)
        .map(|(lengths, departures)| QueueTrace {
            lengths,
            departures,
        })
        .collect();
    let schedules = arms
        .into_iter()
        .zip(observed)
        .map(|(arms, observed_gains)| ScheduleTrace {
            arms,
            play_distributions: None,
            observed_gains,
        })
        .collect();
    Ok(NetworkTrace {
        queues,
        schedules,
        arrivals,
    })
}

/// Simulates every node holding its assigned channel fixed.
pub fn simulate_assignment(
    topology: &NetworkTopology,
    services: &[ServiceMatrix],
    exogenous: &[Vec<f64>],
    assignment: &JointAssignment,
) -> Result<NetworkTrace> {
    if assignment.0.len() != topology.len() {
        return Err(Error::invalid("assignment must cover every node"));
    }
    let mut policies = assignment
        .0
        .iter()
        .map(|&arm| {
            SimplePolicy::new(SimpleKind::Fixed(arm), topology.channels_per_node())
                .map(|p| Box::new(p) as Box<dyn Policy>)
        })
        .collect::<Result<Vec<_>>>()?;
    let unused = RngStream::new(0, crate::env::StreamId::new(Purpose::Policy, 0));
    simulate_network(topology, services, exogenous, &mut policies, &unused)
}

/// All `N^|V|` assignments in lexicographic order (node 0 most significant).
pub fn enumerate_joint_assignments(topology: &NetworkTopology) -> Result<Vec<JointAssignment>> {
    let n = topology.channels_per_node() as u128;
    let v = topology.len() as u32;
    let count = n.checked_pow(v).filter(|&c| c <= MAX_JOINT_ASSIGNMENTS);
    let count = count.ok_or_else(|| {
        Error::Resource(format!(
            "{} channels over {v} nodes exceeds {MAX_JOINT_ASSIGNMENTS} joint assignments; \
             benchmark against a sampled subset instead",
            topology.channels_per_node()
        ))
    })? as usize;
    let n = n as usize;
    Ok((0..count)
        .map(|mut code| {
            let mut a = vec![0; v as usize];
            for slot in a.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            JointAssignment(a)
        })
        .collect())
}

/// Simulates each assignment, in parallel, keeping input order.
pub fn benchmark_traces(
    topology: &NetworkTopology,
    services: &[ServiceMatrix],
    exogenous: &[Vec<f64>],
    assignments: &[JointAssignment],
) -> Result<Vec<(JointAssignment, NetworkTrace)>> {
    assignments
        .par_iter()
        .map(|a| Ok((a.clone(), simulate_assignment(topology, services, exogenous, a)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRegret {
    /// `R_G = max_v R_{Q,v}`.
    pub value: f64,
    /// Node attaining `R_G` (lowest index on ties).
    pub node: usize,
    /// `R_{Q,v}` for every node.
    pub per_node: Vec<f64>,
}

/// Per-node queue regret against every benchmark assignment, maximized over nodes.
pub fn network_regret(
    policy: &NetworkTrace,
    benchmarks: &[(JointAssignment, NetworkTrace)],
) -> Result<NetworkRegret> {
    if benchmarks.is_empty() {
        return Err(Error::invalid("benchmark set is empty"));
    }
    let nodes = policy.queues.len();
    let horizon = policy.horizon();
    if horizon == 0 {
        return Err(Error::invalid("policy trace is empty"));
    }
    for (a, b) in benchmarks {
        if b.queues.len() != nodes || b.horizon() != horizon {
            return Err(Error::invalid(format!("benchmark {:?} has a different shape", a.0)));
        }
    }
    let per_node: Vec<f64> = (0..nodes)
        .map(|v| {
            let mut worst = f64::NEG_INFINITY;
            for t in 1..=horizon {
                for (_, b) in benchmarks {
                    worst = worst.max(policy.queues[v].lengths[t] - b.queues[v].lengths[t]);
                }
            }
            worst
        })
        .collect();
    let mut node = 0;
    for (v, &r) in per_node.iter().enumerate() {
        if r > per_node[node] {
            node = v;
        }
    }
    Ok(NetworkRegret {
        value: per_node[node],
        node,
        per_node,
    })
}

/// `max_v max_t Q_v(t)` over a network trace.
pub fn network_peak(trace: &NetworkTrace) -> f64 {
    trace
        .queues
        .iter()
        .map(QueueTrace::peak)
        .fold(0.0, f64::max)
}

/// Among already simulated benchmarks, the one with the smallest network-wide
/// peak queue; ties go to the earliest entry.
pub fn best_benchmark(benchmarks: &[(JointAssignment, NetworkTrace)]) -> Option<(JointAssignment, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, (_, trace)) in benchmarks.iter().enumerate() {
        let p = network_peak(trace);
        if best.is_none_or(|(_, bp)| p < bp) {
            best = Some((k, p));
        }
    }
    best.map(|(k, p)| (benchmarks[k].0.clone(), p))
}

/// The joint assignment with the smallest network-wide peak queue.
pub fn best_joint_assignment(
    topology: &NetworkTopology,
    services: &[ServiceMatrix],
    exogenous: &[Vec<f64>],
) -> Result<(JointAssignment, f64)> {
    check_inputs(topology, services, exogenous)?;
    let all = enumerate_joint_assignments(topology)?;
    let peaks: Vec<f64> = all
        .par_iter()
        .map(|a| simulate_assignment(topology, services, exogenous, a).map(|t| network_peak(&t)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, &p) in peaks.iter().enumerate() {
        if p < peaks[best] {
            best = k;
        }
    }
    Ok((all[best].clone(), peaks[best]))
}
