//! A three-node line network: per-node bandit scheduling against every joint
//! fixed channel assignment.

use queue_regret::env::{generate_service_matrix, ChannelModel, Purpose, RngStream, StreamId};
use queue_regret::network::{
    benchmark_traces, best_benchmark, enumerate_joint_assignments, network_peak, network_regret, simulate_network,
    NetworkTopology,
};
use queue_regret::policy::{Policy, PolicySpec};
use rand::Rng;

fn main() -> queue_regret::Result<()> {
    let (n, t) = (2usize, 600usize);
    let topo = NetworkTopology::line(3, n)?;
    let services = (0..3)
        .map(|v| {
            let s = RngStream::new(17, StreamId::new(Purpose::Services, 1).node(v));
            generate_service_matrix(&ChannelModel::BlockMarkov { num_blocks: 3, initial_rate: None }, t, n, &s)
        })
        .collect::<queue_regret::Result<Vec<_>>>()?;
    let mut g = RngStream::new(17, StreamId::new(Purpose::Arrivals, 1)).rng();
    let exo: Vec<f64> = (0..t).map(|_| 0.7 * g.random::<f64>()).collect();
    let exogenous = vec![exo, vec![0.0; t], vec![0.0; t]];

    let assignments = enumerate_joint_assignments(&topo)?;
    let benchmarks = benchmark_traces(&topo, &services, &exogenous, &assignments)?;
    if let Some((best, peak)) = best_benchmark(&benchmarks) {
        println!("best joint assignment {:?} with network peak {peak:.3}", best.0);
    }

    for spec in [PolicySpec::WaMab, PolicySpec::Uniform] {
        let mut policies: Vec<Box<dyn Policy>> =
            (0..3).map(|_| spec.build(n, t as u64)).collect::<queue_regret::Result<_>>()?;
        let stream = RngStream::new(17, StreamId::new(Purpose::Policy, 1));
        let trace = simulate_network(&topo, &services, &exogenous, &mut policies, &stream)?;
        let r = network_regret(&trace, &benchmarks)?;
        println!(
            "{:>8}: network regret {:.3} at node {}; per node {:.3?}; peak {:.3}",
            spec.to_string(),
            r.value,
            topo.nodes()[r.node],
            r.per_node,
            network_peak(&trace)
        );
    }
    Ok(())
}
